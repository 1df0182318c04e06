//! Geometric outputs of validated profiles: link samples, doubled loops, a
//! finite-difference mean-curvature check, and file exports.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::equation::{real, ConeParams, Lambda, Slope};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::profile::{ConeProfile, FamilyTag};
use crate::shoot::FamilyPoint;

/// Radial amplitudes of a point on the link: the x-block, y-block and
/// height components. Their squares sum to one.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LinkSample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl LinkSample {
    pub fn at(t: f64, f: f64) -> LinkSample {
        let r = (1.0 + f * f).sqrt();
        LinkSample {
            t,
            x: (1.0 - t * t).sqrt() / r,
            y: t / r,
            z: f / r,
        }
    }

    pub fn norm_sq(&self) -> f64 {
        self.x * self.x + self.y * self.y + self.z * self.z
    }
}

const ARC_GRID: usize = 4000;

/// Parameters t at `m` points equally spaced in arclength along the graph
/// of f over [t1, t2].
fn arclength_ts(profile: &ConeProfile, m: usize) -> Vec<f64> {
    let (t1, t2) = (profile.t1, profile.t2);
    let w = t2 - t1;
    // cosine clustering resolves the steep ends
    let ts: Vec<f64> = (0..=ARC_GRID)
        .map(|i| t1 + 0.5 * w * (1.0 - (std::f64::consts::PI * i as f64 / ARC_GRID as f64).cos()))
        .collect();
    let fs: Vec<f64> = ts
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            if i == 0 || i == ARC_GRID {
                0.0
            } else {
                profile.eval(t).map_or(0.0, |p| p.f)
            }
        })
        .collect();
    let mut cum = vec![0.0; ts.len()];
    for i in 1..ts.len() {
        cum[i] = cum[i - 1] + (ts[i] - ts[i - 1]).hypot(fs[i] - fs[i - 1]);
    }
    let total = cum[ARC_GRID];
    let m = m.max(2);
    (0..m)
        .map(|j| {
            if j == 0 {
                return t1;
            }
            if j + 1 == m {
                return t2;
            }
            let target = total * j as f64 / (m - 1) as f64;
            let i = cum.partition_point(|&c| c < target).clamp(1, ARC_GRID);
            let r = (target - cum[i - 1]) / (cum[i] - cum[i - 1]);
            ts[i - 1] + r * (ts[i] - ts[i - 1])
        })
        .collect()
}

/// `m` link samples spaced uniformly in arclength of the profile curve.
pub fn link_samples(profile: &ConeProfile, m: usize) -> Vec<LinkSample> {
    let ts = arclength_ts(profile, m);
    let last = ts.len() - 1;
    Exec::default().map(&ts.iter().copied().enumerate().collect::<Vec<_>>(), |&(i, t)| {
        let f = if i == 0 || i == last {
            0.0
        } else {
            profile.eval(t).map_or(0.0, |p| p.f)
        };
        LinkSample::at(t, f)
    })
}

/// The profile curve reflected across the equator z = 0 into a closed loop.
#[derive(Clone, Debug, Serialize)]
pub struct DoubledProfile {
    /// (t, z) traversing the upper arc left to right, then the lower arc back.
    pub points: Vec<(f64, f64)>,
    pub closed: bool,
    /// Angle between the one-sided tangents at each equator crossing.
    pub closure_angles: (f64, f64),
    pub crossings: usize,
}

pub const CLOSURE_TOL: f64 = 1e-6;

/// Doubles a free-boundary profile; refuses profiles meeting the equator
/// at an angle, which would double to a crease.
pub fn double(profile: &ConeProfile, m: usize) -> Result<DoubledProfile> {
    if profile.family != FamilyTag::FreeBoundary || !profile.is_free_boundary() {
        return Err(Error::NotFreeBoundary);
    }
    let upper: Vec<(f64, f64)> = link_samples(profile, m).iter().map(|s| (s.t, s.z)).collect();
    let mut points = upper.clone();
    points.extend(upper.iter().rev().skip(1).take(upper.len() - 2).map(|&(t, z)| (t, -z)));
    // outgoing upper tangent (cos b, sin b); the mirrored lower arc runs
    // back with (-cos b, sin b)
    let gap = |t: f64| {
        profile.angle(t).map_or(f64::INFINITY, |b| {
            let (sn, cs) = b.sin_cos();
            let dot = cs * -cs + sn * sn;
            dot.clamp(-1.0, 1.0).acos()
        })
    };
    let closure_angles = (gap(profile.t1), gap(profile.t2));
    let mut crossings = 0;
    let nz: Vec<f64> = points.iter().map(|p| p.1).filter(|z| *z != 0.0).collect();
    for i in 0..nz.len() {
        if nz[i].signum() != nz[(i + 1) % nz.len()].signum() {
            crossings += 1;
        }
    }
    Ok(DoubledProfile {
        closed: closure_angles.0 <= CLOSURE_TOL && closure_angles.1 <= CLOSURE_TOL,
        points,
        closure_angles,
        crossings,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CurvatureReport {
    /// Largest |H| at step 1e-4 rho.
    pub max_abs: f64,
    /// Largest |H| divided by the sum of magnitudes of its terms.
    pub max_relative: f64,
    /// Largest |H| at half the step.
    pub max_abs_half: f64,
    /// Whether the step and half-step estimates agree within a factor 10.
    pub richardson_ok: bool,
    pub points: usize,
}

pub const CURVATURE_TOL: f64 = 1e-5;
const FD_STEP: f64 = 1e-4;

/// Mean curvature (or Laplacian when lambda = 0) of the graph of
/// U(x, y) = sqrt(lambda) |(x, y)| f(|y| / |(x, y)|) at the unit-sphere
/// points with the given t, computed by central differences of the flux in
/// the block radii (|x|, |y|).
pub fn mean_curvature_of<F>(params: &ConeParams, eval: F, ts: &[f64]) -> Result<CurvatureReport>
where
    F: Fn(f64) -> Option<(f64, f64)> + Sync,
{
    let (lam, harmonic) = match params.lambda() {
        Lambda::Finite(v) if v == 0.0 => (1.0, true),
        Lambda::Finite(v) => (v, false),
        Lambda::Infinite => (1.0, false),
    };
    let amp = lam.sqrt();
    let p = (params.n() - params.k()) as f64;
    let q = params.k() as f64;
    let flux = |a: f64, b: f64| -> Option<(f64, f64)> {
        let rho = a.hypot(b);
        let t = b / rho;
        let (f, fp) = eval(t)?;
        let (f, fp) = (amp * f, amp * fp);
        let ua = (a / rho) * (f - t * fp);
        let ub = t * f + (1.0 - t * t) * fp;
        let w = if harmonic { 1.0 } else { (1.0 + ua * ua + ub * ub).sqrt() };
        Some((ua / w, ub / w))
    };
    let op = |t: f64, h: f64| -> Option<(f64, f64)> {
        let (a, b) = ((1.0 - t * t).sqrt(), t);
        let (fa, fb) = flux(a, b)?;
        let d_a = (flux(a + h, b)?.0 - flux(a - h, b)?.0) / (2.0 * h);
        let d_b = (flux(a, b + h)?.1 - flux(a, b - h)?.1) / (2.0 * h);
        let terms = [d_a, d_b, (p - 1.0) / a * fa, (q - 1.0) / b * fb];
        let sum: f64 = terms.iter().sum();
        let scale: f64 = terms.iter().map(|x| x.abs()).sum();
        Some((sum.abs(), if scale > 0.0 { sum.abs() / scale } else { 0.0 }))
    };
    let rows = Exec::default().map(ts, |&t| {
        let full = op(t, FD_STEP);
        let half = op(t, 0.5 * FD_STEP);
        (full, half)
    });
    let mut r = CurvatureReport {
        max_abs: 0.0,
        max_relative: 0.0,
        max_abs_half: 0.0,
        richardson_ok: true,
        points: 0,
    };
    for (t, (full, half)) in ts.iter().zip(rows) {
        let (Some((h, rel)), Some((h2, _))) = (full, half) else {
            return Err(Error::Domain { what: "curvature sample t", value: *t });
        };
        r.max_abs = r.max_abs.max(h);
        r.max_relative = r.max_relative.max(rel);
        r.max_abs_half = r.max_abs_half.max(h2);
        r.points += 1;
    }
    let (a, b) = (r.max_abs, r.max_abs_half);
    r.richardson_ok = a.max(b) <= 10.0 * a.min(b) || a.max(b) <= 1e-12;
    Ok(r)
}

/// Curvature check of a profile on `m` points inside its positive phase.
pub fn mean_curvature_oracle(profile: &ConeProfile, m: usize) -> Result<CurvatureReport> {
    let w = profile.t2 - profile.t1;
    let margin = (0.02 * w).max(2e-3);
    let ts: Vec<f64> = (0..m.max(2))
        .map(|i| profile.t1 + margin + (w - 2.0 * margin) * i as f64 / (m.max(2) - 1) as f64)
        .collect();
    mean_curvature_of(&profile.params, |t| profile.eval(t).map(|p| (p.f, p.fp)), &ts)
}

/// Exported form of a profile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileRecord {
    pub n: u32,
    pub k: u32,
    pub lambda: Lambda,
    pub family: FamilyTag,
    pub t1: f64,
    pub t2: f64,
    pub slope1: Slope,
    pub slope2: Slope,
    pub theta: f64,
    pub samples: Vec<SampleRecord>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub t: f64,
    pub f: f64,
    #[serde(with = "real")]
    pub fp: f64,
}

fn endpoint_rows(profile: &ConeProfile, m: usize) -> Vec<(f64, f64, f64)> {
    let pts = profile.samples(m);
    let last = pts.len() - 1;
    pts.iter()
        .enumerate()
        .map(|(i, p)| {
            let fp = match i {
                0 => profile.slope1.value(),
                i if i == last => profile.slope2.value(),
                _ => p.fp,
            };
            (p.t, p.f, fp)
        })
        .collect()
}

impl ProfileRecord {
    pub fn from_profile(profile: &ConeProfile, m: usize) -> ProfileRecord {
        ProfileRecord {
            n: profile.params.n(),
            k: profile.params.k(),
            lambda: profile.params.lambda(),
            family: profile.family,
            t1: profile.t1,
            t2: profile.t2,
            slope1: profile.slope1,
            slope2: profile.slope2,
            theta: profile.theta,
            samples: endpoint_rows(profile, m)
                .into_iter()
                .map(|(t, f, fp)| SampleRecord { t, f, fp })
                .collect(),
        }
    }
}

fn write_file(path: &Path, body: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, body).map_err(|e| Error::io(path, e))
}

/// 17 significant digits, with inf / -inf / nan spelled out.
pub fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:.16e}")
    }
}

pub fn profile_csv(profile: &ConeProfile, m: usize) -> String {
    let (left, right) = profile.measured_angles();
    let alpha = profile.params.alpha();
    let mut out = String::from("t,f,fp,h,A,theta_left,theta_right\n");
    for (t, f, fp) in endpoint_rows(profile, m) {
        let a = t - alpha / t;
        let h = if fp.is_infinite() { -a * fp } else { f - a * fp };
        let row = [t, f, fp, h, a, left, right].map(fmt_num).join(",");
        out.push_str(&row);
        out.push('\n');
    }
    out
}

pub fn export_profile_csv(profile: &ConeProfile, m: usize, path: &Path) -> Result<()> {
    write_file(path, &profile_csv(profile, m))
}

pub fn profile_json(profile: &ConeProfile, m: usize) -> Result<String> {
    Ok(serde_json::to_string_pretty(&ProfileRecord::from_profile(profile, m))? + "\n")
}

pub fn export_profile_json(profile: &ConeProfile, m: usize, path: &Path) -> Result<()> {
    write_file(path, &profile_json(profile, m)?)
}

pub fn import_profile_json(path: &Path) -> Result<ProfileRecord> {
    let body = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&body)?)
}

pub fn family_csv(points: &[FamilyPoint]) -> String {
    let mut out = String::from("a,theta,t1,t2\n");
    for p in points {
        let o = |v: Option<f64>| v.map_or_else(String::new, fmt_num);
        let _ = writeln!(out, "{},{},{},{}", fmt_num(p.a), o(p.theta), o(p.t1), o(p.t2));
    }
    out
}

pub fn export_family_csv(points: &[FamilyPoint], path: &Path) -> Result<()> {
    write_file(path, &family_csv(points))
}

const SVG_W: f64 = 640.0;
const SVG_H: f64 = 400.0;
const SVG_PAD: f64 = 40.0;
const SVG_POINTS: usize = 300;

/// Polylines of (t, f) for each profile, ordered by contact angle, with
/// free-boundary curves drawn in heavy black.
pub fn plot_svg_string(profiles: &[ConeProfile]) -> Result<String> {
    if profiles.is_empty() {
        return Err(Error::EmptyPlot);
    }
    let mut order: Vec<&ConeProfile> = profiles.iter().collect();
    order.sort_by(|a, b| a.theta.total_cmp(&b.theta));
    let curves: Vec<Vec<(f64, f64)>> = order
        .iter()
        .map(|p| p.samples(SVG_POINTS).iter().map(|q| (q.t, q.f)).collect())
        .collect();
    let f_max = curves
        .iter()
        .flatten()
        .map(|c| c.1)
        .fold(0.0f64, f64::max)
        .max(1e-300);
    let y_top = 1.1 * f_max;
    let sx = |t: f64| SVG_PAD + t * (SVG_W - 2.0 * SVG_PAD);
    let sy = |f: f64| SVG_H - SVG_PAD - (f / y_top).clamp(-0.05, 1.05) * (SVG_H - 2.0 * SVG_PAD);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SVG_W}\" height=\"{SVG_H}\" viewBox=\"0 0 {SVG_W} {SVG_H}\">"
    );
    let _ = writeln!(out, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
    let _ = writeln!(
        out,
        "<path d=\"M{:.3} {:.3} H{:.3} M{:.3} {:.3} V{:.3}\" stroke=\"#888\" fill=\"none\"/>",
        sx(0.0),
        sy(0.0),
        sx(1.0),
        sx(0.0),
        sy(0.0),
        sy(y_top)
    );
    let _ = writeln!(
        out,
        "<text x=\"{:.3}\" y=\"{:.3}\" font-size=\"12\">t</text>",
        sx(1.0) + 6.0,
        sy(0.0) + 4.0
    );
    let _ = writeln!(
        out,
        "<text x=\"{:.3}\" y=\"{:.3}\" font-size=\"12\">f max {}</text>",
        sx(0.0) + 4.0,
        sy(y_top) - 6.0,
        fmt_num(f_max)
    );
    let count = order.len();
    for (i, (p, c)) in order.iter().zip(&curves).enumerate() {
        let pts: Vec<String> = c.iter().map(|&(t, f)| format!("{:.3},{:.3}", sx(t), sy(f))).collect();
        let (stroke, width) = if p.family == FamilyTag::FreeBoundary {
            ("#000000".to_string(), 2.5)
        } else {
            let hue = 240.0 * i as f64 / count.max(2) as f64;
            (format!("hsl({hue:.1},70%,45%)"), 1.2)
        };
        let _ = writeln!(
            out,
            "<polyline data-theta=\"{}\" data-family=\"{}\" fill=\"none\" stroke=\"{stroke}\" stroke-width=\"{width}\" points=\"{}\"/>",
            fmt_num(p.theta),
            p.family.as_str(),
            pts.join(" ")
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

pub fn plot_svg(profiles: &[ConeProfile], path: &Path) -> Result<()> {
    let body = plot_svg_string(profiles)?;
    write_file(path, &body)
}
