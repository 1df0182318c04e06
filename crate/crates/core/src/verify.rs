//! Named verification suites. Each check records the measured quantity
//! and its limit; reports are deterministic for a given seed.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, FRAC_PI_6};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::equation::{
    coeff_a, contact_angle, diagnostics, f_over_psi_prime, h_prime, ratio_prime, real, relative_residual,
    rescale_params, rescale_point, rhs_capillary, rhs_linear, ConeParams, PhasePoint, Slope,
};
use crate::error::Result;
use crate::exec::{log_grid, Exec};
use crate::geom::{mean_curvature_of, mean_curvature_oracle, CURVATURE_TOL};
use crate::integrate::{integrate, shoot, EventSpec, Form, Launch, ShotSpec, Tolerance, Trajectory};
use crate::phi::{l_transform, launch_convergence, rescaled_shot_error, solve_phi, DEFAULT_S_MAX};
use crate::profile::{ConeProfile, ANGLE_TOL, RESIDUAL_TOL};
use crate::series::{build_series, eval_series};
use crate::shoot::{
    a_star_profile, linear_barrier, one_phase_even, one_phase_two_zero, shallow_angle_limit, solve_capillary_cone,
    solve_free_boundary, symmetric_angle, symmetric_for_angle, REFINE_FACTOR,
};
use crate::special::first_zero;

/// The dimension pairs exercised by the suites.
pub const PAIRS: [(u32, u32); 6] = [(4, 2), (5, 2), (5, 3), (6, 2), (6, 3), (6, 4)];
const ANGLES: [f64; 3] = [FRAC_PI_6, FRAC_PI_4, FRAC_PI_3];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    #[serde(with = "real")]
    pub measured: f64,
    #[serde(with = "real")]
    pub limit: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, measured: f64, limit: f64) -> Check {
        Check {
            name: name.into(),
            passed,
            measured,
            limit,
            note: None,
        }
    }

    pub fn at_most(name: impl Into<String>, measured: f64, limit: f64) -> Check {
        Check::new(name, measured <= limit, measured, limit)
    }

    pub fn below(name: impl Into<String>, measured: f64, limit: f64) -> Check {
        Check::new(name, measured < limit, measured, limit)
    }

    pub fn at_least(name: impl Into<String>, measured: f64, limit: f64) -> Check {
        Check::new(name, measured >= limit, measured, limit)
    }

    pub fn above(name: impl Into<String>, measured: f64, limit: f64) -> Check {
        Check::new(name, measured > limit, measured, limit)
    }

    pub fn holds(name: impl Into<String>, ok: bool) -> Check {
        Check::new(name, ok, if ok { 1.0 } else { 0.0 }, 1.0)
    }

    pub fn failed(name: impl Into<String>, err: impl fmt::Display) -> Check {
        let mut c = Check::new(name, false, f64::NAN, f64::NAN);
        c.note = Some(err.to_string());
        c
    }

    fn with_note(mut self, note: impl Into<String>) -> Check {
        self.note = Some(note.into());
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    CoreIdentities,
    Structure,
    Bounds,
    Involution,
    PhiLimit,
    OnePhase,
    EndToEnd,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::CoreIdentities,
        Suite::Structure,
        Suite::Bounds,
        Suite::Involution,
        Suite::PhiLimit,
        Suite::OnePhase,
        Suite::EndToEnd,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Suite::CoreIdentities => "core-identities",
            Suite::Structure => "structure",
            Suite::Bounds => "bounds",
            Suite::Involution => "involution",
            Suite::PhiLimit => "phi-limit",
            Suite::OnePhase => "one-phase",
            Suite::EndToEnd => "end-to-end",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Suite, String> {
        Suite::ALL.into_iter().find(|x| x.as_str() == s).ok_or_else(|| {
            let names: Vec<_> = Suite::ALL.iter().map(|x| x.as_str()).collect();
            format!("unknown suite {s:?}; expected one of {}", names.join(", "))
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

pub fn run_suite(suite: Suite, seed: u64) -> SuiteReport {
    let checks = match suite {
        Suite::CoreIdentities => core_identities(seed),
        Suite::Structure => structure(seed),
        Suite::Bounds => bounds(),
        Suite::Involution => involution(),
        Suite::PhiLimit => phi_limit(),
        Suite::OnePhase => one_phase(),
        Suite::EndToEnd => end_to_end(),
    };
    SuiteReport {
        suite: suite.as_str().into(),
        seed,
        passed: checks.iter().all(|c| c.passed),
        checks,
    }
}

fn push_result(out: &mut Vec<Check>, name: &str, r: Result<Vec<Check>>) {
    match r {
        Ok(cs) => out.extend(cs),
        Err(e) => out.push(Check::failed(name, e)),
    }
}

fn params(n: u32, k: u32) -> ConeParams {
    ConeParams::new(n, k).expect("suite pairs are admissible")
}

fn fine() -> Tolerance {
    Tolerance::default().scaled(REFINE_FACTOR)
}

fn random_slope(rng: &mut ChaCha8Rng) -> Slope {
    if rng.gen_bool(1.0 / 3.0) {
        Slope::PosInf
    } else {
        Slope::Finite(10f64.powf(rng.gen_range(-1.0..2.5)))
    }
}

/// Largest of `f(t)` over `m` points of [lo, hi].
fn sup_over(lo: f64, hi: f64, m: usize, f: impl Fn(f64) -> Option<f64>) -> f64 {
    (0..=m)
        .map(|i| f(lo + (hi - lo) * i as f64 / m as f64).unwrap_or(f64::INFINITY))
        .fold(0.0, f64::max)
}

/// Central difference of `g` at t with step dt.
fn central(g: &impl Fn(f64) -> Option<f64>, t: f64, dt: f64) -> Option<f64> {
    Some((g(t + dt)? - g(t - dt)?) / (2.0 * dt))
}

// ---------------------------------------------------------------- core

fn core_identities(seed: u64) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();

    let a42 = coeff_a(&params(4, 2), FRAC_1_SQRT_2).unwrap_or(f64::NAN);
    let a52 = coeff_a(&params(5, 2), 1.0 / 3f64.sqrt()).unwrap_or(f64::NAN);
    out.push(Check::at_most("coefficient-root-at-sqrt-alpha", a42.abs().max(a52.abs()), 1e-15));
    let ang = contact_angle(0.6, Slope::Finite(1.25));
    out.push(Check::at_most("contact-angle-example", (ang - FRAC_PI_4).abs(), 1e-15));
    out.push(Check::holds(
        "contact-angle-vertical",
        contact_angle(0.3, Slope::PosInf) == FRAC_PI_2 && contact_angle(0.3, Slope::Finite(0.0)) == 0.0,
    ));

    // linear operator against the lambda = 0 capillary operator
    let mut worst: f64 = 0.0;
    for _ in 0..2000 {
        let (n, k) = PAIRS[rng.gen_range(0..PAIRS.len())];
        let p = ConeParams::linear(n, k).expect("admissible");
        let pt = PhasePoint::new(rng.gen_range(0.01..0.99), rng.gen_range(-2.0..2.0), rng.gen_range(-5.0..5.0));
        let (Ok(a), Ok(b)) = (rhs_linear(&p, &pt), rhs_capillary(&p, &pt)) else {
            worst = f64::INFINITY;
            continue;
        };
        let scale = ((n - 1) as f64 * (pt.f - pt.t * pt.fp).abs() + (k - 1) as f64 * (pt.fp / pt.t).abs())
            / (1.0 - pt.t * pt.t);
        worst = worst.max((a - b).abs() / scale.max(f64::MIN_POSITIVE));
    }
    out.push(Check::at_most("linear-equals-lambda-zero", worst, 1e-14));

    // rescaling lambda and the involution map solutions to solutions
    let (mut resc, mut inv): (f64, f64) = (0.0, 0.0);
    for _ in 0..1000 {
        let (n, k) = PAIRS[rng.gen_range(0..PAIRS.len())];
        let p = params(n, k);
        let pt = PhasePoint::new(rng.gen_range(0.02..0.98), rng.gen_range(0.0..2.0), rng.gen_range(-5.0..5.0));
        let Ok(fpp) = rhs_capillary(&p, &pt) else { continue };
        let r: f64 = rng.gen_range(0.1..10.0);
        if let (Ok(q), Ok(pr)) = (rescale_point(&pt, r * r), rescale_params(&p, r * r)) {
            let res = relative_residual(&pr, q.t, q.f, q.fp, fpp / r).unwrap_or(f64::INFINITY);
            resc = resc.max(res);
        }
        let s = pt.t;
        let t = (1.0 - s * s).sqrt();
        let gp = -(t / s) * pt.fp;
        let gpp = (t * t / (s * s)) * fpp - pt.fp / (s * s * s);
        let res = relative_residual(&p.involuted(), t, pt.f, gp, gpp).unwrap_or(f64::INFINITY);
        inv = inv.max(res);
    }
    out.push(Check::at_most("rescaled-lambda-residual", resc, 1e-10));
    out.push(Check::at_most("involuted-point-residual", inv, 1e-10));

    // dense-output identities along randomized shots
    let specs: Vec<(u32, u32, f64, Slope)> = (0..8)
        .map(|_| {
            let (n, k) = PAIRS[rng.gen_range(0..PAIRS.len())];
            let sa = params(n, k).sqrt_alpha();
            (n, k, sa * rng.gen_range(0.02..0.95), random_slope(&mut rng))
        })
        .collect();
    let rows = Exec::default().map(&specs, |&(n, k, t1, slope)| trajectory_identities(params(n, k), t1, slope));
    let mut acc = [0.0f64; 4];
    for r in rows {
        match r {
            Ok(v) => {
                for i in 0..4 {
                    acc[i] = acc[i].max(v[i]);
                }
            }
            Err(e) => out.push(Check::failed("trajectory-identities", e)),
        }
    }
    out.push(Check::at_most("trajectory-residual", acc[0], RESIDUAL_TOL));
    out.push(Check::at_most("h-derivative-identity", acc[1], 1e-6));
    out.push(Check::at_most("f-over-psi-identity", acc[2], 1e-6));
    out.push(Check::at_most("ratio-riccati-identity", acc[3], 1e-6));

    push_result(&mut out, "vertical-launch", vertical_launch_checks());
    out
}

/// Sup residual, then normalized errors of the h', (f/psi)' and ratio
/// identities, along one shot.
fn trajectory_identities(p: ConeParams, t1: f64, slope: Slope) -> Result<[f64; 4]> {
    let shot = shoot(&ShotSpec::new(p, t1, slope), fine())?;
    let tr = &shot.traj;
    let (ta, tb) = tr.t_span();
    let w = tb - ta;
    let res = sup_over(ta + 1e-3 * w, tb - 1e-3 * w, 400, |t| {
        let (f, fp, fpp) = tr.graph2_at_t(t)?;
        relative_residual(&p, t, f, fp, fpp).ok()
    });
    let al = p.alpha();
    let sa = p.sqrt_alpha();
    let point = |t: f64| tr.at_t(t);
    let h = |t: f64| point(t).map(|q| q.f - (t - al / t) * q.fp);
    let g = |t: f64| point(t).map(|q| q.f / (t * t - al).abs().sqrt());
    let ratio = |t: f64| point(t).map(|q| q.fp / (q.f - (t - al / t) * q.fp));
    let dt = 1e-5 * w;
    let (mut eh, mut eg, mut er) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..=60 {
        let t = ta + w * (0.05 + 0.9 * i as f64 / 60.0);
        let Some(q) = point(t) else { continue };
        let Ok(d) = diagnostics(&p, &q) else { continue };
        if let (Some(fd), Ok(pred)) = (central(&h, t, dt), h_prime(&p, &q)) {
            let scale = (d.a * d.s * d.h).abs() + (al * (1.0 - al) / (t * t * (1.0 - t * t)) * q.fp).abs();
            eh = eh.max((fd - pred).abs() / scale);
        }
        if (t - sa).abs() > 0.05 {
            if let (Some(fd), Ok(pred)) = (central(&g, t, dt), f_over_psi_prime(&p, &q)) {
                let dpsi = t / d.psi;
                let scale = (q.fp / d.psi).abs() + (q.f * dpsi / (d.psi * d.psi)).abs();
                eg = eg.max((fd - pred).abs() / scale);
            }
        }
        if d.h.abs() > 0.05 * (q.f.abs() + (d.a * q.fp).abs()) {
            if let (Some(fd), Ok(pred), Some(r)) = (central(&ratio, t, dt), ratio_prime(&p, &q), d.ratio) {
                let wt = 1.0 - t * t;
                let scale = (al * (1.0 - al) / (t * t * wt) * r * r).abs()
                    + ((al / (t * wt) - d.a * d.s) * r).abs()
                    + d.s.abs();
                er = er.max((fd - pred).abs() / scale);
            }
        }
    }
    Ok([res, eh, eg, er])
}

fn series_shot(p: &ConeParams, t1: f64, delta: f64, checkpoint: f64) -> Result<f64> {
    let s = build_series(p, t1, 0.0, 8)?;
    let pt = eval_series(&s, t1 + delta)?;
    let tr = integrate(p, Form::F, &Launch::from(pt), 1, &[EventSpec::reach_t(checkpoint)], fine())?;
    Ok(tr.end().f)
}

fn vertical_launch_checks() -> Result<Vec<Check>> {
    let p = params(4, 2);
    let (t1, checkpoint) = (0.15, 0.5);
    let offs = [1e-4, 1e-5, 1e-6];
    let vals: Vec<f64> = offs
        .iter()
        .map(|&d| series_shot(&p, t1, d, checkpoint))
        .collect::<Result<_>>()?;
    let spread = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - vals.iter().cloned().fold(f64::INFINITY, f64::min);
    let reference = vals[2];
    let errs: Vec<f64> = [1e2, 1e3, 1e4]
        .iter()
        .map(|&m| -> Result<f64> {
            let tr = integrate(
                &p,
                Form::Arc,
                &Launch {
                    t: t1,
                    value: 0.0,
                    slope: Slope::Finite(m),
                },
                1,
                &[EventSpec::reach_t(checkpoint)],
                fine(),
            )?;
            Ok((tr.end().f - reference).abs())
        })
        .collect::<Result<_>>()?;
    let decreasing = errs.windows(2).all(|w| w[1] < w[0]);
    Ok(vec![
        Check::at_most("vertical-launch/offset-independence", spread, 1e-7),
        Check::holds("vertical-launch/slope-convergence", decreasing).with_note(format!("errors {errs:?}")),
    ])
}

// ---------------------------------------------------------------- structure

struct Sample {
    t: f64,
    f: f64,
    sn: f64,
    cs: f64,
}

fn trajectory_samples(tr: &Trajectory, m: usize, margin: f64) -> Vec<Sample> {
    let (x0, x1) = tr.x_range();
    let len = x1 - x0;
    (0..=m)
        .filter_map(|i| {
            let x = x0 + len * (margin + (1.0 - 2.0 * margin) * i as f64 / m as f64);
            let y = tr.raw_at(x)?;
            let q = tr.phase(&y);
            let (sn, cs) = match tr.form {
                Form::Arc => y[2].sin_cos(),
                _ => q.fp.atan().sin_cos(),
            };
            Some(Sample { t: y[0], f: q.f, sn, cs })
        })
        .collect()
}

fn sign_changes(xs: impl Iterator<Item = f64>) -> (usize, Option<usize>) {
    let mut prev = 0.0;
    let mut count = 0;
    let mut first = None;
    for (i, x) in xs.enumerate() {
        if x == 0.0 {
            continue;
        }
        let s = x.signum();
        if prev != 0.0 && s != prev {
            count += 1;
            first.get_or_insert(i);
        }
        prev = s;
    }
    (count, first)
}

#[derive(Default)]
struct ShotVerdict {
    two_zero: bool,
    increasing: bool,
    crit_bad: bool,
    h_bad: bool,
    order_bad: bool,
    crossing_bad: bool,
}

fn classify_shot(p: ConeParams, t1: f64, slope: Slope) -> Result<ShotVerdict> {
    let shot = shoot(&ShotSpec::new(p, t1, slope), Tolerance::default())?;
    let s = trajectory_samples(&shot.traj, 800, 1e-4);
    let al = p.alpha();
    let hc: Vec<f64> = s.iter().map(|q| q.f * q.cs - (q.t - al / q.t) * q.sn).collect();
    let mut v = ShotVerdict::default();
    if let crate::integrate::ShotEnd::Zero { t2, .. } = shot.end {
        v.two_zero = true;
        v.crit_bad = sign_changes(s.iter().map(|q| q.sn)).0 != 1;
        v.h_bad = hc.iter().any(|&h| h <= 0.0);
        v.order_bad = !(t1 < p.sqrt_alpha() && p.sqrt_alpha() < t2);
    } else if s.iter().all(|q| q.sn > 0.0 && q.cs > 0.0) {
        v.increasing = true;
        let (count, first) = sign_changes(hc.iter().copied());
        v.crossing_bad = count > 1 || first.is_some_and(|i| hc[i..].iter().any(|&h| h >= 0.0));
    }
    Ok(v)
}

fn structure(seed: u64) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let specs: Vec<(u32, u32, f64, Slope)> = (0..240)
        .map(|_| {
            let (n, k) = PAIRS[rng.gen_range(0..PAIRS.len())];
            let sa = params(n, k).sqrt_alpha();
            (n, k, sa * rng.gen_range(0.001..0.999), random_slope(&mut rng))
        })
        .collect();
    let verdicts = Exec::default().map(&specs, |&(n, k, t1, slope)| classify_shot(params(n, k), t1, slope));
    let mut out = Vec::new();
    let (mut total, mut two, mut inc) = (0, 0, 0);
    let (mut crit, mut h, mut order, mut cross) = (0, 0, 0, 0);
    for (v, spec) in verdicts.into_iter().zip(&specs) {
        match v {
            Ok(v) => {
                total += 1;
                two += v.two_zero as usize;
                inc += v.increasing as usize;
                crit += v.crit_bad as usize;
                h += v.h_bad as usize;
                order += v.order_bad as usize;
                cross += v.crossing_bad as usize;
            }
            Err(e) => out.push(Check::failed(format!("shot {spec:?}"), e)),
        }
    }
    out.push(Check::at_least("randomized-shots", total as f64, 200.0));
    out.push(Check::at_least("two-zero-shots", two as f64, 1.0));
    out.push(Check::at_least("increasing-no-return-shots", inc as f64, 1.0));
    out.push(Check::at_most("two-zero-single-critical-point-violations", crit as f64, 0.0));
    out.push(Check::at_most("two-zero-h-positive-violations", h as f64, 0.0));
    out.push(Check::at_most("two-zero-ordering-violations", order as f64, 0.0));
    out.push(Check::at_most("increasing-h-single-crossing-violations", cross as f64, 0.0));
    out
}

// ---------------------------------------------------------------- bounds

fn bounds() -> Vec<Check> {
    let mut out = Vec::new();
    let slopes = [Slope::Finite(1.0), Slope::Finite(10.0), Slope::PosInf];
    let mut specs = Vec::new();
    for (n, k) in PAIRS {
        let sa = params(n, k).sqrt_alpha();
        for i in 0..20 {
            for s in slopes {
                specs.push((n, k, sa * (0.02 + 0.96 * i as f64 / 19.0), s));
            }
        }
    }
    let rows = Exec::default().map(&specs, |&(n, k, t1, slope)| -> Result<Option<f64>> {
        let p = params(n, k);
        let shot = shoot(&ShotSpec::new(p, t1, slope), Tolerance::default())?;
        if !shot.end.reaches_zero() {
            return Ok(None);
        }
        let f = shot.traj.at_t(p.sqrt_alpha()).map_or(f64::INFINITY, |q| q.f);
        Ok(Some(f - 2.0 / (n as f64).sqrt()))
    });
    let (mut worst, mut two, mut violations) = (f64::NEG_INFINITY, 0usize, 0usize);
    for r in rows {
        match r {
            Ok(Some(excess)) => {
                two += 1;
                worst = worst.max(excess);
                violations += (excess > 1e-8) as usize;
            }
            Ok(None) => {}
            Err(e) => out.push(Check::failed("sqrt-alpha/shot", e)),
        }
    }
    out.push(Check::at_least("sqrt-alpha/shots", specs.len() as f64, 100.0));
    out.push(Check::at_least("sqrt-alpha/two-zero-shots", two as f64, 1.0));
    out.push(Check::at_most("sqrt-alpha/max-excess-over-2-over-sqrt-n", worst, 1e-8));
    out.push(Check::at_most("sqrt-alpha/violations", violations as f64, 0.0));

    let mut bspecs = Vec::new();
    for (n, k) in PAIRS {
        for t1 in [1e-3, 1e-2] {
            for s in slopes {
                bspecs.push((n, k, t1, s));
            }
        }
    }
    let rows = Exec::default().map(&bspecs, |&(n, k, t1, s)| bernoulli(params(n, k), t1, s));
    let (mut df, mut dfp, mut min_pts) = (f64::NEG_INFINITY, f64::NEG_INFINITY, usize::MAX);
    for r in rows {
        match r {
            Ok((a, b, pts)) => {
                dfp = dfp.max(a);
                df = df.max(b);
                min_pts = min_pts.min(pts);
            }
            Err(e) => out.push(Check::failed("bernoulli/shot", e)),
        }
    }
    out.push(Check::at_most("bernoulli/slope-bound-excess", dfp, 1e-8));
    out.push(Check::at_most("bernoulli/amplitude-bound-excess", df, 1e-8));
    out.push(Check::at_least("bernoulli/min-points-in-regime", min_pts as f64, 10.0));
    out
}

/// Worst excesses over the slope and amplitude comparison bounds on the
/// initial stretch where f' > 0, f <= 0.1, A <= -3 alpha / (4 t) and
/// f'' < -(k - 1) f' (1 + f'^2) / (2 t) hold.
fn bernoulli(p: ConeParams, t1: f64, slope: Slope) -> Result<(f64, f64, usize)> {
    let shot = shoot(&ShotSpec::new(p, t1, slope), fine())?;
    let tr = &shot.traj;
    let k1 = (p.k() - 1) as f64;
    let t_cap = 0.5 * p.sqrt_alpha();
    let (mut efp, mut ef, mut pts) = (f64::NEG_INFINITY, f64::NEG_INFINITY, 0);
    for u in log_grid(1e-8, t_cap / t1 - 1.0, 400) {
        let t = t1 * (1.0 + u);
        let Some((f, fp, fpp)) = tr.graph2_at_t(t) else { break };
        if !(fp > 0.0 && f <= 0.1 && fpp < -k1 * fp * (1.0 + fp * fp) / (2.0 * t)) {
            break;
        }
        pts += 1;
        efp = efp.max(fp - 1.0 / ((t / t1).powf(k1) - 1.0).sqrt());
        ef = ef.max(f - 2.0 / k1.sqrt() * (t1 * (t - t1)).sqrt());
    }
    Ok((efp, ef, pts))
}

// ---------------------------------------------------------------- involution

fn companion_checks(a: &ConeProfile, b: &ConeProfile, tag: &str) -> Vec<Check> {
    let c1 = (b.t1 - (1.0 - a.t2 * a.t2).sqrt()).abs();
    let c2 = (b.t2 - (1.0 - a.t1 * a.t1).sqrt()).abs();
    let (a1, a2) = a.measured_angles();
    let (b1, b2) = b.measured_angles();
    let inv = a.involuted();
    let w = b.t2 - b.t1;
    let d = sup_over(b.t1 + 1e-3 * w, b.t2 - 1e-3 * w, 100, |t| Some((inv.eval(t)?.f - b.eval(t)?.f).abs()));
    // free-boundary landings are only as vertical as the threshold bracket allows
    let landing_tol = if a.is_free_boundary() { ANGLE_TOL } else { 1e-8 };
    vec![
        Check::at_most(format!("companion/{tag}/zeros"), c1.max(c2), 1e-8),
        Check::at_most(format!("companion/{tag}/theta"), (a.theta - b.theta).abs(), 1e-8),
        Check::at_most(
            format!("companion/{tag}/measured-angles"),
            (a1 - b2).abs().max((a2 - b1).abs()),
            landing_tol,
        ),
        Check::at_most(format!("companion/{tag}/profiles"), d, 1e-8),
    ]
}

fn self_symmetry(p: &ConeProfile, tag: &str) -> Vec<Check> {
    let w = p.t2 - p.t1;
    let d = sup_over(p.t1 + 1e-3 * w, p.t2 - 1e-3 * w, 200, |t| {
        Some((p.eval(t)?.f - p.eval((1.0 - t * t).sqrt())?.f).abs())
    });
    let (tp, _) = p.peak();
    vec![
        Check::at_most(format!("self-4-2/{tag}/zeros"), (p.t2 - (1.0 - p.t1 * p.t1).sqrt()).abs(), 1e-8),
        Check::at_most(format!("self-4-2/{tag}/reflection"), d, 1e-8),
        Check::at_most(format!("self-4-2/{tag}/peak"), (tp - FRAC_1_SQRT_2).abs(), 1e-8),
    ]
}

fn involution() -> Vec<Check> {
    let mut out = Vec::new();
    let cases: Vec<Option<f64>> = ANGLES.iter().map(|&a| Some(a)).chain([None]).collect();
    let solve = |n: u32, k: u32, th: Option<f64>| match th {
        Some(th) => solve_capillary_cone(n, k, th),
        None => solve_free_boundary(n, k),
    };
    let tag = |th: Option<f64>| th.map_or("free-boundary".to_string(), |t| format!("theta-{t:.6}"));
    let rows = Exec::default().map(&cases, |&th| (solve(5, 2, th), solve(5, 3, th), solve(4, 2, th)));
    for (th, (a, b, c)) in cases.iter().zip(rows) {
        match (a, b) {
            (Ok(a), Ok(b)) => out.extend(companion_checks(&a, &b, &format!("5-2-5-3/{}", tag(*th)))),
            (Err(e), _) | (_, Err(e)) => out.push(Check::failed(format!("companion/{}", tag(*th)), e)),
        }
        match c {
            Ok(c) => {
                out.extend(self_symmetry(&c, &tag(*th)));
                if th.is_none() {
                    let back = c.involuted().involuted();
                    let w = c.t2 - c.t1;
                    let d = sup_over(c.t1 + 1e-3 * w, c.t2 - 1e-3 * w, 100, |t| {
                        Some((back.eval(t)?.f - c.eval(t)?.f).abs())
                    });
                    out.push(Check::at_most("double-involution-identity", d, 1e-12));
                }
            }
            Err(e) => out.push(Check::failed(format!("self-4-2/{}", tag(*th)), e)),
        }
    }
    match (solve_free_boundary(6, 2), solve_free_boundary(6, 4)) {
        (Ok(a), Ok(b)) => out.extend(companion_checks(&a, &b, "6-2-6-4/free-boundary")),
        (Err(e), _) | (_, Err(e)) => out.push(Check::failed("companion/6-2-6-4", e)),
    }
    out
}

// ---------------------------------------------------------------- phi

fn phi_limit() -> Vec<Check> {
    let mut out = Vec::new();
    for c in [2.0, 3.0, 4.0, 8.0] {
        let sol = match solve_phi(c, DEFAULT_S_MAX) {
            Ok(s) => s,
            Err(e) => {
                out.push(Check::failed(format!("c-{c}/solve"), e));
                continue;
            }
        };
        let star = sol.s_star.unwrap_or(f64::NAN);
        out.push(Check::holds(format!("c-{c}/s-star-found"), star.is_finite()).with_note(format!("s_star = {star}")));
        out.push(Check::holds(
            format!("c-{c}/h-negative-after-s-star"),
            sol.h_negative_after_star(400).unwrap_or(false),
        ));
        let (min_dp, max_ddp) = sol.monotone_while_h_positive(400);
        out.push(Check::above(format!("c-{c}/slope-positive-while-h-positive"), min_dp, 0.0));
        out.push(Check::below(format!("c-{c}/slope-decreasing-while-h-positive"), max_ddp, 0.0));
        let d = 1e-6;
        let lead = sol.at(-1.0 + d).map_or(f64::INFINITY, |(p, _)| (p / (d / c).sqrt() - 1.0).abs());
        out.push(Check::at_most(format!("c-{c}/leading-coefficient"), lead, 1e-2));
        if c <= 4.0 {
            match l_transform(&sol, 80) {
                Ok(l) => {
                    out.push(Check::at_most(format!("c-{c}/l-at-zero"), l.l_at_zero.abs(), 1e-15));
                    out.push(Check::above(format!("c-{c}/l-above-c-tanh"), l.min_gap, 0.0));
                    out.push(Check::at_most(format!("c-{c}/riccati-residual"), l.residual, 1e-6));
                }
                Err(e) => out.push(Check::failed(format!("c-{c}/l-transform"), e)),
            }
            match launch_convergence(c, &[1e2, 1e3, 1e4], 0.0) {
                Ok(e) => out.push(
                    Check::holds(format!("c-{c}/finite-launch-convergence"), e.windows(2).all(|w| w[1] < w[0]))
                        .with_note(format!("errors {e:?}")),
                ),
                Err(e) => out.push(Check::failed(format!("c-{c}/finite-launch-convergence"), e)),
            }
        }
    }
    for (n, k) in [(4, 2), (5, 2), (6, 3)] {
        let r = solve_phi((n - 2) as f64, DEFAULT_S_MAX).and_then(|sol| {
            Ok((rescaled_shot_error(n, k, 1e-2, &sol)?, rescaled_shot_error(n, k, 1e-3, &sol)?))
        });
        match r {
            Ok((a, b)) => out.push(
                Check::below(format!("rescaled-shot-{n}-{k}/error-ratio"), b / a, 1.0)
                    .with_note(format!("errors {a:e}, {b:e}")),
            ),
            Err(e) => out.push(Check::failed(format!("rescaled-shot-{n}-{k}"), e)),
        }
    }
    out
}

// ---------------------------------------------------------------- one-phase

fn one_phase() -> Vec<Check> {
    let pairs = [(4u32, 2u32), (5, 2), (5, 3), (6, 3)];
    let rows = Exec::default().map(&pairs, |&(n, k)| one_phase_pair(n, k));
    let mut out = Vec::new();
    for ((n, k), r) in pairs.iter().zip(rows) {
        push_result(&mut out, &format!("{n}-{k}"), r);
    }
    push_result(&mut out, "superposition", superposition());
    out
}

fn one_phase_pair(n: u32, k: u32) -> Result<Vec<Check>> {
    let tag = format!("{n}-{k}");
    let even = one_phase_even(n, k)?;
    let z = first_zero(n, k)?;
    let two = one_phase_two_zero(n, k)?;
    let grad = |t: f64, s: Slope| (1.0 - t * t) * s.value() * s.value();
    let ratio = grad(two.t1, two.slope1) / grad(two.t2, two.slope2);
    let harm_two = mean_curvature_oracle(&two, 40)?;
    let ts: Vec<f64> = (0..40).map(|i| even.t_zero * (0.02 + 0.96 * i as f64 / 39.0)).collect();
    let harm_even = mean_curvature_of(&even.params, |t| even.eval(t).map(|q| (q.f, q.fp)), &ts)?;
    let barrier = linear_barrier(n, k)?;
    let sa = two.params.sqrt_alpha();

    // second zero of unit-slope linear shots increases with t1
    let lin = ConeParams::linear(n, k)?;
    let grid: Vec<f64> = (0..30).map(|i| barrier * (0.02 + 0.95 * i as f64 / 29.0)).collect();
    let taus = Exec::Sequential.map(&grid, |&t1| -> Result<f64> {
        match shoot(&ShotSpec::new(lin, t1, Slope::Finite(1.0)), Tolerance::default())?.end {
            crate::integrate::ShotEnd::Zero { t2, .. } => Ok(t2),
            _ => Ok(f64::NAN),
        }
    });
    let taus: Vec<f64> = taus.into_iter().collect::<Result<_>>()?;
    let monotone = taus.iter().all(|t| t.is_finite()) && taus.windows(2).all(|w| w[1] > w[0]);

    Ok(vec![
        Check::at_most(format!("{tag}/even-zero-two-methods"), (even.t_zero - z).abs(), 1e-9),
        Check::at_most(format!("{tag}/two-zero-gradient-ratio"), (ratio - 1.0).abs(), 1e-8),
        Check::holds(format!("{tag}/ordering"), two.t1 < z && z < two.t2)
            .with_note(format!("{} < {z} < {}", two.t1, two.t2)),
        Check::at_most(format!("{tag}/harmonic-two-zero"), harm_two.max_abs, CURVATURE_TOL),
        Check::at_most(format!("{tag}/harmonic-even"), harm_even.max_abs, CURVATURE_TOL),
        Check::below(format!("{tag}/barrier-below-sqrt-alpha"), barrier, sa),
        Check::holds(format!("{tag}/second-zero-monotone"), monotone),
        Check::above(format!("{tag}/even-normalization"), even.scale, 0.0),
    ])
}

fn superposition() -> Result<Vec<Check>> {
    let p = ConeParams::linear(4, 2)?;
    let (t1, t_end) = (0.3, 0.65);
    let run = |c0: f64, c1: f64| {
        integrate(
            &p,
            Form::F,
            &Launch {
                t: t1,
                value: c0,
                slope: Slope::Finite(c1),
            },
            1,
            &[EventSpec::reach_t(t_end)],
            fine(),
        )
    };
    let a = run(1.0, 0.0)?;
    let b = run(0.0, 1.0)?;
    let (c0, c1) = (0.7, -1.3);
    let c = run(c0, c1)?;
    let d = sup_over(t1, t_end, 100, |t| Some((c.at_t(t)?.f - (c0 * a.at_t(t)?.f + c1 * b.at_t(t)?.f)).abs()));
    Ok(vec![Check::at_most("superposition", d, 1e-10)])
}

// ---------------------------------------------------------------- end to end

fn end_to_end() -> Vec<Check> {
    let mut out = Vec::new();
    let fb = Exec::default().map(&PAIRS, |&(n, k)| -> Result<Vec<Check>> {
        let p = solve_free_boundary(n, k)?;
        let tag = format!("free-boundary/{n}-{k}");
        let r = p.validate();
        let (a1, a2) = p.measured_angles();
        let h = mean_curvature_oracle(&p, 40)?;
        Ok(vec![
            Check::holds(format!("{tag}/vertical-landings"), p.is_free_boundary()),
            Check::at_most(
                format!("{tag}/landing-angles"),
                (a1 - FRAC_PI_2).abs().max((a2 - FRAC_PI_2).abs()),
                ANGLE_TOL,
            ),
            Check::holds(format!("{tag}/ordering"), r.ordered),
            Check::at_most(format!("{tag}/residual"), r.residual, RESIDUAL_TOL),
            Check::at_most(format!("{tag}/single-critical-point"), (r.critical_points as f64 - 1.0).abs(), 0.0),
            Check::above(format!("{tag}/h-positive"), r.min_h, 0.0),
            Check::at_most(format!("{tag}/mean-curvature"), h.max_relative, CURVATURE_TOL),
        ])
    });
    for ((n, k), r) in PAIRS.iter().zip(fb) {
        push_result(&mut out, &format!("free-boundary/{n}-{k}"), r);
    }

    let cases: Vec<(u32, u32, f64)> = [(4, 2), (5, 2)]
        .iter()
        .flat_map(|&(n, k)| ANGLES.iter().map(move |&th| (n, k, th)))
        .collect();
    let pa = Exec::default().map(&cases, |&(n, k, th)| -> Result<Vec<Check>> {
        let p = solve_capillary_cone(n, k, th)?;
        let tag = format!("per-angle/{n}-{k}/theta-{th:.6}");
        let (a1, a2) = p.measured_angles();
        let r = p.validate();
        Ok(vec![
            Check::at_most(format!("{tag}/angles"), (a1 - th).abs().max((a2 - th).abs()), ANGLE_TOL),
            Check::at_most(format!("{tag}/residual"), r.residual, RESIDUAL_TOL),
            Check::holds(format!("{tag}/validated"), r.passed()),
        ])
    });
    for r in pa {
        push_result(&mut out, "per-angle", r);
    }

    match shallow_angle_limit(4, 2, &[0.4, 0.2, 0.1, 0.05]) {
        Ok(s) => {
            out.push(Check::holds("shallow/decreasing", s.decreasing).with_note(format!("{:?}", s.distances)));
            out.push(Check::at_most("shallow/final-distance", *s.distances.last().unwrap_or(&f64::NAN), 1e-2));
        }
        Err(e) => out.push(Check::failed("shallow", e)),
    }

    push_result(&mut out, "family", family_checks());
    out
}

fn family_checks() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let (a_star, prof) = a_star_profile(2)?;
    let fb = solve_free_boundary(4, 2)?;
    out.push(Check::below("family/a-star-below-bound", a_star, 2f64.sqrt()));
    out.push(Check::at_most("family/a-star-matches-free-boundary", (prof.t1 - fb.t1).abs(), 1e-6));
    let hits = Exec::default().map(&ANGLES, |&th| symmetric_for_angle(2, th).map(|(_, p)| p.theta));
    for (th, r) in ANGLES.iter().zip(hits) {
        match r {
            Ok(got) => out.push(Check::at_most(format!("family/attains-theta-{th:.6}"), (got - th).abs(), 1e-4)),
            Err(e) => out.push(Check::failed(format!("family/attains-theta-{th:.6}"), e)),
        }
    }
    let amps = log_grid(1e-3, 1e-2, 6);
    let ratios: Vec<f64> = Exec::default()
        .map(&amps, |&a| symmetric_angle(2, a).map(|t| t.map_or(f64::NAN, |t| t / a)))
        .into_iter()
        .collect::<Result<_>>()?;
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    out.push(Check::at_most("family/small-amplitude-ratio-spread", hi / lo - 1.0, 0.2).with_note(format!("{ratios:?}")));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.as_str().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn failed_checks_serialize_nan() {
        let c = Check::failed("x", "boom");
        let j = serde_json::to_string(&c).unwrap();
        assert!(j.contains("\"measured\":\"nan\""), "{j}");
    }
}
