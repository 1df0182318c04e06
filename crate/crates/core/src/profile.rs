//! Matched profiles assembled from trajectory pieces, with validation.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::equation::{relative_residual, ConeParams, PhasePoint, Slope};
use crate::error::{Error, Result};
use crate::integrate::Trajectory;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyTag {
    PerAngle,
    FreeBoundary,
    Symmetric,
    OnePhaseI,
    OnePhaseIi,
}

impl FamilyTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            FamilyTag::PerAngle => "per-angle",
            FamilyTag::FreeBoundary => "free-boundary",
            FamilyTag::Symmetric => "symmetric",
            FamilyTag::OnePhaseI => "one-phase-i",
            FamilyTag::OnePhaseIi => "one-phase-ii",
        }
    }
}

/// A trajectory seen through t -> sqrt(1 - t^2) (optionally) and scaled in f.
#[derive(Clone, Debug)]
pub(crate) struct Piece {
    pub traj: Arc<Trajectory>,
    pub involuted: bool,
    pub scale: f64,
    pub lo: f64,
    pub hi: f64,
}

impl Piece {
    pub fn direct(traj: Arc<Trajectory>) -> Piece {
        let (lo, hi) = traj.t_span();
        Piece {
            traj,
            involuted: false,
            scale: 1.0,
            lo,
            hi,
        }
    }

    pub fn involute(&self) -> Piece {
        Piece {
            traj: self.traj.clone(),
            involuted: !self.involuted,
            scale: self.scale,
            lo: (1.0 - self.hi * self.hi).max(0.0).sqrt(),
            hi: (1.0 - self.lo * self.lo).max(0.0).sqrt(),
        }
    }

    fn source_t(&self, t: f64) -> f64 {
        if self.involuted {
            (1.0 - t * t).max(0.0).sqrt()
        } else {
            t
        }
    }

    fn source_t_clamped(&self, t: f64) -> f64 {
        let (lo, hi) = self.traj.t_span();
        self.source_t(t).clamp(lo, hi)
    }

    fn eval2(&self, t: f64) -> Option<(f64, f64, f64)> {
        let s = self.source_t_clamped(t);
        let (f, fp, fpp) = self.traj.graph2_at_t(s)?;
        let (g, gp, gpp) = if self.involuted {
            (f, -(t / s) * fp, (t * t / (s * s)) * fpp - fp / (s * s * s))
        } else {
            (f, fp, fpp)
        };
        Some((self.scale * g, self.scale * gp, self.scale * gpp))
    }

    fn angle(&self, t: f64) -> Option<f64> {
        let s = self.source_t_clamped(t);
        let beta = self.traj.angle_at_t(s)?;
        let (sn, cs) = beta.sin_cos();
        let (sn, cs) = if self.involuted { (-t * sn, s * cs) } else { (sn, cs) };
        Some((self.scale * sn).atan2(cs))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct SolveInfo {
    /// Number of shots integrated.
    pub shots: usize,
    /// Sign changes seen in the bracketing scan.
    pub brackets: usize,
    /// Final bisection bracket width.
    pub bracket_width: f64,
}

/// A validated two-zero profile and its dense representation.
#[derive(Clone, Debug)]
pub struct ConeProfile {
    pub params: ConeParams,
    pub family: FamilyTag,
    pub t1: f64,
    pub t2: f64,
    pub slope1: Slope,
    pub slope2: Slope,
    pub theta: f64,
    pub info: SolveInfo,
    pieces: Vec<Piece>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    /// Largest normalized residual of the profile equation.
    pub residual: f64,
    /// Largest deviation of the two measured contact angles from theta.
    pub angle_error: f64,
    pub critical_points: usize,
    /// Smallest value of h cos(angle) sampled.
    pub min_h: f64,
    pub ordered: bool,
}

pub const RESIDUAL_TOL: f64 = 1e-8;
pub const ANGLE_TOL: f64 = 1e-6;

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.residual <= RESIDUAL_TOL
            && self.angle_error <= ANGLE_TOL
            && self.critical_points == 1
            && self.min_h > 0.0
            && self.ordered
    }
}

/// Contact angle from a tangent angle at a zero t.
pub fn contact_angle_of(t: f64, beta: f64) -> f64 {
    ((1.0 - t * t).sqrt() * beta.sin().abs()).atan2(beta.cos().abs())
}

impl ConeProfile {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn new(
        params: ConeParams,
        family: FamilyTag,
        t1: f64,
        t2: f64,
        slope1: Slope,
        slope2: Slope,
        theta: f64,
        info: SolveInfo,
        mut pieces: Vec<Piece>,
    ) -> ConeProfile {
        pieces.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        ConeProfile {
            params,
            family,
            t1,
            t2,
            slope1,
            slope2,
            theta,
            info,
            pieces,
        }
    }

    fn piece(&self, t: f64) -> Option<&Piece> {
        if t < self.t1 || t > self.t2 {
            return None;
        }
        self.pieces
            .iter()
            .find(|p| t >= p.lo - 1e-14 && t <= p.hi + 1e-14)
            .or_else(|| {
                self.pieces.iter().min_by(|a, b| {
                    let da = (t - t.clamp(a.lo, a.hi)).abs();
                    let db = (t - t.clamp(b.lo, b.hi)).abs();
                    da.total_cmp(&db)
                })
            })
    }

    /// (f, f', f'') at t in [t1, t2].
    pub fn eval2(&self, t: f64) -> Option<(f64, f64, f64)> {
        self.piece(t)?.eval2(t)
    }

    pub fn eval(&self, t: f64) -> Option<PhasePoint> {
        let (f, fp, _) = self.eval2(t)?;
        Some(PhasePoint::new(t, f, fp))
    }

    /// Tangent angle of the graph of f at t.
    pub fn angle(&self, t: f64) -> Option<f64> {
        self.piece(t)?.angle(t)
    }

    /// h = f - A f'.
    pub fn h(&self, t: f64) -> Option<f64> {
        let p = self.eval(t)?;
        Some(p.f - (t - self.params.alpha() / t) * p.fp)
    }

    /// Contact angles measured from the dense profile at both zeros.
    pub fn measured_angles(&self) -> (f64, f64) {
        let a1 = self.angle(self.t1).map_or(f64::NAN, |b| contact_angle_of(self.t1, b));
        let a2 = self.angle(self.t2).map_or(f64::NAN, |b| contact_angle_of(self.t2, b));
        (a1, a2)
    }

    /// `m` samples uniform in t on [t1, t2].
    pub fn samples(&self, m: usize) -> Vec<PhasePoint> {
        let m = m.max(2);
        (0..m)
            .map(|i| {
                let t = if i + 1 == m {
                    self.t2
                } else {
                    self.t1 + (self.t2 - self.t1) * i as f64 / (m - 1) as f64
                };
                let mut p = self.eval(t).unwrap_or(PhasePoint::new(t, 0.0, 0.0));
                if i == 0 || i + 1 == m {
                    p.f = 0.0;
                }
                p
            })
            .collect()
    }

    /// Location and value of the maximum of f.
    pub fn peak(&self) -> (f64, f64) {
        let f = |t: f64| self.eval(t).map_or(f64::NEG_INFINITY, |p| p.f);
        let n = 400;
        let mut best = (self.t1, 0.0);
        for i in 1..n {
            let t = self.t1 + (self.t2 - self.t1) * i as f64 / n as f64;
            let v = f(t);
            if v > best.1 {
                best = (t, v);
            }
        }
        // refine on the angle sign change
        let w = (self.t2 - self.t1) / n as f64;
        let (mut a, mut b) = ((best.0 - w).max(self.t1), (best.0 + w).min(self.t2));
        let slope = |t: f64| self.angle(t).map_or(0.0, |x| x.sin());
        if slope(a) > 0.0 && slope(b) < 0.0 {
            for _ in 0..100 {
                let m = 0.5 * (a + b);
                if slope(m) > 0.0 {
                    a = m;
                } else {
                    b = m;
                }
                if b - a < 1e-15 {
                    break;
                }
            }
            let t = 0.5 * (a + b);
            return (t, f(t));
        }
        best
    }

    /// The companion profile for (n, n - k) under t -> sqrt(1 - t^2).
    pub fn involuted(&self) -> ConeProfile {
        let t1 = (1.0 - self.t2 * self.t2).sqrt();
        let t2 = (1.0 - self.t1 * self.t1).sqrt();
        let flip = |s: Slope, tt: f64| match s {
            Slope::Finite(v) => Slope::Finite(-(tt / (1.0 - tt * tt).sqrt()) * v),
            Slope::PosInf => Slope::NegInf,
            Slope::NegInf => Slope::PosInf,
        };
        ConeProfile::new(
            self.params.involuted(),
            self.family,
            t1,
            t2,
            flip(self.slope2, t1),
            flip(self.slope1, t2),
            self.theta,
            self.info,
            self.pieces.iter().map(Piece::involute).collect(),
        )
    }

    pub fn is_free_boundary(&self) -> bool {
        self.slope1.is_infinite() && self.slope2.is_infinite()
    }

    pub fn validate(&self) -> ValidationReport {
        let sa = self.params.sqrt_alpha();
        let n = 400;
        let w = self.t2 - self.t1;
        let mut residual: f64 = 0.0;
        let mut min_h = f64::INFINITY;
        let mut crit = 0;
        let mut prev_sign = 0.0;
        for i in 0..=n {
            let t = self.t1 + w * (1e-3 + (1.0 - 2e-3) * i as f64 / n as f64);
            let Some((f, fp, fpp)) = self.eval2(t) else {
                residual = f64::INFINITY;
                continue;
            };
            let r = relative_residual(&self.params, t, f, fp, fpp).unwrap_or(f64::INFINITY);
            residual = residual.max(if r.is_nan() { f64::INFINITY } else { r });
            let beta = self.angle(t).unwrap_or(f64::NAN);
            let a = t - self.params.alpha() / t;
            let hc = f * beta.cos() - a * beta.sin();
            min_h = min_h.min(if hc.is_nan() { f64::NEG_INFINITY } else { hc });
            let s = beta.sin();
            if s != 0.0 {
                let sign = s.signum();
                if prev_sign != 0.0 && sign != prev_sign {
                    crit += 1;
                }
                prev_sign = sign;
            }
        }
        let (a1, a2) = self.measured_angles();
        let angle_error = (a1 - self.theta).abs().max((a2 - self.theta).abs());
        ValidationReport {
            residual,
            angle_error: if angle_error.is_nan() { f64::INFINITY } else { angle_error },
            critical_points: crit,
            min_h,
            ordered: self.t1 < sa && sa < self.t2,
        }
    }

    /// Validates and returns the profile, or a validation error.
    pub fn checked(self) -> Result<ConeProfile> {
        let r = self.validate();
        if r.passed() {
            Ok(self)
        } else {
            Err(Error::Validation(format!(
                "{} profile for ({},{}) failed validation: {r:?}",
                self.family.as_str(),
                self.params.n(),
                self.params.k()
            )))
        }
    }

    /// The same profile with f multiplied by `c` (linear regime only).
    pub fn scaled(&self, c: f64) -> ConeProfile {
        let mut out = self.clone();
        for p in &mut out.pieces {
            p.scale *= c;
        }
        out.slope1 = self.slope1.scaled(c);
        out.slope2 = self.slope2.scaled(c);
        out
    }
}
