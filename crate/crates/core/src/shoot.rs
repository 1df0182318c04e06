//! Matching problems solved by shooting: per-angle capillary cones,
//! free-boundary cones, the symmetric n = 2k family and the linear
//! one-phase profiles.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};
use std::sync::Arc;

use serde::Serialize;

use crate::equation::{real, ConeParams, PhasePoint, Slope};
use crate::error::{Error, Result};
use crate::exec::{log_grid, Exec};
use crate::integrate::{integrate, EventKind, EventSpec, Form, Launch, Termination, Tolerance, Trajectory};
pub use crate::integrate::{shoot, Shot, ShotEnd, ShotSpec};
use crate::profile::{contact_angle_of, ConeProfile, FamilyTag, Piece, SolveInfo};
use crate::series::landing_detect;
use crate::special;

/// Final bracket width of every bisection in this module.
pub const BISECT_WIDTH: f64 = 1e-12;
/// Points in the bracketing scan over t1.
pub const SCAN_POINTS: usize = 200;
/// Angles within this distance of pi/2 are treated as free-boundary.
pub const RIGHT_ANGLE_TOL: f64 = 1e-9;
/// Bisection and final profile shots run at this fraction of the scan
/// tolerance.
pub const REFINE_FACTOR: f64 = 0.01;

/// Outcome of one matching shot.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ResidualRecord {
    pub t1: f64,
    pub tau: Option<f64>,
    /// Endpoint gradient mismatch; -inf for vertical landings and shots
    /// that never return.
    #[serde(with = "real")]
    pub r: f64,
    pub end: ShotEnd,
}

impl ResidualRecord {
    pub fn positive(&self) -> bool {
        self.r > 0.0
    }
}

fn residual_shot(params: &ConeParams, t1: f64, slope: Slope, tol: Tolerance) -> Result<(ResidualRecord, Shot)> {
    let shot = shoot(&ShotSpec::new(*params, t1, slope), tol)?;
    let lhs = match slope {
        Slope::Finite(a) => (1.0 - t1 * t1) * a * a,
        _ => f64::INFINITY,
    };
    let rec = match shot.end {
        ShotEnd::Zero { t2, angle } => {
            let vertical = landing_detect(params, &shot.traj).is_some_and(|(_, v)| v);
            let r = if vertical {
                f64::NEG_INFINITY
            } else {
                let s = angle.tan();
                lhs - (1.0 - t2 * t2) * s * s
            };
            ResidualRecord {
                t1,
                tau: Some(t2),
                r,
                end: shot.end,
            }
        }
        end => ResidualRecord {
            t1,
            tau: None,
            r: f64::NEG_INFINITY,
            end,
        },
    };
    Ok((rec, shot))
}

/// Endpoint-gradient residual of the shot from t1 with the given slope.
pub fn residual(params: &ConeParams, t1: f64, slope: f64) -> Result<ResidualRecord> {
    if !(slope > 0.0 && slope.is_finite()) {
        return Err(Error::Domain { what: "slope", value: slope });
    }
    if !(t1 > 0.0 && t1 < params.sqrt_alpha()) {
        return Err(Error::Domain { what: "t1", value: t1 });
    }
    Ok(residual_shot(params, t1, Slope::Finite(slope), Tolerance::default())?.0)
}

/// The t1 grid used by all bracketing scans.
pub fn scan_grid(params: &ConeParams) -> Vec<f64> {
    let sa = params.sqrt_alpha();
    log_grid(1e-3 * sa, sa * (1.0 - 1e-3), SCAN_POINTS)
}

struct Bracket {
    lo: f64,
    hi: f64,
    count: usize,
}

/// First index where `flags` switches from true to false.
fn first_switch(grid: &[f64], flags: &[bool], what: &str) -> Result<Bracket> {
    let mut first = None;
    let mut count = 0;
    for i in 0..flags.len() - 1 {
        if flags[i] && !flags[i + 1] {
            count += 1;
            if first.is_none() {
                first = Some(i);
            }
        }
    }
    match first {
        Some(i) => Ok(Bracket {
            lo: grid[i],
            hi: grid[i + 1],
            count,
        }),
        None => {
            let pattern: String = flags.iter().map(|&b| if b { '+' } else { '-' }).collect();
            Err(Error::BracketNotFound {
                log: format!(
                    "{what}: no sign change over {} points in [{:.6e}, {:.6e}]: {pattern}",
                    grid.len(),
                    grid[0],
                    grid[grid.len() - 1]
                ),
            })
        }
    }
}

/// Bisection keeping `pred(lo)` true and `pred(hi)` false.
fn bisect(mut lo: f64, mut hi: f64, pred: impl Fn(f64) -> Result<bool>) -> Result<(f64, f64, usize)> {
    let mut evals = 0;
    while hi - lo > BISECT_WIDTH {
        let m = 0.5 * (lo + hi);
        if m <= lo || m >= hi {
            break;
        }
        evals += 1;
        if pred(m)? {
            lo = m;
        } else {
            hi = m;
        }
    }
    Ok((lo, hi, evals))
}

fn per_angle_slope(theta: f64, t1: f64) -> Slope {
    Slope::Finite(theta.tan() / (1.0 - t1 * t1).sqrt())
}

fn single_piece_profile(
    params: ConeParams,
    family: FamilyTag,
    shot: Shot,
    slope1: Slope,
    slope2: Slope,
    theta: f64,
    info: SolveInfo,
) -> ConeProfile {
    let traj = Arc::new(shot.traj);
    let (t1, t2) = traj.t_span();
    ConeProfile::new(params, family, t1, t2, slope1, slope2, theta, info, vec![Piece::direct(traj)])
}

/// Capillary cone with contact angle theta at both boundary components.
pub fn solve_capillary_cone(n: u32, k: u32, theta: f64) -> Result<ConeProfile> {
    solve_capillary_cone_with(&ConeParams::new(n, k)?, theta, Tolerance::default(), Exec::default())
}

pub fn solve_capillary_cone_with(
    params: &ConeParams,
    theta: f64,
    tol: Tolerance,
    exec: Exec,
) -> Result<ConeProfile> {
    if (theta - FRAC_PI_2).abs() <= RIGHT_ANGLE_TOL {
        return solve_free_boundary_with(params, tol, exec);
    }
    if !(theta > 0.0 && theta < FRAC_PI_2) {
        return Err(Error::Domain { what: "theta", value: theta });
    }
    // profiles shrink like tan(theta)
    let tol = tol.scaled(theta.tan().min(1.0));
    let grid = scan_grid(params);
    let recs = exec.map(&grid, |&t1| residual_shot(params, t1, per_angle_slope(theta, t1), tol).map(|r| r.0));
    let recs = recs.into_iter().collect::<Result<Vec<_>>>()?;
    let flags: Vec<bool> = recs.iter().map(|r| r.positive()).collect();
    let br = first_switch(&grid, &flags, "per-angle residual")?;
    let fine = tol.scaled(REFINE_FACTOR);
    let (lo, hi, evals) = bisect(br.lo, br.hi, |t1| {
        Ok(residual_shot(params, t1, per_angle_slope(theta, t1), fine)?.0.positive())
    })?;
    let slope1 = per_angle_slope(theta, lo);
    let (rec, shot) = residual_shot(params, lo, slope1, fine)?;
    let ShotEnd::Zero { angle, .. } = rec.end else {
        return Err(Error::Validation(format!("matched shot from t1 = {lo} does not return")));
    };
    let info = SolveInfo {
        shots: grid.len() + evals + 1,
        brackets: br.count,
        bracket_width: hi - lo,
    };
    single_piece_profile(
        *params,
        FamilyTag::PerAngle,
        shot,
        slope1,
        Slope::Finite(angle.tan()),
        theta,
        info,
    )
    .checked()
}

/// Vertical shot from t1 reaches a second zero.
fn vertical_reaches(params: &ConeParams, t1: f64, tol: Tolerance) -> Result<bool> {
    match shoot(&ShotSpec::new(*params, t1, Slope::PosInf), tol) {
        Ok(s) => Ok(s.end.reaches_zero()),
        Err(Error::StepUnderflow { .. }) | Err(Error::StepBudget(_)) => Err(Error::ClassificationAmbiguous {
            t1,
            reason: "integration stopped before the shot was classified".into(),
        }),
        Err(e) => Err(e),
    }
}

/// Largest t1 whose vertical shot returns to zero, with the final bracket.
pub fn free_boundary_threshold(params: &ConeParams, tol: Tolerance, exec: Exec) -> Result<(f64, f64, SolveInfo)> {
    let grid = scan_grid(params);
    let flags = exec.map(&grid, |&t1| vertical_reaches(params, t1, tol));
    let flags = flags.into_iter().collect::<Result<Vec<_>>>()?;
    let br = first_switch(&grid, &flags, "vertical shots")?;
    let fine = tol.scaled(REFINE_FACTOR);
    let (lo, hi, evals) = bisect(br.lo, br.hi, |t1| vertical_reaches(params, t1, fine))?;
    Ok((
        lo,
        hi,
        SolveInfo {
            shots: grid.len() + evals,
            brackets: br.count,
            bracket_width: hi - lo,
        },
    ))
}

/// Free-boundary cone: vertical contact at both zeros.
pub fn solve_free_boundary(n: u32, k: u32) -> Result<ConeProfile> {
    solve_free_boundary_with(&ConeParams::new(n, k)?, Tolerance::default(), Exec::default())
}

pub fn solve_free_boundary_with(params: &ConeParams, tol: Tolerance, exec: Exec) -> Result<ConeProfile> {
    let (lo, _, mut info) = free_boundary_threshold(params, tol, exec)?;
    let shot = shoot(&ShotSpec::new(*params, lo, Slope::PosInf), tol.scaled(REFINE_FACTOR))?;
    info.shots += 1;
    if !shot.end.reaches_zero() {
        return Err(Error::ClassificationAmbiguous {
            t1: lo,
            reason: "lower bracket end no longer returns".into(),
        });
    }
    single_piece_profile(
        *params,
        FamilyTag::FreeBoundary,
        shot,
        Slope::PosInf,
        Slope::NegInf,
        FRAC_PI_2,
        info,
    )
    .checked()
}

/// Shot of the n = 2k family from its critical point at 1/sqrt(2).
fn symmetric_shot(k: u32, a: f64, tol: Tolerance) -> Result<Trajectory> {
    let params = ConeParams::new(2 * k, k)?;
    integrate(
        &params,
        Form::Arc,
        &Launch {
            t: FRAC_1_SQRT_2,
            value: a,
            slope: Slope::Finite(0.0),
        },
        1,
        &[
            EventSpec::stop(EventKind::FZeroDescending),
            EventSpec::stop(EventKind::Vertical),
        ],
        tol,
    )
}

fn symmetric_reaches(k: u32, a: f64, tol: Tolerance) -> Result<bool> {
    Ok(matches!(
        symmetric_shot(k, a, tol)?.termination,
        Termination::Event {
            event: EventKind::FZeroDescending,
            ..
        }
    ))
}

/// Member of the symmetric family with f(1/sqrt(2)) = a, if it reaches
/// a zero.
pub fn solve_symmetric_family(k: u32, a: f64) -> Result<Option<ConeProfile>> {
    symmetric_with(k, a, Tolerance::default().scaled(REFINE_FACTOR))
}

fn symmetric_with(k: u32, a: f64, tol: Tolerance) -> Result<Option<ConeProfile>> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::Domain { what: "a", value: a });
    }
    let traj = symmetric_shot(k, a, tol)?;
    let Termination::Event {
        event: EventKind::FZeroDescending,
        t: t2,
    } = traj.termination
    else {
        return Ok(None);
    };
    let params = traj.params;
    let vertical = landing_detect(&params, &traj).is_some_and(|(_, v)| v);
    let beta = traj.end_angle();
    let theta = contact_angle_of(t2, beta);
    let t1 = (1.0 - t2 * t2).sqrt();
    let (slope1, slope2) = if vertical {
        (Slope::PosInf, Slope::NegInf)
    } else {
        let s2 = beta.tan();
        (Slope::Finite(-(t2 / t1) * s2), Slope::Finite(s2))
    };
    let right = Piece::direct(Arc::new(traj));
    let left = right.involute();
    let profile = ConeProfile::new(
        params,
        FamilyTag::Symmetric,
        t1,
        t2,
        slope1,
        slope2,
        if vertical { FRAC_PI_2 } else { theta },
        SolveInfo {
            shots: 1,
            ..SolveInfo::default()
        },
        vec![left, right],
    );
    Ok(Some(profile))
}

/// Contact angle of the symmetric family member at a, if it exists.
pub fn symmetric_angle(k: u32, a: f64) -> Result<Option<f64>> {
    Ok(solve_symmetric_family(k, a)?.map(|p| p.theta))
}

/// Supremum of the amplitudes a whose symmetric shot reaches a zero.
pub fn find_a_star(k: u32) -> Result<f64> {
    Ok(find_a_star_bracket(k)?.0)
}

fn find_a_star_bracket(k: u32) -> Result<(f64, f64)> {
    let tol = Tolerance::default().scaled(REFINE_FACTOR);
    let hi = 2.0 / (2.0 * k as f64).sqrt();
    if symmetric_reaches(k, hi, tol)? {
        return Err(Error::Validation(format!("symmetric shot with a = {hi} reaches zero")));
    }
    let mut lo = 1e-3;
    if !symmetric_reaches(k, lo, tol)? {
        return Err(Error::BracketNotFound {
            log: format!("symmetric shot with a = {lo} does not reach zero"),
        });
    }
    let (l, h, _) = bisect(lo, hi, |a| symmetric_reaches(k, a, tol))?;
    lo = l;
    Ok((lo, h))
}

/// The profile at a*_k, which lands vertically.
pub fn a_star_profile(k: u32) -> Result<(f64, ConeProfile)> {
    let (a, _) = find_a_star_bracket(k)?;
    let p = solve_symmetric_family(k, a)?.ok_or(Error::ClassificationAmbiguous {
        t1: a,
        reason: "a* lower bracket end no longer reaches zero".into(),
    })?;
    Ok((a, p))
}

/// Amplitude a in (0, a*] whose symmetric profile has contact angle theta.
pub fn symmetric_for_angle(k: u32, theta: f64) -> Result<(f64, ConeProfile)> {
    if !(theta > 0.0 && theta < FRAC_PI_2) {
        return Err(Error::Domain { what: "theta", value: theta });
    }
    let a_star = find_a_star(k)?;
    let below = |a: f64| -> Result<bool> { Ok(symmetric_angle(k, a)?.is_some_and(|th| th < theta)) };
    let lo = 1e-6;
    if !below(lo)? {
        return Err(Error::BracketNotFound {
            log: format!("contact angle at a = {lo} already exceeds {theta}"),
        });
    }
    let (a, _, _) = bisect(lo, a_star, below)?;
    let p = solve_symmetric_family(k, a)?.ok_or(Error::NotFreeBoundary)?;
    Ok((a, p))
}

/// One row of a symmetric-family sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FamilyPoint {
    pub a: f64,
    pub theta: Option<f64>,
    pub t1: Option<f64>,
    pub t2: Option<f64>,
}

pub fn sweep_symmetric(k: u32, amplitudes: &[f64], exec: Exec) -> Vec<Result<FamilyPoint>> {
    exec.map(amplitudes, |&a| {
        let p = solve_symmetric_family(k, a)?;
        Ok(FamilyPoint {
            a,
            theta: p.as_ref().map(|p| p.theta),
            t1: p.as_ref().map(|p| p.t1),
            t2: p.as_ref().map(|p| p.t2),
        })
    })
}

/// Even solution of the linear equation with f(0) = 1, scaled so that
/// its endpoint gradient (1 - t^2) f'^2 equals 1.
#[derive(Clone, Debug)]
pub struct EvenProfile {
    pub params: ConeParams,
    /// First zero of the unscaled solution.
    pub t_zero: f64,
    /// Normalizing factor, the reciprocal endpoint gradient of the
    /// f(0) = 1 solution.
    pub scale: f64,
    pub launch: f64,
    traj: Arc<Trajectory>,
}

fn even_series(n: u32, k: u32, t: f64) -> (f64, f64) {
    // f = sum a_j t^(2j), a_(j+1)/a_j = (2j-1)(2j+n-1) / ((2j+2)(2j+k))
    let (nf, kf) = (n as f64, k as f64);
    let x = t * t;
    let (mut a, mut f, mut fp) = (1.0, 1.0, 0.0);
    for j in 0..200 {
        let jf = j as f64;
        a *= (2.0 * jf - 1.0) * (2.0 * jf + nf - 1.0) / ((2.0 * jf + 2.0) * (2.0 * jf + kf));
        let term = a * x.powi(j + 1);
        f += term;
        fp += 2.0 * (jf + 1.0) * term / t;
        if term.abs() < 1e-18 {
            break;
        }
    }
    (f, fp)
}

impl EvenProfile {
    /// Unscaled (f, f') with f(0) = 1.
    pub fn unscaled(&self, t: f64) -> Option<(f64, f64)> {
        if t < 0.0 || t > self.t_zero {
            return None;
        }
        if t <= self.launch {
            return Some(if t == 0.0 {
                (1.0, 0.0)
            } else {
                even_series(self.params.n(), self.params.k(), t)
            });
        }
        let p = self.traj.at_t(t.min(self.t_zero))?;
        Some((p.f, p.fp))
    }

    pub fn eval(&self, t: f64) -> Option<PhasePoint> {
        let (f, fp) = self.unscaled(t)?;
        Some(PhasePoint::new(t, self.scale * f, self.scale * fp))
    }

    pub fn eval2(&self, t: f64) -> Option<(f64, f64, f64)> {
        if t <= self.launch {
            let p = self.eval(t)?;
            let fpp = crate::equation::rhs_linear(&self.params, &p).ok()?;
            return Some((p.f, p.fp, fpp));
        }
        let (f, fp, fpp) = self.traj.graph2_at_t(t)?;
        Some((self.scale * f, self.scale * fp, self.scale * fpp))
    }
}

/// Type (i) one-phase profile by integrating the linear equation from a
/// series launch near t = 0.
pub fn one_phase_even(n: u32, k: u32) -> Result<EvenProfile> {
    let params = ConeParams::linear(n, k)?;
    let launch = 1e-3;
    let (f, fp) = even_series(n, k, launch);
    let traj = integrate(
        &params,
        Form::F,
        &Launch::from(PhasePoint::new(launch, f, fp)),
        1,
        &[EventSpec::stop(EventKind::FZeroDescending)],
        Tolerance::new(1e-13, 1e-13)?,
    )?;
    let Termination::Event {
        event: EventKind::FZeroDescending,
        t,
    } = traj.termination
    else {
        return Err(Error::Validation(format!(
            "even solution of ({n},{k}) does not reach zero: {:?}",
            traj.termination
        )));
    };
    let end = traj.end();
    let scale = 1.0 / ((1.0 - t * t).sqrt() * end.fp.abs());
    Ok(EvenProfile {
        params,
        t_zero: t,
        scale,
        launch,
        traj: Arc::new(traj),
    })
}

/// Type (ii) one-phase profile: two zeros, unit endpoint gradients.
pub fn one_phase_two_zero(n: u32, k: u32) -> Result<ConeProfile> {
    one_phase_two_zero_with(n, k, Exec::default())
}

pub fn one_phase_two_zero_with(n: u32, k: u32, exec: Exec) -> Result<ConeProfile> {
    let params = ConeParams::linear(n, k)?;
    let tol = Tolerance::default();
    let grid = scan_grid(&params);
    let recs = exec.map(&grid, |&t1| residual_shot(&params, t1, Slope::Finite(1.0), tol).map(|r| r.0));
    let recs = recs.into_iter().collect::<Result<Vec<_>>>()?;
    let flags: Vec<bool> = recs.iter().map(|r| r.positive()).collect();
    let br = first_switch(&grid, &flags, "one-phase residual")?;
    let fine = tol.scaled(REFINE_FACTOR);
    let (lo, hi, evals) = bisect(br.lo, br.hi, |t1| {
        Ok(residual_shot(&params, t1, Slope::Finite(1.0), fine)?.0.positive())
    })?;
    let (rec, shot) = residual_shot(&params, lo, Slope::Finite(1.0), fine)?;
    let ShotEnd::Zero { angle, .. } = rec.end else {
        return Err(Error::Validation(format!("one-phase shot from t1 = {lo} does not return")));
    };
    let c = 1.0 / (1.0 - lo * lo).sqrt();
    let info = SolveInfo {
        shots: grid.len() + evals + 1,
        brackets: br.count,
        bracket_width: hi - lo,
    };
    single_piece_profile(
        params,
        FamilyTag::OnePhaseIi,
        shot,
        Slope::Finite(1.0),
        Slope::Finite(angle.tan()),
        std::f64::consts::FRAC_PI_4,
        info,
    )
    .scaled(c)
    .checked()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum OnePhaseKind {
    I,
    Ii,
}

#[derive(Clone, Debug)]
pub enum OnePhase {
    Even(EvenProfile),
    TwoZero(ConeProfile),
}

pub fn solve_one_phase(n: u32, k: u32, kind: OnePhaseKind) -> Result<OnePhase> {
    Ok(match kind {
        OnePhaseKind::I => OnePhase::Even(one_phase_even(n, k)?),
        OnePhaseKind::Ii => OnePhase::TwoZero(one_phase_two_zero(n, k)?),
    })
}

/// Largest t1 whose unit-slope linear shot returns to zero.
pub fn linear_barrier(n: u32, k: u32) -> Result<f64> {
    let params = ConeParams::linear(n, k)?;
    let tol = Tolerance::default();
    let returns = |t1: f64| -> Result<bool> {
        Ok(shoot(&ShotSpec::new(params, t1, Slope::Finite(1.0)), tol)?
            .end
            .reaches_zero())
    };
    let grid = scan_grid(&params);
    let flags = Exec::default().map(&grid, |&t1| returns(t1));
    let flags = flags.into_iter().collect::<Result<Vec<_>>>()?;
    let br = first_switch(&grid, &flags, "linear barrier")?;
    Ok(bisect(br.lo, br.hi, returns)?.0)
}

/// The linear limit profile the rescaled shallow-angle cones approach:
/// the symmetric kernel element for n = 2k, the type (ii) profile
/// otherwise, both with unit endpoint gradients.
pub struct LimitProfile {
    pub t1: f64,
    pub t2: f64,
    eval: Box<dyn Fn(f64) -> Option<f64> + Send + Sync>,
}

impl LimitProfile {
    pub fn f(&self, t: f64) -> Option<f64> {
        (self.eval)(t)
    }
}

pub fn limit_profile(n: u32, k: u32) -> Result<LimitProfile> {
    if n == 2 * k {
        let f0 = |t: f64| special::f0_symmetric(k, t);
        let (mut lo, mut hi) = (FRAC_1_SQRT_2, 1.0 - 1e-12);
        if f0(hi)? >= 0.0 {
            return Err(Error::BracketNotFound {
                log: "symmetric kernel stays positive".into(),
            });
        }
        while hi - lo > 1e-15 {
            let m = 0.5 * (lo + hi);
            if m <= lo || m >= hi {
                break;
            }
            if f0(m)? > 0.0 {
                lo = m;
            } else {
                hi = m;
            }
        }
        let t2 = lo;
        let t1 = (1.0 - t2 * t2).sqrt();
        let (_, d) = special::f0_symmetric_with_deriv(k, t1)?;
        let c = 1.0 / ((1.0 - t1 * t1).sqrt() * d.abs());
        Ok(LimitProfile {
            t1,
            t2,
            eval: Box::new(move |t| {
                if t < t1 || t > t2 {
                    None
                } else {
                    special::f0_symmetric(k, t).ok().map(|v| c * v)
                }
            }),
        })
    } else {
        let p = one_phase_two_zero(n, k)?;
        Ok(LimitProfile {
            t1: p.t1,
            t2: p.t2,
            eval: Box::new(move |t| p.eval(t).map(|q| q.f)),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShallowReport {
    pub thetas: Vec<f64>,
    pub distances: Vec<f64>,
    pub decreasing: bool,
}

/// Sup distance between (1/tan theta) f_theta and the linear limit
/// profile on their common positive phase, for each theta.
pub fn shallow_angle_limit(n: u32, k: u32, thetas: &[f64]) -> Result<ShallowReport> {
    if thetas.is_empty() || thetas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParams("thetas must be a nonempty decreasing list".into()));
    }
    if thetas.iter().any(|&t| !(t > 0.0 && t <= std::f64::consts::FRAC_PI_4)) {
        return Err(Error::InvalidParams("thetas must lie in (0, pi/4]".into()));
    }
    let limit = limit_profile(n, k)?;
    let profiles = Exec::default().map(thetas, |&th| solve_capillary_cone(n, k, th));
    let mut distances = Vec::with_capacity(thetas.len());
    for (p, &th) in profiles.into_iter().zip(thetas) {
        let p = p?;
        let lo = p.t1.max(limit.t1);
        let hi = p.t2.min(limit.t2);
        let mut d: f64 = 0.0;
        let m = 400;
        for i in 0..=m {
            let t = lo + (hi - lo) * i as f64 / m as f64;
            let (Some(a), Some(b)) = (p.eval(t), limit.f(t)) else {
                continue;
            };
            d = d.max((a.f / th.tan() - b).abs());
        }
        distances.push(d);
    }
    let decreasing = distances.windows(2).all(|w| w[1] < w[0]);
    Ok(ShallowReport {
        thetas: thetas.to_vec(),
        distances,
        decreasing,
    })
}
