//! Blow-up limit near sqrt(alpha): phi'' + c phi'^2 (phi - 2 s phi') / (1 + phi^2) = 0
//! with phi(-1) = 0 and a vertical (or steep) launch, plus the L(tau) transform.
//!
//! Integrated in arclength with state (s, phi, beta), which is regular at the
//! vertical launch: at beta = pi/2 the turning rate is 2 c s / (1 + phi^2).

use std::f64::consts::FRAC_PI_2;

use serde::Serialize;

use crate::equation::{ConeParams, Slope};
use crate::error::{Error, Result};
use crate::integrate::{integrate, EventKind, EventSpec, Form, Launch, Tolerance};
use crate::ode::{self, Crossing, Event, Settings, Solution};

pub const DEFAULT_S_MAX: f64 = 50.0;
const MAX_ARCLENGTH: f64 = 1e3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PhiEnd {
    /// phi' became infinite again (finite-time blow-up of the graph).
    Blowup { s: f64 },
    /// Reached the requested s_max.
    Horizon { s: f64 },
    /// Arclength budget exhausted.
    Budget { s: f64 },
}

#[derive(Clone, Debug)]
pub struct PhiSolution {
    pub c: f64,
    pub launch: Slope,
    pub s_star: Option<f64>,
    pub end: PhiEnd,
    x_star: Option<f64>,
    sol: Solution<3>,
}

fn rhs(c: f64) -> impl Fn(f64, &[f64; 3]) -> [f64; 3] {
    move |_, y| {
        let (sn, cs) = y[2].sin_cos();
        let h = y[1] * cs - 2.0 * y[0] * sn;
        [cs, sn, -c * sn * sn * h / (1.0 + y[1] * y[1])]
    }
}

/// Vertical launch from s = -1.
pub fn solve_phi(c: f64, s_max: f64) -> Result<PhiSolution> {
    solve_phi_with(c, Slope::PosInf, s_max, Tolerance::default().scaled(0.01))
}

pub fn solve_phi_with(c: f64, launch: Slope, s_max: f64, tol: Tolerance) -> Result<PhiSolution> {
    if !(c >= 1.0 && c.is_finite()) {
        return Err(Error::Domain { what: "c", value: c });
    }
    if !(s_max > -1.0) {
        return Err(Error::Domain { what: "s_max", value: s_max });
    }
    if matches!(launch, Slope::NegInf) || launch.value() <= 0.0 {
        return Err(Error::Domain {
            what: "launch slope",
            value: launch.value(),
        });
    }
    let settings = Settings {
        atol: tol.abs,
        rtol: tol.rel,
        ..Settings::default()
    };
    let events = [
        // h cos(beta) crossing zero from above
        Event::new(Crossing::Down, false, |_, y: &[f64; 3]| {
            let (sn, cs) = y[2].sin_cos();
            y[1] * cs - 2.0 * y[0] * sn
        }),
        Event::new(Crossing::Up, true, |_, y: &[f64; 3]| y[2] - FRAC_PI_2),
        Event::new(Crossing::Up, true, move |_, y: &[f64; 3]| y[0] - s_max),
    ];
    let sol = ode::solve(
        &rhs(c),
        0.0,
        [-1.0, 0.0, launch.angle()],
        MAX_ARCLENGTH,
        &events,
        &settings,
        |y| y[0],
    )?;
    let star = sol.hits.iter().find(|h| h.index == 0);
    let s_end = sol.y_end()[0];
    let end = match sol.stop {
        ode::Stop::Event(1) => PhiEnd::Blowup { s: s_end },
        ode::Stop::Event(_) => PhiEnd::Horizon { s: s_end },
        ode::Stop::End => PhiEnd::Budget { s: s_end },
    };
    let out = PhiSolution {
        c,
        launch,
        s_star: star.map(|h| h.y[0]),
        x_star: star.map(|h| h.x),
        end,
        sol,
    };
    if c >= 2.0 && out.s_star.is_none() {
        return Err(Error::Validation(format!(
            "h = phi - 2 s phi' never changed sign for c = {c} up to s = {s_end}"
        )));
    }
    Ok(out)
}

impl PhiSolution {
    fn x_at_s(&self, s: f64) -> Option<f64> {
        let (x0, x1) = (self.sol.x_start, self.sol.x_end());
        let s_of = |x: f64| self.sol.state_at(x).map(|y| y[0]);
        if s < -1.0 || s > s_of(x1)? {
            return None;
        }
        let (mut a, mut b) = (x0, x1);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if s_of(m)? < s {
                a = m;
            } else {
                b = m;
            }
            if b - a <= 1e-15 * (1.0 + b.abs()) {
                break;
            }
        }
        Some(0.5 * (a + b))
    }

    /// (phi, phi') at s.
    pub fn at(&self, s: f64) -> Option<(f64, f64)> {
        let y = self.sol.state_at(self.x_at_s(s)?)?;
        Some((y[1], y[2].tan()))
    }

    /// h = phi - 2 s phi' at s.
    pub fn h(&self, s: f64) -> Option<f64> {
        let (p, dp) = self.at(s)?;
        Some(p - 2.0 * s * dp)
    }

    /// (phi, phi', phi'') at s.
    pub fn at2(&self, s: f64) -> Option<(f64, f64, f64)> {
        let x = self.x_at_s(s)?;
        let y = self.sol.state_at(x)?;
        let d = rhs(self.c)(x, &y);
        let cs = y[2].cos();
        Some((y[1], y[2].tan(), d[2] / (cs * cs * cs)))
    }

    pub fn s_end(&self) -> f64 {
        self.sol.y_end()[0]
    }

    /// True if h stays negative on `samples` points strictly after s_star.
    pub fn h_negative_after_star(&self, samples: usize) -> Option<bool> {
        let xs = self.x_star?;
        let xe = self.sol.x_end();
        Some((1..=samples).all(|i| {
            let x = xs + (xe - xs) * i as f64 / (samples + 1) as f64;
            self.sol.state_at(x).is_some_and(|y| {
                let (sn, cs) = y[2].sin_cos();
                y[1] * cs - 2.0 * y[0] * sn < 0.0
            })
        }))
    }

    /// Smallest phi' and largest phi'' sampled on the h > 0 part.
    pub fn monotone_while_h_positive(&self, samples: usize) -> (f64, f64) {
        let xe = self.x_star.unwrap_or(self.sol.x_end());
        let mut min_dp = f64::INFINITY;
        let mut max_ddp = f64::NEG_INFINITY;
        for i in 1..samples {
            let x = xe * i as f64 / samples as f64;
            let Some(y) = self.sol.state_at(x) else { continue };
            let d = rhs(self.c)(x, &y);
            let cs = y[2].cos();
            min_dp = min_dp.min(y[2].tan());
            max_ddp = max_ddp.max(d[2] / (cs * cs * cs));
        }
        (min_dp, max_ddp)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LTransform {
    pub c: f64,
    /// tau = asinh(phi) at s_star (or at the end of the h > 0 region).
    pub tau_max: f64,
    pub l_at_zero: f64,
    /// (tau, L) samples on [0.1, 0.9 tau_max].
    pub samples: Vec<(f64, f64)>,
    /// Sup of |L' - L^2 + (c - 1) tanh(tau) L - c| on the samples.
    pub residual: f64,
    /// Smallest L - c tanh(tau) on the samples.
    pub min_gap: f64,
}

fn l_of(y: &[f64; 3]) -> (f64, f64) {
    let (sn, cs) = y[2].sin_cos();
    let h = y[1] * cs - 2.0 * y[0] * sn;
    ((1.0 + y[1] * y[1]).sqrt() * cs / h, y[1].asinh())
}

/// L = sqrt(1 + phi^2) / h as a function of tau = asinh(phi) on h > 0, with
/// its Riccati residual from central differences.
pub fn l_transform(sol: &PhiSolution, points: usize) -> Result<LTransform> {
    let xe = sol.x_star.unwrap_or(sol.sol.x_end());
    let y0 = sol.sol.y_start;
    let first = sol.sol.state_at(xe * 1e-6).ok_or(Error::EmptyRegion("h > 0"))?;
    if l_of(&first).0 <= 0.0 || xe <= 0.0 {
        return Err(Error::EmptyRegion("h > 0"));
    }
    let tau_max = sol.sol.state_at(xe).map_or(f64::NAN, |y| y[1].asinh());
    let x_of_tau = |tau: f64| -> Option<f64> {
        let target = tau.sinh();
        let (mut a, mut b) = (0.0, xe);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if sol.sol.state_at(m)?[1] < target {
                a = m;
            } else {
                b = m;
            }
            if b - a <= 1e-15 * (1.0 + b) {
                break;
            }
        }
        Some(0.5 * (a + b))
    };
    let dx = 1e-5 * xe;
    let c = sol.c;
    let (mut residual, mut min_gap) = (0.0f64, f64::INFINITY);
    let mut samples = Vec::with_capacity(points);
    let (lo, hi) = (0.1, 0.9 * tau_max);
    for i in 0..points.max(2) {
        let tau = lo + (hi - lo) * i as f64 / (points.max(2) - 1) as f64;
        let x = x_of_tau(tau).ok_or(Error::EmptyRegion("h > 0"))?;
        let (l, _) = l_of(&sol.sol.state_at(x).ok_or(Error::EmptyRegion("h > 0"))?);
        let (la, ta) = l_of(&sol.sol.state_at(x - dx).ok_or(Error::EmptyRegion("h > 0"))?);
        let (lb, tb) = l_of(&sol.sol.state_at(x + dx).ok_or(Error::EmptyRegion("h > 0"))?);
        let dl = (lb - la) / (tb - ta);
        let r = dl - l * l + (c - 1.0) * tau.tanh() * l - c;
        residual = residual.max(r.abs());
        min_gap = min_gap.min(l - c * tau.tanh());
        samples.push((tau, l));
    }
    Ok(LTransform {
        c,
        tau_max,
        l_at_zero: l_of(&y0).0,
        samples,
        residual,
        min_gap,
    })
}

/// |phi(checkpoint)| differences between finite-slope launches and the
/// vertical launch.
pub fn launch_convergence(c: f64, slopes: &[f64], checkpoint: f64) -> Result<Vec<f64>> {
    let tol = Tolerance::default().scaled(0.01);
    let reference = solve_phi_with(c, Slope::PosInf, DEFAULT_S_MAX, tol)?;
    let (p_ref, _) = reference
        .at(checkpoint)
        .ok_or(Error::Domain { what: "checkpoint", value: checkpoint })?;
    slopes
        .iter()
        .map(|&m| {
            let s = solve_phi_with(c, Slope::Finite(m), DEFAULT_S_MAX, tol)?;
            let (p, _) = s.at(checkpoint).ok_or(Error::Domain {
                what: "checkpoint",
                value: checkpoint,
            })?;
            Ok((p - p_ref).abs())
        })
        .collect()
}

/// |f(sqrt(alpha)) - phi(0)| for the vertical lambda = 1 shot launched from
/// t1 = sqrt(alpha) - eps, compared with the limit solution at c = n - 2.
pub fn rescaled_shot_error(n: u32, k: u32, eps: f64, limit: &PhiSolution) -> Result<f64> {
    let params = ConeParams::new(n, k)?;
    let sa = params.sqrt_alpha();
    if !(eps > 0.0 && eps < sa) {
        return Err(Error::Domain { what: "eps", value: eps });
    }
    let traj = integrate(
        &params,
        Form::Arc,
        &Launch {
            t: sa - eps,
            value: 0.0,
            slope: Slope::PosInf,
        },
        1,
        &[EventSpec::reach_t(sa)],
        Tolerance::default().scaled(0.01),
    )?;
    let f = match traj.event(EventKind::ReachT) {
        Some(e) => e.state.f,
        None => {
            return Err(Error::ClassificationAmbiguous {
                t1: sa - eps,
                reason: "shot ended before sqrt(alpha)".into(),
            })
        }
    };
    let (p0, _) = limit.at(0.0).ok_or(Error::Domain { what: "s", value: 0.0 })?;
    Ok((f - p0).abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    // scipy DOP853 arclength solve at rtol 1e-13
    const ORACLE: [(f64, f64, f64); 4] = [
        (2.0, 2.8388756216490068, 0.7370714570993216),
        (3.0, 3.2216350119875043, 0.5939311933345343),
        (4.0, 3.525462094274728, 0.5108624143029046),
        (8.0, 4.369520661666823, 0.3574455290753315),
    ];

    #[test]
    fn crossing_and_checkpoint_match_oracle() {
        for (c, s_star, p0) in ORACLE {
            let sol = solve_phi(c, DEFAULT_S_MAX).unwrap();
            let s = sol.s_star.unwrap();
            assert!((s - s_star).abs() < 1e-8, "{c} {s}");
            assert!((sol.at(0.0).unwrap().0 - p0).abs() < 1e-9);
            assert!(sol.h_negative_after_star(200).unwrap());
            assert!(matches!(sol.end, PhiEnd::Blowup { .. }), "{:?}", sol.end);
        }
    }

    #[test]
    fn leading_behaviour() {
        for c in [2.0, 3.0, 5.5] {
            let sol = solve_phi(c, DEFAULT_S_MAX).unwrap();
            let d = 1e-6;
            let (p, _) = sol.at(-1.0 + d).unwrap();
            assert!((p / (d / c).sqrt() - 1.0).abs() < 1e-2, "{c} {p}");
        }
    }

    #[test]
    fn riccati_transform() {
        for c in [2.0, 3.0, 4.0] {
            let sol = solve_phi(c, DEFAULT_S_MAX).unwrap();
            let l = l_transform(&sol, 60).unwrap();
            assert!(l.l_at_zero.abs() < 1e-15);
            assert!(l.residual <= 1e-6, "{c} {}", l.residual);
            assert!(l.min_gap > 0.0);
        }
    }

    #[test]
    fn finite_launches_converge() {
        let e = launch_convergence(2.0, &[1e2, 1e3, 1e4], 0.0).unwrap();
        assert!(e[0] > e[1] && e[1] > e[2], "{e:?}");
    }

    #[test]
    fn rescaled_shots_approach_limit() {
        // scipy: f(sqrt(alpha)) - phi(0) = -2.04e-4 (eps 1e-2), -2.07e-6 (eps 1e-3) for (4,2)
        let sol = solve_phi(2.0, DEFAULT_S_MAX).unwrap();
        let a = rescaled_shot_error(4, 2, 1e-2, &sol).unwrap();
        let b = rescaled_shot_error(4, 2, 1e-3, &sol).unwrap();
        assert!((a - 2.040670684192447e-4).abs() < 1e-9, "{a}");
        assert!((b - 2.0663211867111286e-6).abs() < 1e-9, "{b}");
    }

    #[test]
    fn rejects_bad_input() {
        assert!(solve_phi(0.5, 10.0).is_err());
        assert!(solve_phi(2.0, -2.0).is_err());
    }
}
