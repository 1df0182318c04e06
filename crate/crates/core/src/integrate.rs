//! Integration of the profile equation in graph form (f), squared form
//! (u = f^2) and arclength form, with typed events and a graph view of
//! the result.

use serde::Serialize;

use crate::equation::{check_interior, ConeParams, Lambda, PhasePoint, Slope};
use crate::error::{Error, Result};
use crate::ode::{self, Crossing, Event, Settings, Solution, Stop};
use crate::series;

/// Distance to t = 0 or t = 1 at which integration halts.
pub const BOUNDARY_MARGIN: f64 = 1e-9;
/// |f| or |f'| beyond this counts as blow-up.
pub const BLOWUP: f64 = 1e6;
/// Arclength budget for curves in arclength form.
pub const MAX_ARCLENGTH: f64 = 60.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Form {
    /// State (f, f') over t.
    F,
    /// State (u, u') over t with u = f^2.
    U,
    /// State (t, f, tangent angle) over arclength.
    Arc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventKind {
    FZeroDescending,
    FZeroAscending,
    FpZero,
    BlowupF,
    BlowupFp,
    UZero,
    ReachT,
    /// Vertical tangent of the profile curve (arclength form).
    Vertical,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EventSpec {
    pub kind: EventKind,
    pub threshold: f64,
    pub terminal: bool,
}

impl EventSpec {
    pub fn new(kind: EventKind, threshold: f64, terminal: bool) -> Result<Self> {
        if matches!(kind, EventKind::BlowupF | EventKind::BlowupFp)
            && !(threshold > 0.0 && threshold.is_finite())
        {
            return Err(Error::Domain {
                what: "blow-up threshold",
                value: threshold,
            });
        }
        Ok(EventSpec {
            kind,
            threshold,
            terminal,
        })
    }

    pub fn stop(kind: EventKind) -> Self {
        let threshold = match kind {
            EventKind::BlowupF | EventKind::BlowupFp => BLOWUP,
            _ => 0.0,
        };
        EventSpec {
            kind,
            threshold,
            terminal: true,
        }
    }

    pub fn watch(kind: EventKind) -> Self {
        EventSpec {
            terminal: false,
            ..Self::stop(kind)
        }
    }

    pub fn reach_t(t: f64) -> Self {
        EventSpec {
            kind: EventKind::ReachT,
            threshold: t,
            terminal: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            abs: 1e-11,
            rel: 1e-11,
        }
    }
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Result<Self> {
        if !(abs > 0.0 && rel > 0.0) {
            return Err(Error::Domain {
                what: "tolerance",
                value: abs.min(rel),
            });
        }
        Ok(Tolerance { abs, rel })
    }

    pub fn scaled(self, factor: f64) -> Self {
        Tolerance {
            abs: self.abs * factor,
            rel: self.rel * factor,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Termination {
    Event { event: EventKind, t: f64 },
    Blowup { t: f64 },
    ReachedEnd { t: f64 },
}

impl Termination {
    pub fn t(&self) -> f64 {
        match *self {
            Termination::Event { t, .. } | Termination::Blowup { t } | Termination::ReachedEnd { t } => t,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EventRecord {
    pub kind: EventKind,
    pub t: f64,
    pub state: PhasePoint,
}

/// Initial data: position, value (f, or u in squared form) and slope.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Launch {
    pub t: f64,
    pub value: f64,
    pub slope: Slope,
}

impl From<PhasePoint> for Launch {
    fn from(p: PhasePoint) -> Self {
        Launch {
            t: p.t,
            value: p.f,
            slope: Slope::from_f64(p.fp),
        }
    }
}

/// A node of the trajectory: independent variable and raw state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Node {
    pub x: f64,
    pub y: [f64; 3],
    pub dy: [f64; 3],
}

/// Dense solution of the profile equation in one form.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub params: ConeParams,
    pub form: Form,
    pub direction: i8,
    sol: Solution<3>,
    pub termination: Termination,
    pub events: Vec<EventRecord>,
}

fn user_g(form: Form, spec: EventSpec) -> (Crossing, Box<dyn Fn(f64, &[f64; 3]) -> f64>) {
    let thr = spec.threshold;
    match (spec.kind, form) {
        (EventKind::FZeroDescending | EventKind::UZero, _) => (Crossing::Down, Box::new(|_, y| y[1])),
        (EventKind::FZeroAscending, _) => (Crossing::Up, Box::new(|_, y| y[1])),
        (EventKind::FpZero, Form::Arc) => (Crossing::Any, Box::new(|_, y| y[2].sin())),
        (EventKind::FpZero, _) => (Crossing::Any, Box::new(|_, y| y[2])),
        (EventKind::BlowupF, Form::U) => (Crossing::Up, Box::new(move |_, y| y[1].abs() - thr * thr)),
        (EventKind::BlowupF, _) => (Crossing::Up, Box::new(move |_, y| y[1].abs() - thr)),
        (EventKind::BlowupFp, Form::Arc) => (
            Crossing::Up,
            Box::new(move |_, y| y[2].sin().abs() - thr * y[2].cos().abs()),
        ),
        (EventKind::BlowupFp, Form::U) => (
            Crossing::Up,
            Box::new(move |_, y| y[2].abs() - 2.0 * thr * y[1].max(0.0).sqrt()),
        ),
        (EventKind::BlowupFp, Form::F) => (Crossing::Up, Box::new(move |_, y| y[2].abs() - thr)),
        (EventKind::ReachT, _) => (Crossing::Any, Box::new(move |_, y| y[0] - thr)),
        (EventKind::Vertical, Form::Arc) => (Crossing::Any, Box::new(|_, y| y[2].cos())),
        (EventKind::Vertical, _) => (Crossing::Up, Box::new(move |_, y| y[2].abs() - BLOWUP)),
    }
}

/// Integrates the profile equation from `init` in the given form.
pub fn integrate(
    params: &ConeParams,
    form: Form,
    init: &Launch,
    direction: i8,
    events: &[EventSpec],
    tol: Tolerance,
) -> Result<Trajectory> {
    check_interior(init.t)?;
    Tolerance::new(tol.abs, tol.rel)?;
    if direction != 1 && direction != -1 {
        return Err(Error::Domain {
            what: "direction",
            value: direction as f64,
        });
    }
    let c = params.coeffs()?;
    let dir = direction as f64;
    let settings = Settings {
        atol: tol.abs,
        rtol: tol.rel,
        ..Settings::default()
    };

    let (y0, x_end) = match form {
        Form::F | Form::U => {
            let Slope::Finite(s) = init.slope else {
                return Err(Error::Domain {
                    what: "slope",
                    value: init.slope.value(),
                });
            };
            if form == Form::U && init.value < 0.0 {
                return Err(Error::Domain {
                    what: "u",
                    value: init.value,
                });
            }
            let room = if direction > 0 { 1.0 - init.t } else { init.t };
            ([init.t, init.value, s], room)
        }
        Form::Arc => {
            let beta = match init.slope {
                Slope::Finite(s) if direction < 0 => s.atan() + std::f64::consts::PI,
                s => s.angle(),
            };
            ([init.t, init.value, beta], MAX_ARCLENGTH)
        }
    };

    let mut evs: Vec<Event<'_, 3>> = Vec::new();
    for spec in events {
        let (crossing, g) = user_g(form, *spec);
        evs.push(Event {
            g,
            crossing,
            terminal: spec.terminal,
        });
    }
    let n_user = evs.len();
    evs.push(Event::new(Crossing::Down, true, |_, y: &[f64; 3]| y[0] - BOUNDARY_MARGIN));
    evs.push(Event::new(Crossing::Up, true, |_, y: &[f64; 3]| {
        y[0] - (1.0 - BOUNDARY_MARGIN)
    }));
    let has = |k: EventKind| events.iter().any(|e| e.kind == k);
    if !has(EventKind::BlowupF) {
        let (cr, g) = user_g(form, EventSpec::stop(EventKind::BlowupF));
        evs.push(Event {
            g,
            crossing: cr,
            terminal: true,
        });
    }
    if form != Form::Arc && !has(EventKind::BlowupFp) {
        let (cr, g) = user_g(form, EventSpec::stop(EventKind::BlowupFp));
        evs.push(Event {
            g,
            crossing: cr,
            terminal: true,
        });
    }

    let sol = match form {
        Form::F => {
            let sys = move |_x: f64, y: &[f64; 3]| [dir, dir * y[2], dir * c.fpp(y[0], y[1], y[2])];
            ode::solve(&sys, 0.0, y0, x_end, &evs, &settings, |y| y[0])?
        }
        Form::U => {
            let sys = move |_x: f64, y: &[f64; 3]| {
                [dir, dir * y[2], dir * series::upp(&c, y[0], y[1], y[2])]
            };
            ode::solve(&sys, 0.0, y0, x_end, &evs, &settings, |y| y[0])?
        }
        Form::Arc => {
            let sys = move |_x: f64, y: &[f64; 3]| {
                let (sn, cs) = y[2].sin_cos();
                [cs, sn, c.curvature(y[0], y[1], y[2])]
            };
            ode::solve(&sys, 0.0, y0, x_end, &evs, &settings, |y| y[0])?
        }
    };

    let mut traj = Trajectory {
        params: *params,
        form,
        direction,
        termination: Termination::ReachedEnd { t: sol.y_end()[0] },
        events: Vec::new(),
        sol,
    };
    for hit in &traj.sol.hits {
        if hit.index < n_user {
            traj.events.push(EventRecord {
                kind: events[hit.index].kind,
                t: hit.y[0],
                state: traj.phase(&hit.y),
            });
        }
    }
    let t_end = traj.sol.y_end()[0];
    traj.termination = match traj.sol.stop {
        Stop::End => Termination::ReachedEnd { t: t_end },
        Stop::Event(i) if i < n_user => match events[i].kind {
            EventKind::BlowupF | EventKind::BlowupFp => Termination::Blowup { t: t_end },
            kind => Termination::Event { event: kind, t: t_end },
        },
        Stop::Event(i) if i < n_user + 2 => Termination::ReachedEnd { t: t_end },
        Stop::Event(_) => Termination::Blowup { t: t_end },
    };
    Ok(traj)
}

impl Trajectory {
    /// Graph-form phase point of a raw state.
    pub fn phase(&self, y: &[f64; 3]) -> PhasePoint {
        match self.form {
            Form::F => PhasePoint::new(y[0], y[1], y[2]),
            Form::U => {
                let f = y[1].max(0.0).sqrt();
                PhasePoint::new(y[0], f, y[2] / (2.0 * f))
            }
            Form::Arc => {
                let (sn, cs) = y[2].sin_cos();
                PhasePoint::new(y[0], y[1], sn / cs)
            }
        }
    }

    pub fn nodes(&self) -> Vec<Node> {
        let mut out = Vec::with_capacity(self.sol.steps.len() + 1);
        for (i, s) in self.sol.steps.iter().enumerate() {
            if i == 0 {
                out.push(Node {
                    x: s.x0,
                    y: s.y0,
                    dy: s.deriv(0.0),
                });
            }
            out.push(Node {
                x: s.x1(),
                y: s.y_end(),
                dy: s.deriv(s.end.min(1.0)),
            });
        }
        out
    }

    pub fn x_range(&self) -> (f64, f64) {
        (self.sol.x_start, self.sol.x_end())
    }

    pub fn raw_at(&self, x: f64) -> Option<[f64; 3]> {
        self.sol.state_at(x)
    }

    pub fn raw_deriv_at(&self, x: f64) -> Option<[f64; 3]> {
        self.sol.deriv_at(x)
    }

    pub fn start(&self) -> PhasePoint {
        self.phase(&self.sol.y_start)
    }

    pub fn end(&self) -> PhasePoint {
        self.phase(&self.sol.y_end())
    }

    pub fn end_raw(&self) -> [f64; 3] {
        self.sol.y_end()
    }

    /// Tangent angle of the profile curve at the end point.
    pub fn end_angle(&self) -> f64 {
        let y = self.sol.y_end();
        match self.form {
            Form::Arc => y[2],
            _ => self.end().fp.atan(),
        }
    }

    /// Interval of t covered by the trajectory.
    pub fn t_span(&self) -> (f64, f64) {
        let a = self.sol.y_start[0];
        let b = self.sol.y_end()[0];
        (a.min(b), a.max(b))
    }

    pub fn max_f(&self) -> f64 {
        let mut m = self.sol.y_start[1];
        for s in &self.sol.steps {
            for j in 1..=8 {
                let th = s.end.min(1.0) * j as f64 / 8.0;
                m = m.max(s.state(th)[1]);
            }
        }
        if self.form == Form::U {
            m.max(0.0).sqrt()
        } else {
            m
        }
    }

    /// Independent variable at which the trajectory passes through `t`,
    /// assuming t is monotone along it.
    pub fn x_at_t(&self, t: f64) -> Option<f64> {
        let (lo, hi) = self.t_span();
        if t < lo || t > hi {
            return None;
        }
        match self.form {
            Form::F | Form::U => {
                let x = (t - self.sol.y_start[0]) * self.direction as f64;
                Some(x.clamp(self.sol.x_start, self.sol.x_end()))
            }
            Form::Arc => {
                let steps = &self.sol.steps;
                let inc = self.sol.y_end()[0] >= self.sol.y_start[0];
                let key = |v: f64| if inc { v } else { -v };
                let target = key(t);
                let i = steps.partition_point(|s| key(s.y_end()[0]) < target);
                let s = steps.get(i.min(steps.len().checked_sub(1)?))?;
                let (mut a, mut b) = (0.0_f64, s.end.min(1.0));
                let ga = key(s.y0[0]) - target;
                if ga >= 0.0 {
                    return Some(s.x0);
                }
                // t(theta) is monotone on the step; bisection then a Newton polish
                for _ in 0..60 {
                    let m = 0.5 * (a + b);
                    if key(s.state(m)[0]) - target < 0.0 {
                        a = m;
                    } else {
                        b = m;
                    }
                    if b - a < 1e-10 {
                        break;
                    }
                }
                let mut th = 0.5 * (a + b);
                for _ in 0..3 {
                    let v = s.state(th)[0] - t;
                    let d = s.deriv(th)[0] * s.h;
                    if d == 0.0 {
                        break;
                    }
                    let next = th - v / d;
                    if !(next >= a - 1e-9 && next <= b + 1e-9) {
                        break;
                    }
                    th = next;
                }
                let th = th.clamp(0.0, s.end.min(1.0));
                Some((s.x0 + th * s.h).min(self.sol.x_end()))
            }
        }
    }

    /// Graph view: (t, f, f') at a given t.
    pub fn at_t(&self, t: f64) -> Option<PhasePoint> {
        let x = self.x_at_t(t)?;
        let y = self.sol.state_at(x)?;
        let mut p = self.phase(&y);
        p.t = t;
        Some(p)
    }

    /// (f, f', f'') at a given t, f'' taken from the interpolant.
    pub fn graph2_at_t(&self, t: f64) -> Option<(f64, f64, f64)> {
        let x = self.x_at_t(t)?;
        let y = self.sol.state_at(x)?;
        let dy = self.sol.deriv_at(x)?;
        let dir = self.direction as f64;
        Some(match self.form {
            Form::F => (y[1], y[2], dir * dy[2]),
            Form::U => {
                let f = y[1].max(0.0).sqrt();
                let fp = y[2] / (2.0 * f);
                (f, fp, (dir * dy[2] - 2.0 * fp * fp) / (2.0 * f))
            }
            Form::Arc => {
                let (sn, cs) = y[2].sin_cos();
                (y[1], sn / cs, dy[2] / (cs * cs * cs))
            }
        })
    }

    /// Tangent angle at a given t.
    pub fn angle_at_t(&self, t: f64) -> Option<f64> {
        let x = self.x_at_t(t)?;
        let y = self.sol.state_at(x)?;
        Some(match self.form {
            Form::Arc => y[2],
            _ => self.phase(&y).fp.atan(),
        })
    }

    pub fn event(&self, kind: EventKind) -> Option<&EventRecord> {
        self.events.iter().find(|e| e.kind == kind)
    }

    pub fn step_count(&self) -> usize {
        self.sol.steps.len()
    }
}

/// Initial data of a shot from a zero (or a general value) of the profile.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ShotSpec {
    pub params: ConeParams,
    pub t1: f64,
    pub c0: f64,
    pub slope: Slope,
}

impl ShotSpec {
    pub fn new(params: ConeParams, t1: f64, slope: Slope) -> Self {
        ShotSpec {
            params,
            t1,
            c0: 0.0,
            slope,
        }
    }
}

/// How a forward shot ended.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ShotEnd {
    /// Crossed f = 0 going down at t2 with the given tangent angle.
    Zero { t2: f64, angle: f64 },
    /// The graph turned vertical with f > 0.
    Vertical { t: f64, f: f64 },
    Blowup { t: f64 },
    Boundary { t: f64 },
}

impl ShotEnd {
    pub fn reaches_zero(&self) -> bool {
        matches!(self, ShotEnd::Zero { .. })
    }
}

#[derive(Clone, Debug)]
pub struct Shot {
    pub spec: ShotSpec,
    pub traj: Trajectory,
    pub end: ShotEnd,
}

/// Maps the symbolic infinite weight onto lambda = 1 with a vertical
/// launch; the rescaled profile has the same zeros and angles.
fn normalized(spec: &ShotSpec) -> Result<(ConeParams, Slope)> {
    match spec.params.lambda() {
        Lambda::Infinite => Ok((spec.params.with_lambda(1.0)?, Slope::PosInf)),
        Lambda::Finite(_) => Ok((spec.params, spec.slope)),
    }
}

/// Integrates a shot forward until it returns to zero, turns vertical,
/// blows up or leaves (0, 1).
pub fn shoot(spec: &ShotSpec, tol: Tolerance) -> Result<Shot> {
    let (params, slope) = normalized(spec)?;
    let linear = params.lambda_value()? == 0.0;
    let traj = if linear {
        if slope.is_infinite() {
            return Err(Error::Domain {
                what: "linear-regime slope",
                value: slope.value(),
            });
        }
        integrate(
            &params,
            Form::F,
            &Launch {
                t: spec.t1,
                value: spec.c0,
                slope,
            },
            1,
            &[EventSpec::stop(EventKind::FZeroDescending)],
            tol,
        )?
    } else {
        integrate(
            &params,
            Form::Arc,
            &Launch {
                t: spec.t1,
                value: spec.c0,
                slope,
            },
            1,
            &[
                EventSpec::stop(EventKind::FZeroDescending),
                EventSpec::stop(EventKind::Vertical),
            ],
            tol,
        )?
    };
    let y = traj.end_raw();
    let end = match traj.termination {
        Termination::Event {
            event: EventKind::FZeroDescending,
            t,
        } => ShotEnd::Zero {
            t2: t,
            angle: traj.end_angle(),
        },
        Termination::Event {
            event: EventKind::Vertical,
            t,
        } => ShotEnd::Vertical { t, f: y[1] },
        Termination::Blowup { t } => ShotEnd::Blowup { t },
        Termination::Event { t, .. } | Termination::ReachedEnd { t } => ShotEnd::Boundary { t },
    };
    Ok(Shot {
        spec: *spec,
        traj,
        end,
    })
}

/// Second zero of a shot with its landing slope, if the shot returns.
pub fn second_zero(params: &ConeParams, shot: &ShotSpec) -> Result<Option<(f64, Slope)>> {
    let spec = ShotSpec {
        params: *params,
        ..*shot
    };
    let s = shoot(&spec, Tolerance::default())?;
    let ShotEnd::Zero { angle, .. } = s.end else {
        return Ok(None);
    };
    Ok(series::landing_detect(params, &s.traj).map(|(t2, vertical)| {
        let slope = if vertical {
            Slope::NegInf
        } else {
            Slope::Finite(angle.tan())
        };
        (t2, slope)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{build_series, eval_series};

    fn p42() -> ConeParams {
        ConeParams::new(4, 2).unwrap()
    }

    #[test]
    fn zero_state_stays_zero() {
        let p = p42();
        let tr = integrate(
            &p,
            Form::F,
            &Launch::from(PhasePoint::new(0.3, 0.0, 0.0)),
            1,
            &[EventSpec::reach_t(0.8)],
            Tolerance::default(),
        )
        .unwrap();
        assert_eq!(
            tr.termination,
            Termination::Event {
                event: EventKind::ReachT,
                t: tr.end().t
            }
        );
        assert!((tr.end().t - 0.8).abs() < 1e-12);
        for n in tr.nodes() {
            assert_eq!(n.y[1], 0.0);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = p42();
        let l = Launch::from(PhasePoint::new(0.0, 0.0, 1.0));
        assert!(integrate(&p, Form::F, &l, 1, &[], Tolerance::default()).is_err());
        let l = Launch::from(PhasePoint::new(0.3, 0.0, 1.0));
        assert!(integrate(&p, Form::F, &l, 1, &[], Tolerance { abs: 0.0, rel: 1e-9 }).is_err());
        assert!(EventSpec::new(EventKind::BlowupF, -1.0, true).is_err());
    }

    fn series_launch(p: &ConeParams, t1: f64, delta: f64) -> Launch {
        let s = build_series(p, t1, 0.0, 8).unwrap();
        let pt = eval_series(&s, t1 + delta).unwrap();
        Launch::from(pt)
    }

    #[test]
    fn series_launched_shot_lands_past_sqrt_alpha() {
        // t1 = 0.15 is below the free-boundary threshold 0.18760541635 of (4,2)
        let p = p42();
        let tr = integrate(
            &p,
            Form::F,
            &series_launch(&p, 0.15, 1e-5),
            1,
            &[EventSpec::stop(EventKind::FZeroDescending)],
            Tolerance::default(),
        )
        .unwrap();
        let Termination::Event {
            event: EventKind::FZeroDescending,
            t,
        } = tr.termination
        else {
            panic!("{:?}", tr.termination)
        };
        assert!(t > std::f64::consts::FRAC_1_SQRT_2 && t < 1.0);
        // independent DOP853 arclength run at rtol 1e-13
        assert!((t - 0.98242072895491961).abs() < 1e-9, "{t}");
    }

    #[test]
    fn series_launched_shot_past_threshold_blows_up() {
        let p = p42();
        let tr = integrate(
            &p,
            Form::F,
            &series_launch(&p, 0.2, 1e-5),
            1,
            &[EventSpec::stop(EventKind::FZeroDescending)],
            Tolerance::default(),
        )
        .unwrap();
        let Termination::Blowup { t } = tr.termination else {
            panic!("{:?}", tr.termination)
        };
        // |f'| = 1e6 sits within ~1e-6 of the vertical point in f
        assert!((t - 0.9818975364056336).abs() < 1e-6, "{t}");
        assert!((tr.end().f - 0.0209289515938111).abs() < 1e-5);

        let arc = shoot(&ShotSpec::new(p, 0.2, Slope::PosInf), Tolerance::default()).unwrap();
        let ShotEnd::Vertical { t, f } = arc.end else {
            panic!("{:?}", arc.end)
        };
        assert!((t - 0.9818975364056336).abs() < 1e-9, "{t}");
        assert!((f - 0.0209289515938111).abs() < 1e-9, "{f}");
    }

    #[test]
    fn tighter_tolerance_moves_event_little() {
        let p = p42();
        let run = |tol: f64| {
            integrate(
                &p,
                Form::Arc,
                &Launch {
                    t: 0.15,
                    value: 0.0,
                    slope: Slope::Finite(3.0),
                },
                1,
                &[EventSpec::stop(EventKind::FZeroDescending)],
                Tolerance::new(tol, tol).unwrap(),
            )
            .unwrap()
            .end()
            .t
        };
        let coarse = run(1e-8);
        let fine = run(1e-10);
        let finest = run(1e-12);
        assert!((coarse - finest).abs() <= 10.0 * 1e-8);
        assert!((fine - finest).abs() <= 1e-10 * 10.0);
    }

    #[test]
    fn arc_and_series_vertical_shots_agree() {
        let p = p42();
        let arc = shoot(&ShotSpec::new(p, 0.15, Slope::PosInf), Tolerance::default()).unwrap();
        let f = integrate(
            &p,
            Form::F,
            &series_launch(&p, 0.15, 1e-5),
            1,
            &[EventSpec::stop(EventKind::FZeroDescending)],
            Tolerance::default(),
        )
        .unwrap();
        let ShotEnd::Zero { t2, .. } = arc.end else {
            panic!()
        };
        assert!((t2 - f.end().t).abs() < 1e-9);
        for i in 1..20 {
            let t = 0.2 + 0.035 * i as f64;
            let a = arc.traj.at_t(t).unwrap();
            let b = f.at_t(t).unwrap();
            assert!((a.f - b.f).abs() < 1e-9, "t = {t}");
            assert!((a.fp - b.fp).abs() < 1e-8 * (1.0 + b.fp.abs()));
        }
    }

    #[test]
    fn second_zero_examples() {
        let p = p42();
        assert!(second_zero(&p, &ShotSpec::new(p, 0.75, Slope::Finite(1.0))).unwrap().is_none());
        assert!(second_zero(&p, &ShotSpec::new(p, 0.75, Slope::PosInf)).unwrap().is_none());
        for slope in [Slope::Finite(0.5), Slope::Finite(5.0), Slope::PosInf] {
            let z = second_zero(&p, &ShotSpec::new(p, 0.01, slope)).unwrap();
            assert!(z.is_some());
        }
        let z = second_zero(&p, &ShotSpec::new(p, 0.7, Slope::PosInf)).unwrap();
        assert!(z.is_none());
        let lin = ConeParams::linear(4, 2).unwrap();
        let z = second_zero(&lin, &ShotSpec::new(lin, 0.1, Slope::Finite(1.0))).unwrap();
        let (_, s) = z.unwrap();
        assert!(!s.is_infinite());
    }

    #[test]
    fn infinite_lambda_matches_vertical_shot() {
        let p = p42().with_lambda(f64::INFINITY).unwrap();
        let a = second_zero(&p, &ShotSpec::new(p, 0.1, Slope::Finite(2.0))).unwrap().unwrap();
        let q = p42();
        let b = second_zero(&q, &ShotSpec::new(q, 0.1, Slope::PosInf)).unwrap().unwrap();
        assert_eq!(a.0, b.0);
    }
}
