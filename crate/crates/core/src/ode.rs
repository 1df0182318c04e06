//! Dormand-Prince 5(4) with PI step control, the continuous extension of
//! order 4 and event location on the interpolant.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Smallest step the controller may take before giving up.
pub const MIN_STEP: f64 = 1e-15;

/// Right-hand side of y' = F(x, y).
pub trait System<const N: usize> {
    fn eval(&self, x: f64, y: &[f64; N]) -> [f64; N];
}

impl<const N: usize, F: Fn(f64, &[f64; N]) -> [f64; N]> System<N> for F {
    fn eval(&self, x: f64, y: &[f64; N]) -> [f64; N] {
        self(x, y)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Crossing {
    Down,
    Up,
    Any,
}

impl Crossing {
    fn fires(self, g0: f64, g1: f64) -> bool {
        match self {
            Crossing::Down => g0 > 0.0 && g1 <= 0.0,
            Crossing::Up => g0 < 0.0 && g1 >= 0.0,
            Crossing::Any => g0 != 0.0 && (g1 == 0.0 || (g0 > 0.0) != (g1 > 0.0)),
        }
    }
}

pub struct Event<'a, const N: usize> {
    pub g: Box<dyn Fn(f64, &[f64; N]) -> f64 + 'a>,
    pub crossing: Crossing,
    pub terminal: bool,
}

impl<'a, const N: usize> Event<'a, N> {
    pub fn new(crossing: Crossing, terminal: bool, g: impl Fn(f64, &[f64; N]) -> f64 + 'a) -> Self {
        Event {
            g: Box::new(g),
            crossing,
            terminal,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Settings {
    pub atol: f64,
    pub rtol: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            atol: 1e-11,
            rtol: 1e-11,
            h_max: f64::INFINITY,
            max_steps: 200_000,
        }
    }
}

/// One accepted step with its interpolation data.
#[derive(Clone, Debug)]
pub struct Step<const N: usize> {
    pub x0: f64,
    pub h: f64,
    pub y0: [f64; N],
    pub y1: [f64; N],
    r: [[f64; N]; 4],
    /// Fraction of the step that belongs to the solution (< 1 after a
    /// terminal event).
    pub end: f64,
}

impl<const N: usize> Step<N> {
    pub fn x1(&self) -> f64 {
        if self.end >= 1.0 {
            self.x0 + self.h
        } else {
            self.x0 + self.end * self.h
        }
    }

    pub fn y_end(&self) -> [f64; N] {
        if self.end >= 1.0 {
            self.y1
        } else {
            self.state(self.end)
        }
    }

    /// Interpolated state at x0 + theta h.
    pub fn state(&self, theta: f64) -> [f64; N] {
        let s = 1.0 - theta;
        let mut y = [0.0; N];
        for i in 0..N {
            let d = self.y1[i] - self.y0[i];
            y[i] = self.y0[i]
                + theta * (d + s * (self.r[0][i] + theta * (self.r[1][i] + s * self.r[2][i])));
        }
        y
    }

    /// Derivative of the interpolant with respect to x.
    pub fn deriv(&self, theta: f64) -> [f64; N] {
        let s = 1.0 - theta;
        let mut y = [0.0; N];
        for i in 0..N {
            let d = self.y1[i] - self.y0[i];
            let q = self.r[1][i] + s * self.r[2][i];
            let dq = -self.r[2][i];
            let r = self.r[0][i] + theta * q;
            let dr = q + theta * dq;
            let p = d + s * r;
            let dp = -r + s * dr;
            y[i] = (p + theta * dp) / self.h;
        }
        y
    }

    pub fn state_at(&self, x: f64) -> [f64; N] {
        self.state((x - self.x0) / self.h)
    }

    pub fn deriv_at(&self, x: f64) -> [f64; N] {
        self.deriv((x - self.x0) / self.h)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Stop {
    /// Terminal event with its index.
    Event(usize),
    /// Reached the requested end of the independent variable.
    End,
}

#[derive(Clone, Debug)]
pub struct Hit<const N: usize> {
    pub index: usize,
    pub x: f64,
    pub y: [f64; N],
}

#[derive(Clone, Debug)]
pub struct Solution<const N: usize> {
    pub steps: Vec<Step<N>>,
    pub hits: Vec<Hit<N>>,
    pub stop: Stop,
    pub x_start: f64,
    pub y_start: [f64; N],
}

impl<const N: usize> Solution<N> {
    pub fn x_end(&self) -> f64 {
        self.steps.last().map_or(self.x_start, |s| s.x1())
    }

    pub fn y_end(&self) -> [f64; N] {
        self.steps.last().map_or(self.y_start, |s| s.y_end())
    }

    fn locate(&self, x: f64) -> Option<&Step<N>> {
        let first = self.steps.first()?;
        if x < first.x0 || x > self.x_end() {
            return None;
        }
        let i = self.steps.partition_point(|s| s.x1() < x);
        self.steps.get(i.min(self.steps.len() - 1))
    }

    pub fn state_at(&self, x: f64) -> Option<[f64; N]> {
        if self.steps.is_empty() {
            return (x == self.x_start).then_some(self.y_start);
        }
        self.locate(x).map(|s| s.state_at(x))
    }

    pub fn deriv_at(&self, x: f64) -> Option<[f64; N]> {
        self.locate(x).map(|s| s.deriv_at(x))
    }
}

fn norm<const N: usize>(e: &[f64; N], y0: &[f64; N], y1: &[f64; N], s: &Settings) -> f64 {
    let mut acc = 0.0;
    for i in 0..N {
        let sc = s.atol + s.rtol * y0[i].abs().max(y1[i].abs());
        acc += (e[i] / sc).powi(2);
    }
    (acc / N as f64).sqrt()
}

fn finite<const N: usize>(y: &[f64; N]) -> bool {
    y.iter().all(|v| v.is_finite())
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        out[i] += h * acc;
    }
    out
}

fn initial_step<const N: usize, S: System<N>>(sys: &S, x: f64, y: &[f64; N], f0: &[f64; N], s: &Settings) -> f64 {
    let sc: Vec<f64> = y.iter().map(|v| s.atol + s.rtol * v.abs()).collect();
    let d0 = (y.iter().zip(&sc).map(|(v, c)| (v / c).powi(2)).sum::<f64>() / N as f64).sqrt();
    let d1 = (f0.iter().zip(&sc).map(|(v, c)| (v / c).powi(2)).sum::<f64>() / N as f64).sqrt();
    let mut h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h = h.min(s.h_max);
    let y1 = axpy(y, h, &[(1.0, f0)]);
    let f1 = sys.eval(x + h, &y1);
    if !finite(&f1) {
        return (h * 1e-3).max(MIN_STEP * 10.0);
    }
    let d2 = (f1
        .iter()
        .zip(f0)
        .zip(&sc)
        .map(|((a, b), c)| ((a - b) / c).powi(2))
        .sum::<f64>()
        / N as f64)
        .sqrt()
        / h;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h).min(h1).min(s.h_max)
}

fn refine<const N: usize>(step: &Step<N>, ev: &Event<'_, N>, g0: f64, g1: f64) -> f64 {
    // Illinois regula falsi on theta in [0, 1]
    let g = |th: f64| (ev.g)(step.x0 + th * step.h, &step.state(th));
    let (mut a, mut b) = (0.0_f64, 1.0_f64);
    let (mut ga, mut gb) = (g0, g1);
    if gb == 0.0 {
        return 1.0;
    }
    let tol = 1e-15 * (1.0 + step.x0.abs()) / step.h.abs().max(1e-300);
    let mut side = 0;
    for _ in 0..200 {
        if (b - a).abs() <= tol.max(4.0 * f64::EPSILON) {
            break;
        }
        let mut c = (a * gb - b * ga) / (gb - ga);
        if !(c > a && c < b) {
            c = 0.5 * (a + b);
        }
        let gc = g(c);
        if gc == 0.0 {
            return c;
        }
        if (gc > 0.0) == (gb > 0.0) {
            b = c;
            gb = gc;
            if side == -1 {
                ga *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            ga = gc;
            if side == 1 {
                gb *= 0.5;
            }
            side = 1;
        }
    }
    b
}

/// Integrates from (x0, y0) until `x_end`, the first terminal event, or an
/// error. `t_of` extracts the physical coordinate reported in errors.
pub fn solve<const N: usize, S: System<N>>(
    sys: &S,
    x0: f64,
    y0: [f64; N],
    x_end: f64,
    events: &[Event<'_, N>],
    settings: &Settings,
    t_of: impl Fn(&[f64; N]) -> f64,
) -> Result<Solution<N>> {
    let mut x = x0;
    let mut y = y0;
    let mut k1 = sys.eval(x, &y);
    if !finite(&k1) {
        return Err(Error::Domain {
            what: "initial derivative",
            value: f64::NAN,
        });
    }
    let mut h = initial_step(sys, x, &y, &k1, settings).min(x_end - x);
    let mut err_old: f64 = 1e-4;
    let mut rejected = false;
    let mut g_prev: Vec<f64> = events.iter().map(|e| (e.g)(x, &y)).collect();
    let mut sol = Solution {
        steps: Vec::new(),
        hits: Vec::new(),
        stop: Stop::End,
        x_start: x0,
        y_start: y0,
    };
    const BETA: f64 = 0.04;
    const EXPO: f64 = 0.2 - BETA * 0.75;
    const SAFE: f64 = 0.9;

    for _ in 0..settings.max_steps {
        if x >= x_end {
            return Ok(sol);
        }
        if h.abs() < MIN_STEP {
            return Err(Error::StepUnderflow { x, t: t_of(&y) });
        }
        let last = x + h >= x_end;
        if last {
            h = x_end - x;
        }
        let k2 = sys.eval(x + C2 * h, &axpy(&y, h, &[(A21, &k1)]));
        let k3 = sys.eval(x + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = sys.eval(x + C4 * h, &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = sys.eval(
            x + C5 * h,
            &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = sys.eval(
            x + h,
            &axpy(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        );
        let y1 = axpy(&y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let k7 = sys.eval(x + h, &y1);
        let mut e = [0.0; N];
        for i in 0..N {
            e[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
        let err = norm(&e, &y, &y1, settings);
        if !err.is_finite() || !finite(&y1) || !finite(&k7) {
            h *= 0.1;
            rejected = true;
            continue;
        }
        let fac11 = err.powf(EXPO);
        if err > 1.0 {
            h /= (1.0 / 0.2_f64).min(fac11 / SAFE);
            rejected = true;
            continue;
        }

        let mut r = [[0.0; N]; 4];
        for i in 0..N {
            let d = y1[i] - y[i];
            let bspl = h * k1[i] - d;
            r[0][i] = bspl;
            r[1][i] = d - h * k7[i] - bspl;
            r[2][i] = h
                * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
        }
        let mut step = Step {
            x0: x,
            h,
            y0: y,
            y1,
            r,
            end: 1.0,
        };

        let g_new: Vec<f64> = events.iter().map(|e| (e.g)(x + h, &y1)).collect();
        let mut found: Vec<(f64, usize)> = Vec::new();
        for (i, ev) in events.iter().enumerate() {
            if ev.crossing.fires(g_prev[i], g_new[i]) {
                found.push((refine(&step, ev, g_prev[i], g_new[i]), i));
            }
        }
        found.sort_by(|a, b| a.0.total_cmp(&b.0));
        let terminal = found.iter().find(|(_, i)| events[*i].terminal).copied();
        for &(th, i) in &found {
            if let Some((tt, _)) = terminal {
                if th > tt {
                    continue;
                }
            }
            sol.hits.push(Hit {
                index: i,
                x: x + th * h,
                y: step.state(th),
            });
        }
        if let Some((th, i)) = terminal {
            step.end = th;
            sol.steps.push(step);
            sol.stop = Stop::Event(i);
            return Ok(sol);
        }
        sol.steps.push(step);
        g_prev = g_new;

        x += h;
        y = y1;
        k1 = k7;
        if last {
            return Ok(sol);
        }
        let mut fac = fac11 / err_old.powf(BETA);
        fac = (fac / SAFE).clamp(0.1, 5.0);
        let mut h_new = h / fac;
        if rejected {
            h_new = h_new.min(h);
        }
        err_old = err.max(1e-4);
        rejected = false;
        h = h_new.min(settings.h_max);
    }
    Err(Error::StepBudget(settings.max_steps))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_growth() {
        let sys = |_x: f64, y: &[f64; 1]| [y[0]];
        let s = Settings::default();
        let sol = solve(&sys, 0.0, [1.0], 2.0, &[], &s, |y| y[0]).unwrap();
        assert!((sol.y_end()[0] - 2f64.exp()).abs() < 1e-9);
        for i in 0..=40 {
            let x = i as f64 * 0.05;
            let y = sol.state_at(x).unwrap()[0];
            assert!((y - x.exp()).abs() < 1e-9, "x = {x}: {}", y - x.exp());
            let d = sol.deriv_at(x).unwrap()[0];
            assert!((d - x.exp()).abs() < 1e-7);
        }
    }

    #[test]
    fn oscillator_dense_output_and_event() {
        let sys = |_x: f64, y: &[f64; 2]| [y[1], -y[0]];
        let s = Settings {
            h_max: 0.5,
            ..Settings::default()
        };
        let ev = [Event::new(Crossing::Down, true, |_x, y: &[f64; 2]| y[0])];
        let sol = solve(&sys, 0.0, [1.0, 0.0], 10.0, &ev, &s, |y| y[0]).unwrap();
        assert_eq!(sol.stop, Stop::Event(0));
        let dx = sol.x_end() - std::f64::consts::FRAC_PI_2;
        assert!(dx.abs() < 1e-11, "{dx:e}");
        for i in 0..100 {
            let x = i as f64 * 0.0157;
            let y = sol.state_at(x).unwrap();
            assert!((y[0] - x.cos()).abs() < 1e-10);
            assert!((y[1] + x.sin()).abs() < 1e-10);
        }
    }

    #[test]
    fn truncated_step_keeps_interpolant() {
        let sys = |_x: f64, y: &[f64; 2]| [y[1], -y[0]];
        let s = Settings::default();
        let ev = [Event::new(Crossing::Down, true, |x: f64, _y: &[f64; 2]| 1.3 - x)];
        let sol = solve(&sys, 0.0, [1.0, 0.0], 10.0, &ev, &s, |y| y[0]).unwrap();
        let last = sol.steps.last().unwrap();
        for j in 0..=10 {
            let x = last.x0 + last.h * j as f64 / 10.0;
            assert!((last.state_at(x)[0] - x.cos()).abs() < 1e-10);
        }
    }

    #[test]
    fn nonterminal_events_are_recorded_in_order() {
        let sys = |_x: f64, y: &[f64; 2]| [y[1], -y[0]];
        let ev = [Event::new(Crossing::Any, false, |_x, y: &[f64; 2]| y[0])];
        let sol = solve(&sys, 0.0, [1.0, 0.0], 10.0, &ev, &Settings::default(), |y| y[0]).unwrap();
        let xs: Vec<f64> = sol.hits.iter().map(|h| h.x).collect();
        assert_eq!(xs.len(), 3);
        for (i, x) in xs.iter().enumerate() {
            let expect = std::f64::consts::FRAC_PI_2 * (2 * i + 1) as f64;
            assert!((x - expect).abs() < 1e-10);
        }
    }
}
