//! Gauss hypergeometric solutions of the linear profile equation.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::Serialize;

use crate::equation::ConeParams;
use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        PI / ((PI * x).sin() * gamma(1.0 - x))
    } else {
        let x = x - 1.0;
        let mut acc = LANCZOS[0];
        for (i, c) in LANCZOS.iter().enumerate().skip(1) {
            acc += c / (x + i as f64);
        }
        let t = x + LANCZOS_G + 0.5;
        (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * acc
    }
}

/// 1 / Gamma(x), zero at the poles.
pub fn rgamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.round() {
        0.0
    } else {
        1.0 / gamma(x)
    }
}

pub fn digamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.round() {
        return f64::NAN;
    }
    if x < 0.5 {
        return digamma(1.0 - x) - PI / (PI * x).tan();
    }
    let mut x = x;
    let mut acc = 0.0;
    while x < 16.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let r = 1.0 / (x * x);
    acc + x.ln() - 0.5 / x
        - r * (1.0 / 12.0 - r * (1.0 / 120.0 - r * (1.0 / 252.0 - r * (1.0 / 240.0 - r / 132.0))))
}

/// Parameters of 2F1(a, b; c; x).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HypergeomSpec {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl HypergeomSpec {
    /// The even solution of the linear equation for (n, k) in x = t^2.
    pub fn for_cone(n: u32, k: u32) -> Self {
        HypergeomSpec {
            a: (n as f64 - 1.0) / 2.0,
            b: -0.5,
            c: k as f64 / 2.0,
        }
    }

    pub fn derivative(&self) -> Self {
        HypergeomSpec {
            a: self.a + 1.0,
            b: self.b + 1.0,
            c: self.c + 1.0,
        }
    }
}

fn series(a: f64, b: f64, c: f64, x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for n in 0..2000 {
        let nf = n as f64;
        term *= (a + nf) * (b + nf) / ((c + nf) * (nf + 1.0)) * x;
        sum += term;
        if term == 0.0 || (term.abs() < 1e-17 * sum.abs() && n > 2) {
            break;
        }
    }
    sum
}

/// c - a - b = -m with m a nonnegative integer; y = 1 - x.
fn log_case(a: f64, b: f64, m: u32, y: f64) -> f64 {
    let mf = m as f64;
    let mut first = 0.0;
    if m > 0 {
        let pref = gamma(mf) * gamma(a + b - mf) * rgamma(a) * rgamma(b) * y.powi(-(m as i32));
        let mut term = 1.0;
        let mut sum = 1.0;
        for n in 0..m - 1 {
            let nf = n as f64;
            term *= (a - mf + nf) * (b - mf + nf) / ((nf + 1.0) * (1.0 - mf + nf)) * y;
            sum += term;
        }
        first = pref * sum;
    }
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    let pref = sign * gamma(a + b - mf) * rgamma(a - mf) * rgamma(b - mf);
    let ly = y.ln();
    let mut fact_m = 1.0;
    for j in 1..=m {
        fact_m *= j as f64;
    }
    // term_n = (a)_n (b)_n / (n! (n+m)!) y^n
    let mut term = 1.0 / fact_m;
    let mut sum = 0.0;
    for n in 0..2000 {
        let nf = n as f64;
        let bracket = ly - digamma(nf + 1.0) - digamma(nf + mf + 1.0) + digamma(a + nf) + digamma(b + nf);
        let add = term * bracket;
        sum += add;
        if n > 2 && add.abs() < 1e-17 * sum.abs().max(1e-300) && term.abs() < 1e-17 {
            break;
        }
        term *= (a + nf) * (b + nf) / ((nf + 1.0) * (nf + mf + 1.0)) * y;
    }
    first - pref * sum
}

fn connection(a: f64, b: f64, c: f64, x: f64) -> f64 {
    let y = 1.0 - x;
    let s = c - a - b;
    if s == s.round() && s <= 0.0 {
        return log_case(a, b, (-s) as u32, y);
    }
    if s == s.round() {
        // positive integer: reduce via Euler's transformation
        return y.powf(s) * connection(c - a, c - b, c, x);
    }
    let t1 = gamma(c) * gamma(s) * rgamma(c - a) * rgamma(c - b);
    let t2 = gamma(c) * gamma(-s) * rgamma(a) * rgamma(b);
    let mut out = 0.0;
    if t1 != 0.0 {
        out += t1 * series(a, b, 1.0 - s, y);
    }
    if t2 != 0.0 {
        out += t2 * y.powf(s) * series(c - a, c - b, 1.0 + s, y);
    }
    out
}

/// 2F1(a, b; c; x) for 0 <= x < 1.
pub fn hyp2f1(spec: &HypergeomSpec, x: f64) -> Result<f64> {
    if !(x >= 0.0 && x < 1.0) {
        return Err(Error::Domain {
            what: "hypergeometric argument",
            value: x,
        });
    }
    if spec.c <= 0.0 && spec.c == spec.c.round() {
        return Err(Error::InvalidParams(format!("c = {} is a pole", spec.c)));
    }
    Ok(if x <= 0.5 {
        series(spec.a, spec.b, spec.c, x)
    } else {
        connection(spec.a, spec.b, spec.c, x)
    })
}

/// Even solution f(t) = 2F1(...; t^2) of the linear equation with f' (t).
pub fn even_solution(n: u32, k: u32, t: f64) -> Result<(f64, f64)> {
    ConeParams::new(n, k)?;
    let h = HypergeomSpec::for_cone(n, k);
    let x = t * t;
    let f = hyp2f1(&h, x)?;
    let d = hyp2f1(&h.derivative(), x)? * h.a * h.b / h.c;
    Ok((f, 2.0 * t * d))
}

/// First positive zero of the even solution.
pub fn first_zero(n: u32, k: u32) -> Result<f64> {
    let p = ConeParams::new(n, k)?;
    let h = HypergeomSpec::for_cone(n, k);
    let f = |t: f64| hyp2f1(&h, t * t);
    let mut lo = p.sqrt_alpha();
    let steps = 400;
    let width = 1.0 - lo;
    let mut hi = None;
    for i in 1..steps {
        let t = lo + width * i as f64 / steps as f64;
        if f(t)? <= 0.0 {
            hi = Some(t);
            break;
        }
        lo = t;
    }
    let mut hi = hi.ok_or(Error::BracketNotFound {
        log: format!("even solution of ({n},{k}) stays positive on (sqrt(alpha), 1)"),
    })?;
    while hi - lo > 1e-15 {
        let m = 0.5 * (lo + hi);
        if m <= lo || m >= hi {
            break;
        }
        if f(m)? > 0.0 {
            lo = m;
        } else {
            hi = m;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn symmetric_kernel(k: u32, t: f64) -> Result<(f64, f64)> {
    even_solution(2 * k, k, t)
}

/// Symmetric kernel element for n = 2k normalized to 1 at 1/sqrt(2),
/// with its derivative.
pub fn f0_symmetric_with_deriv(k: u32, t: f64) -> Result<(f64, f64)> {
    if k < 2 {
        return Err(Error::InvalidParams(format!("k = {k} must be at least 2")));
    }
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::Domain { what: "t", value: t });
    }
    let norm = 2.0 * symmetric_kernel(k, FRAC_1_SQRT_2)?.0;
    let r = (1.0 - t * t).sqrt();
    let (a, da) = symmetric_kernel(k, t)?;
    let (b, db) = symmetric_kernel(k, r)?;
    Ok(((a + b) / norm, (da - db * t / r) / norm))
}

pub fn f0_symmetric(k: u32, t: f64) -> Result<f64> {
    Ok(f0_symmetric_with_deriv(k, t)?.0)
}
