//! Puiseux expansions at vertical contact points, the squared-form
//! right-hand side, and landing classification.

use serde::Serialize;

use crate::equation::{check_interior, Coeffs, ConeParams, PhasePoint};
use crate::error::{Error, Result};
use crate::integrate::{EventKind, Form, Trajectory};

/// Truncated power series in one variable.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Ps(pub Vec<f64>);

impl Ps {
    pub fn zero(len: usize) -> Ps {
        Ps(vec![0.0; len])
    }

    pub fn constant(c: f64, len: usize) -> Ps {
        let mut p = Ps::zero(len);
        p.0[0] = c;
        p
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn from_coeffs(c: &[f64], len: usize) -> Ps {
        let mut p = Ps::zero(len);
        for (i, v) in c.iter().take(len).enumerate() {
            p.0[i] = *v;
        }
        p
    }

    pub fn mul(&self, o: &Ps) -> Ps {
        let n = self.len();
        let mut out = Ps::zero(n);
        for (i, a) in self.0.iter().enumerate() {
            if *a == 0.0 {
                continue;
            }
            for j in 0..n - i {
                out.0[i + j] += a * o.0[j];
            }
        }
        out
    }

    pub fn add(&self, o: &Ps) -> Ps {
        Ps(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, o: &Ps) -> Ps {
        Ps(self.0.iter().zip(&o.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, c: f64) -> Ps {
        Ps(self.0.iter().map(|a| a * c).collect())
    }

    pub fn add_const(&self, c: f64) -> Ps {
        let mut p = self.clone();
        p.0[0] += c;
        p
    }

    /// Multiplies by s^k.
    pub fn shift(&self, k: usize) -> Ps {
        let n = self.len();
        let mut out = Ps::zero(n);
        for i in 0..n.saturating_sub(k) {
            out.0[i + k] = self.0[i];
        }
        out
    }

    pub fn deriv(&self) -> Ps {
        let n = self.len();
        let mut out = Ps::zero(n);
        for i in 1..n {
            out.0[i - 1] = i as f64 * self.0[i];
        }
        out
    }

    /// Reciprocal; the constant term must be nonzero.
    pub fn recip(&self) -> Ps {
        let n = self.len();
        let mut out = Ps::zero(n);
        out.0[0] = 1.0 / self.0[0];
        for m in 1..n {
            let mut acc = 0.0;
            for j in 1..=m {
                acc += self.0[j] * out.0[m - j];
            }
            out.0[m] = -acc / self.0[0];
        }
        out
    }
}

/// Solves for coefficients c[2..=order] so that the residual series
/// `g(c)` vanishes through s^(order-1), given c[0] and c[1]. Each
/// coefficient of the residual is affine in the next unknown.
pub(crate) fn solve_recursive(
    c0: f64,
    c1: f64,
    order: usize,
    g: impl Fn(&[f64]) -> Ps,
) -> Result<Vec<f64>> {
    let mut c = vec![0.0; order + 1];
    c[0] = c0;
    if order >= 1 {
        c[1] = c1;
    }
    for m in 1..order {
        c[m + 1] = 0.0;
        let g0 = g(&c).0[m];
        c[m + 1] = 1.0;
        let g1 = g(&c).0[m];
        let d = g1 - g0;
        if d == 0.0 || !d.is_finite() {
            return Err(Error::Validation(format!("degenerate series recursion at order {m}")));
        }
        c[m + 1] = -g0 / d;
    }
    Ok(c)
}

fn eval_poly(c: &[f64], s: f64) -> (f64, f64, f64) {
    let (mut f, mut fs, mut fss) = (0.0, 0.0, 0.0);
    for j in (0..c.len()).rev() {
        f = f * s + c[j];
        if j >= 1 {
            fs = fs * s + j as f64 * c[j];
        }
        if j >= 2 {
            fss = fss * s + (j * (j - 1)) as f64 * c[j];
        }
    }
    (f, fs, fss)
}

/// Expansion f = sum c_j s^j with s = sqrt(|t - t1|) at a vertical
/// contact point t1.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeriesExpansion {
    pub params: ConeParams,
    pub t1: f64,
    /// +1 when the expansion lives on t > t1, -1 on t < t1.
    pub side: f64,
    pub coeffs: Vec<f64>,
    /// Largest |t - t1| at which evaluation is accepted.
    pub radius: f64,
}

/// Residual series of the profile equation multiplied by
/// (1 + lambda f^2) s^3 under t = t1 + side s^2.
fn capillary_residual(c: &Coeffs, t1: f64, side: f64, coeffs: &[f64], len: usize) -> Ps {
    let f = Ps::from_coeffs(coeffs, len);
    let fs = f.deriv();
    let fss = fs.deriv();
    let t = Ps::constant(t1, len).add(&Ps::constant(side, len).shift(2));
    let inv_t = t.recip();
    let a = t.sub(&inv_t.scale(c.alpha));
    let one_m_t2 = t.mul(&t).scale(-1.0).add_const(1.0);
    let w = f.mul(&f).scale(c.lambda).add_const(1.0);
    let t1_term = one_m_t2.mul(&w).mul(&fss.shift(1).sub(&fs)).scale(0.25);
    let t2_term = w.mul(&f.shift(3).sub(&t.mul(&fs).shift(2).scale(0.5 * side)));
    let bracket = w.shift(2).add(&one_m_t2.mul(&fs.mul(&fs)).scale(0.25 * c.lambda));
    let lin = f.shift(1).sub(&a.mul(&fs).scale(0.5 * side));
    let t3_term = bracket.mul(&lin).scale(c.n2);
    t1_term.add(&t2_term).add(&t3_term)
}

/// Builds the order-`order` expansion at a vertical contact point t1 with
/// f(t1) = c0.
pub fn build_series(params: &ConeParams, t1: f64, c0: f64, order: usize) -> Result<SeriesExpansion> {
    check_interior(t1)?;
    let c = params.coeffs()?;
    if c.lambda <= 0.0 {
        return Err(Error::Domain {
            what: "lambda (vertical contact needs lambda > 0)",
            value: c.lambda,
        });
    }
    if order == 0 {
        return Err(Error::Domain {
            what: "series order",
            value: 0.0,
        });
    }
    let a1 = c.a(t1);
    if a1.abs() <= 1e-10 {
        return Err(Error::AnchorAtAlpha { t1 });
    }
    let side = -a1.signum();
    let c1 = (2.0 * (1.0 + c.lambda * c0 * c0) / (c.lambda * c.n2 * a1.abs())).sqrt();
    let len = order + 3;
    let coeffs = solve_recursive(c0, c1, order, |cf| capillary_residual(&c, t1, side, cf, len))?;
    Ok(SeriesExpansion {
        params: *params,
        t1,
        side,
        coeffs,
        radius: 0.1 * a1.abs() * t1.min(1.0 - t1),
    })
}

impl SeriesExpansion {
    fn s_of(&self, t: f64) -> Result<f64> {
        let d = t - self.t1;
        if d.abs() > self.radius {
            return Err(Error::OutOfTrustRadius {
                t,
                t1: self.t1,
                radius: self.radius,
            });
        }
        let x = self.side * d;
        if x < 0.0 {
            return Err(Error::Domain {
                what: "t on the wrong side of the contact point",
                value: t,
            });
        }
        Ok(x.sqrt())
    }

    /// (f, f', f'') at t; f' and f'' are infinite at t1.
    pub fn eval_full(&self, t: f64) -> Result<(f64, f64, f64)> {
        let s = self.s_of(t)?;
        let (f, fs, fss) = eval_poly(&self.coeffs, s);
        if s == 0.0 {
            let inf = self.side * self.coeffs.get(1).copied().unwrap_or(1.0).signum() * f64::INFINITY;
            return Ok((f, inf, f64::NEG_INFINITY));
        }
        let fp = self.side * fs / (2.0 * s);
        let fpp = (s * fss - fs) / (4.0 * s * s * s);
        Ok((f, fp, fpp))
    }

    /// Normalized residual of the profile equation at t.
    pub fn residual(&self, t: f64) -> Result<f64> {
        let (f, fp, fpp) = self.eval_full(t)?;
        crate::equation::relative_residual(&self.params, t, f, fp, fpp)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }
}

pub fn eval_series(s: &SeriesExpansion, t: f64) -> Result<PhasePoint> {
    let (f, fp, _) = s.eval_full(t)?;
    Ok(PhasePoint::new(t, f, fp))
}

/// u'' for the squared form away from u = 0, and its regular limit at a
/// vertical contact.
pub(crate) fn upp(c: &Coeffs, t: f64, u: f64, up: f64) -> f64 {
    let s = 1.0 - t * t;
    let a = c.a(t);
    let lam = c.lambda;
    if u == 0.0 {
        return upp_contact(c, t, up);
    }
    let w = 1.0 + lam * u;
    let b = 1.0 + c.n2 * lam * a * up / (2.0 * w);
    let rest = (2.0 * u - t * up) - s * up * up / (2.0 * u) * b
        + c.n2 * (2.0 * u - a * up + s * lam * up * up / (2.0 * w));
    -rest / s
}

fn upp_contact(c: &Coeffs, t: f64, up: f64) -> f64 {
    if up == 0.0 {
        return 0.0;
    }
    let s = 1.0 - t * t;
    let lam = c.lambda;
    let ap = 1.0 + c.alpha / (t * t);
    let p2 = up * up;
    let rhs = t * up + s * c.n2 * lam * ap * p2 / 4.0 + s * lam * p2 / 2.0 - 2.0 / lam
        - c.n2 * s * lam * p2 / 2.0;
    rhs * 2.0 / (3.0 * s)
}

/// Admissible u' at a vertical contact: -2 / ((n-2) lambda A(t)).
pub fn admissible_up(params: &ConeParams, t: f64) -> Result<f64> {
    let c = params.coeffs()?;
    let a = c.a(t);
    if c.lambda <= 0.0 || a == 0.0 {
        return Err(Error::SingularPoint { t });
    }
    Ok(-2.0 / (c.n2 * c.lambda * a))
}

/// u'' of the squared form u = f^2.
pub fn rhs_u(params: &ConeParams, t: f64, u: f64, up: f64) -> Result<f64> {
    check_interior(t)?;
    let c = params.coeffs()?;
    if u < 0.0 {
        return Err(Error::Domain { what: "u", value: u });
    }
    if u == 0.0 && up != 0.0 {
        let adm = admissible_up(params, t)?;
        if (up - adm).abs() > 1e-8 * adm.abs().max(1.0) {
            return Err(Error::IrregularContact { up, admissible: adm });
        }
        return Ok(upp_contact(&c, t, adm));
    }
    Ok(upp(&c, t, u, up))
}

fn probe_x(traj: &Trajectory, level: f64) -> Option<f64> {
    let nodes = traj.nodes();
    let idx = (1..nodes.len()).rev().find(|&i| nodes[i - 1].y[1] >= level && nodes[i].y[1] <= level)?;
    let (mut a, mut b) = (nodes[idx - 1].x, nodes[idx].x);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if traj.raw_at(m)?[1] >= level {
            a = m;
        } else {
            b = m;
        }
        if (b - a).abs() <= 1e-15 * (1.0 + a.abs()) {
            break;
        }
    }
    Some(0.5 * (a + b))
}

/// Landing point of a trajectory that returns to f = 0 and whether the
/// landing is vertical.
pub fn landing_detect(params: &ConeParams, traj: &Trajectory) -> Option<(f64, bool)> {
    let end = traj.end();
    let t2 = if let Some(ev) = traj
        .event(EventKind::FZeroDescending)
        .or_else(|| traj.event(EventKind::UZero))
    {
        ev.t
    } else {
        let small = end.f >= 0.0 && end.f < 1e-2 && traj.form != Form::U;
        if !(small && end.fp < 0.0 && matches!(traj.termination, crate::integrate::Termination::Blowup { .. })) {
            return None;
        }
        end.t - end.f / (2.0 * end.fp)
    };
    let lam = params.lambda().finite().unwrap_or(f64::INFINITY);
    if lam == 0.0 {
        return Some((t2, false));
    }
    let c = traj.params.coeffs().ok()?;
    if c.lambda <= 0.0 {
        return Some((t2, false));
    }
    if traj.event(EventKind::FZeroDescending).is_some() {
        let slope = traj.end_angle().tan();
        if slope.abs() < 1e3 {
            return Some((t2, false));
        }
    }
    let level_f = (1e-2 * traj.max_f()).min(1e-4);
    let level = if traj.form == Form::U { level_f * level_f } else { level_f };
    let x = probe_x(traj, level)?;
    let p = traj.phase(&traj.raw_at(x)?);
    let u = p.f * p.f;
    let up = 2.0 * p.f * p.fp;
    if !(up < 0.0) {
        return Some((t2, false));
    }
    let tc = p.t - u / up;
    let a = c.a(tc);
    if a <= 0.0 {
        return Some((t2, false));
    }
    let adm = -2.0 / (c.n2 * c.lambda * a);
    Some((t2, (up / adm - 1.0).abs() <= 1e-3))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrate::{integrate, EventSpec, Launch, Tolerance};
    use proptest::prelude::*;

    fn p42() -> ConeParams {
        ConeParams::new(4, 2).unwrap()
    }

    #[test]
    fn ps_arithmetic() {
        let a = Ps(vec![1.0, 2.0, 3.0, 0.0]);
        let b = Ps(vec![2.0, -1.0, 0.0, 0.0]);
        assert_eq!(a.mul(&b).0, vec![2.0, 3.0, 4.0, -3.0]);
        let r = b.recip();
        let one = b.mul(&r);
        for (i, v) in one.0.iter().enumerate() {
            assert!((v - if i == 0 { 1.0 } else { 0.0 }).abs() < 1e-15);
        }
        assert_eq!(a.shift(2).0, vec![0.0, 0.0, 1.0, 2.0]);
        assert_eq!(a.deriv().0, vec![2.0, 6.0, 0.0, 0.0]);
    }

    #[test]
    fn leading_coefficient_matches_oracle() {
        let s = build_series(&p42(), 0.3, 0.0, 8).unwrap();
        assert_eq!(s.side, 1.0);
        // sqrt(2 / (2 |A(0.3)|)), 50-digit oracle
        assert!((s.coeffs[1] - 0.85539892276830155).abs() < 1e-14);
        assert!(s.coeffs.iter().step_by(2).all(|c| *c == 0.0));
    }

    #[test]
    fn anchor_at_alpha_rejected() {
        let p = p42();
        let err = build_series(&p, p.sqrt_alpha(), 0.0, 8).unwrap_err();
        assert!(matches!(err, Error::AnchorAtAlpha { .. }));
        let s = build_series(&p, 0.3, 0.0, 8).unwrap();
        assert!(matches!(eval_series(&s, 0.5), Err(Error::OutOfTrustRadius { .. })));
        assert!(build_series(&ConeParams::linear(4, 2).unwrap(), 0.3, 0.0, 8).is_err());
    }

    #[test]
    fn contact_point_values() {
        let s = build_series(&p42(), 0.3, 0.0, 8).unwrap();
        let p = eval_series(&s, 0.3).unwrap();
        assert_eq!(p.f, 0.0);
        assert_eq!(p.fp, f64::INFINITY);
        let land = build_series(&p42(), 0.9, 0.0, 8).unwrap();
        assert_eq!(land.side, -1.0);
        assert_eq!(eval_series(&land, 0.9).unwrap().fp, f64::NEG_INFINITY);
        assert!(eval_series(&land, 0.9 - 1e-4).unwrap().fp < 0.0);
    }

    #[test]
    fn truncation_residual_scaling() {
        for (n, k, t1) in [(4, 2, 0.3), (6, 3, 0.2), (5, 3, 0.95), (6, 4, 0.4)] {
            let p = ConeParams::new(n, k).unwrap();
            let s = build_series(&p, t1, 0.0, 8).unwrap();
            let big = s.residual(t1 + s.side * s.radius * 0.2).unwrap();
            let small = s.residual(t1 + s.side * s.radius * 0.02).unwrap();
            assert!(big / small >= 10f64.powf(3.5 - 1.0), "({n},{k}) {big:e} {small:e}");
        }
    }

    #[test]
    fn residual_ratio_at_fixed_offsets() {
        let s = build_series(&p42(), 0.3, 0.0, 8).unwrap();
        let a = s.residual(0.3 + 1e-2).unwrap();
        let b = s.residual(0.3 + 1e-3).unwrap();
        assert!(a / b >= 10f64.powf(2.5), "{a:e} {b:e}");
        assert!(b < 1e-9);
    }

    #[test]
    fn nonzero_base_value() {
        let p = p42();
        let s = build_series(&p, 0.25, 0.3, 10).unwrap();
        let expect = (2.0 * (1.0 + 0.09) / (2.0 * (0.25 - 0.5 / 0.25_f64).abs())).sqrt();
        assert!((s.coeffs[1] - expect).abs() < 1e-14);
        assert!(s.residual(0.25 + 1e-3).unwrap() < 1e-9);
    }

    #[test]
    fn u_form_limit_matches_series() {
        for (n, k, t1, lam) in [(4, 2, 0.3, 1.0), (6, 3, 0.85, 2.5), (5, 2, 0.2, 0.4)] {
            let p = ConeParams::new(n, k).unwrap().with_lambda(lam).unwrap();
            let s = build_series(&p, t1, 0.0, 8).unwrap();
            let adm = admissible_up(&p, t1).unwrap();
            assert!((s.side * s.coeffs[1].powi(2) - adm).abs() < 1e-12);
            let upp = rhs_u(&p, t1, 0.0, adm).unwrap();
            let expect = 4.0 * s.coeffs[1] * s.coeffs[3];
            assert!((upp - expect).abs() < 1e-9 * expect.abs().max(1.0), "{upp} {expect}");
        }
    }

    #[test]
    fn rhs_u_domain() {
        let p = p42();
        assert_eq!(rhs_u(&p, 0.5, 0.0, 0.0).unwrap(), 0.0);
        assert!(matches!(rhs_u(&p, 0.5, 0.0, 1.0), Err(Error::IrregularContact { .. })));
        assert!(rhs_u(&p, 0.5, -1.0, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn u_form_is_push_forward(t in 0.05f64..0.95, f in 0.05f64..3.0, fp in -10.0f64..10.0,
                                  lam in 0.0f64..5.0, nk in 0usize..6) {
            let (n, k) = [(4, 2), (5, 2), (5, 3), (6, 2), (6, 3), (6, 4)][nk];
            let p = ConeParams::new(n, k).unwrap().with_lambda(lam).unwrap();
            let fpp = crate::equation::rhs_capillary(&p, &PhasePoint::new(t, f, fp)).unwrap();
            let upp = rhs_u(&p, t, f * f, 2.0 * f * fp).unwrap();
            let expect = 2.0 * fp * fp + 2.0 * f * fpp;
            prop_assert!((upp - expect).abs() <= 1e-10 * (1.0 + expect.abs()));
        }
    }

    #[test]
    fn vertical_and_finite_landings_classified() {
        let p = p42();
        // reversed series: launch near a vertical landing and integrate forward
        let s = build_series(&p, 0.9, 0.0, 10).unwrap();
        let launch = eval_series(&s, 0.9 - 0.3 * s.radius).unwrap();
        let tr = integrate(
            &p,
            Form::F,
            &Launch::from(launch),
            1,
            &[EventSpec::stop(EventKind::FZeroDescending)],
            Tolerance::default(),
        )
        .unwrap();
        let (t2, vertical) = landing_detect(&p, &tr).unwrap();
        assert!(vertical);
        assert!((t2 - 0.9).abs() < 1e-7, "{t2}");

        let arc = integrate(
            &p,
            Form::Arc,
            &Launch::from(launch),
            1,
            &[EventSpec::stop(EventKind::FZeroDescending)],
            Tolerance::default(),
        )
        .unwrap();
        let (t2, vertical) = landing_detect(&p, &arc).unwrap();
        assert!(vertical);
        assert!((t2 - 0.9).abs() < 1e-9, "{t2}");

        let q = PhasePoint::new(0.8, 0.05, -1.0);
        let tr = integrate(
            &p,
            Form::Arc,
            &Launch::from(q),
            1,
            &[EventSpec::stop(EventKind::FZeroDescending)],
            Tolerance::default(),
        )
        .unwrap();
        let (_, vertical) = landing_detect(&p, &tr).unwrap();
        assert!(!vertical);
    }
}
