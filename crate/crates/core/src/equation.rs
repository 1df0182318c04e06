//! Cone parameters, the profile equation, its linear limit and the
//! algebraic diagnostics built on top of them.

use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Distance from 0 or 1 below which `t` counts as a singular point.
pub const SINGULAR_GUARD: f64 = 1e-12;

/// Nonlinearity weight of the profile equation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Lambda {
    Finite(f64),
    Infinite,
}

impl Lambda {
    pub fn finite(self) -> Option<f64> {
        match self {
            Lambda::Finite(v) => Some(v),
            Lambda::Infinite => None,
        }
    }
}

/// Slope of a profile at a point, keeping vertical tangents exact.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Slope {
    Finite(f64),
    PosInf,
    NegInf,
}

impl Slope {
    pub fn from_f64(v: f64) -> Slope {
        if v == f64::INFINITY {
            Slope::PosInf
        } else if v == f64::NEG_INFINITY {
            Slope::NegInf
        } else {
            Slope::Finite(v)
        }
    }

    pub fn is_infinite(self) -> bool {
        !matches!(self, Slope::Finite(_))
    }

    pub fn value(self) -> f64 {
        match self {
            Slope::Finite(v) => v,
            Slope::PosInf => f64::INFINITY,
            Slope::NegInf => f64::NEG_INFINITY,
        }
    }

    /// Tangent angle in (-pi/2, pi/2].
    pub fn angle(self) -> f64 {
        match self {
            Slope::Finite(v) => v.atan(),
            Slope::PosInf => std::f64::consts::FRAC_PI_2,
            Slope::NegInf => -std::f64::consts::FRAC_PI_2,
        }
    }

    pub fn scaled(self, c: f64) -> Slope {
        match self {
            Slope::Finite(v) => Slope::Finite(v * c),
            s if c > 0.0 => s,
            Slope::PosInf => Slope::NegInf,
            Slope::NegInf => Slope::PosInf,
        }
    }
}

impl Serialize for Slope {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Slope::Finite(v) => s.serialize_f64(*v),
            Slope::PosInf => s.serialize_str("inf"),
            Slope::NegInf => s.serialize_str("-inf"),
        }
    }
}

struct NumOrInf;

impl<'de> Visitor<'de> for NumOrInf {
    type Value = f64;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a number or \"inf\"")
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<f64, E> {
        Ok(v)
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<f64, E> {
        Ok(v as f64)
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<f64, E> {
        Ok(v as f64)
    }

    fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<f64, E> {
        match v {
            "inf" => Ok(f64::INFINITY),
            "-inf" => Ok(f64::NEG_INFINITY),
            "nan" => Ok(f64::NAN),
            _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
        }
    }
}

/// Serde adapter writing non-finite floats as "inf", "-inf" or "nan".
pub(crate) mod real {
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        d.deserialize_any(super::NumOrInf)
    }
}

impl<'de> Deserialize<'de> for Slope {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        d.deserialize_any(NumOrInf).map(Slope::from_f64)
    }
}

impl Serialize for Lambda {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Lambda::Finite(v) => s.serialize_f64(*v),
            Lambda::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Lambda {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = d.deserialize_any(NumOrInf)?;
        if v == f64::INFINITY {
            Ok(Lambda::Infinite)
        } else if v >= 0.0 {
            Ok(Lambda::Finite(v))
        } else {
            Err(de::Error::custom("lambda must be nonnegative"))
        }
    }
}

/// Dimension pair (n, k) and the weight lambda of one instance of the
/// profile equation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConeParams {
    n: u32,
    k: u32,
    lambda: Lambda,
    alpha: f64,
}

impl ConeParams {
    /// Parameters with lambda = 1.
    pub fn new(n: u32, k: u32) -> Result<Self> {
        if n < 4 {
            return Err(Error::InvalidParams(format!("n = {n} must be at least 4")));
        }
        if k < 2 || k > n - 2 {
            return Err(Error::InvalidParams(format!(
                "k = {k} must satisfy 2 <= k <= n - 2 = {}",
                n - 2
            )));
        }
        Ok(ConeParams {
            n,
            k,
            lambda: Lambda::Finite(1.0),
            alpha: (k - 1) as f64 / (n - 2) as f64,
        })
    }

    pub fn linear(n: u32, k: u32) -> Result<Self> {
        Self::new(n, k)?.with_lambda(0.0)
    }

    /// Replaces lambda; `f64::INFINITY` selects the symbolic infinite weight.
    pub fn with_lambda(mut self, lambda: f64) -> Result<Self> {
        self.lambda = if lambda == f64::INFINITY {
            Lambda::Infinite
        } else if lambda.is_finite() && lambda >= 0.0 {
            Lambda::Finite(lambda)
        } else {
            return Err(Error::InvalidParams(format!("lambda = {lambda} must be >= 0")));
        };
        Ok(self)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn lambda(&self) -> Lambda {
        self.lambda
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn sqrt_alpha(&self) -> f64 {
        self.alpha.sqrt()
    }

    /// Finite lambda or an error naming the symbolic case.
    pub fn lambda_value(&self) -> Result<f64> {
        self.lambda.finite().ok_or(Error::Domain {
            what: "lambda",
            value: f64::INFINITY,
        })
    }

    /// Parameters of the companion equation under t -> sqrt(1 - t^2).
    pub fn involuted(&self) -> ConeParams {
        ConeParams {
            n: self.n,
            k: self.n - self.k,
            lambda: self.lambda,
            alpha: (self.n - self.k - 1) as f64 / (self.n - 2) as f64,
        }
    }

    pub(crate) fn coeffs(&self) -> Result<Coeffs> {
        Ok(Coeffs {
            n2: (self.n - 2) as f64,
            alpha: self.alpha,
            lambda: self.lambda_value()?,
        })
    }
}

/// Unchecked numeric view of the parameters used inside right-hand sides.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Coeffs {
    pub n2: f64,
    pub alpha: f64,
    pub lambda: f64,
}

impl Coeffs {
    #[inline]
    pub fn a(&self, t: f64) -> f64 {
        t - self.alpha / t
    }

    /// f'' from the capillary equation.
    #[inline]
    pub fn fpp(&self, t: f64, f: f64, fp: f64) -> f64 {
        let s = 1.0 - t * t;
        let q = 1.0 + s * self.lambda * fp * fp / (1.0 + self.lambda * f * f);
        -((f - t * fp) + self.n2 * q * (f - self.a(t) * fp)) / s
    }

    /// Curvature of the profile curve in arclength, as a function of the
    /// tangent angle.
    #[inline]
    pub fn curvature(&self, t: f64, f: f64, beta: f64) -> f64 {
        let (sn, cs) = beta.sin_cos();
        let s = 1.0 - t * t;
        let w = cs * cs + s * self.lambda * sn * sn / (1.0 + self.lambda * f * f);
        -(cs * cs * (f * cs - t * sn) + self.n2 * w * (f * cs - self.a(t) * sn)) / s
    }
}

/// A point (t, f, f') in phase space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub t: f64,
    pub f: f64,
    pub fp: f64,
}

impl PhasePoint {
    pub fn new(t: f64, f: f64, fp: f64) -> Self {
        PhasePoint { t, f, fp }
    }
}

/// Derived quantities at a phase point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Diagnostics {
    pub a: f64,
    pub h: f64,
    pub psi: f64,
    pub s: f64,
    pub big_psi: f64,
    pub ratio: Option<f64>,
}

pub(crate) fn check_interior(t: f64) -> Result<()> {
    if !(t > SINGULAR_GUARD && t < 1.0 - SINGULAR_GUARD) {
        return Err(Error::SingularPoint { t });
    }
    Ok(())
}

/// A(t) = t - alpha / t.
pub fn coeff_a(params: &ConeParams, t: f64) -> Result<f64> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::Domain { what: "t", value: t });
    }
    Ok(t - params.alpha / t)
}

/// f'' solved from the capillary equation with the weight in `params`.
pub fn rhs_capillary(params: &ConeParams, p: &PhasePoint) -> Result<f64> {
    check_interior(p.t)?;
    Ok(params.coeffs()?.fpp(p.t, p.f, p.fp))
}

/// Residual of the profile equation (multiplied through by 1 + lambda f^2)
/// divided by the sum of the magnitudes of its terms.
pub fn relative_residual(params: &ConeParams, t: f64, f: f64, fp: f64, fpp: f64) -> Result<f64> {
    check_interior(t)?;
    let c = params.coeffs()?;
    let s = 1.0 - t * t;
    let w = 1.0 + c.lambda * f * f;
    let terms = [
        s * w * fpp,
        w * (f - t * fp),
        c.n2 * (w + s * c.lambda * fp * fp) * (f - c.a(t) * fp),
    ];
    let scale: f64 = terms.iter().map(|v| v.abs()).sum();
    let sum: f64 = terms.iter().sum();
    Ok(if scale == 0.0 { 0.0 } else { sum.abs() / scale })
}

/// f'' solved from the Legendre-type linear operator.
pub fn rhs_linear(params: &ConeParams, p: &PhasePoint) -> Result<f64> {
    check_interior(p.t)?;
    Ok(linear_fpp(params.n, params.k, p.t, p.f, p.fp))
}

#[inline]
pub(crate) fn linear_fpp(n: u32, k: u32, t: f64, f: f64, fp: f64) -> f64 {
    let n1 = (n - 1) as f64;
    let k1 = (k - 1) as f64;
    -(n1 * (f - t * fp) + k1 * fp / t) / (1.0 - t * t)
}

pub fn diagnostics(params: &ConeParams, p: &PhasePoint) -> Result<Diagnostics> {
    check_interior(p.t)?;
    let c = params.coeffs()?;
    let t = p.t;
    let a = c.a(t);
    let h = p.f - a * p.fp;
    let s = (params.n - 1) as f64 / (1.0 - t * t)
        + c.n2 * c.lambda * p.fp * p.fp / (1.0 + c.lambda * p.f * p.f);
    Ok(Diagnostics {
        a,
        h,
        psi: (t * t - c.alpha).abs().sqrt(),
        s,
        big_psi: p.f * h - 1.0 / c.n2,
        ratio: (h != 0.0).then(|| p.fp / h),
    })
}

/// h' predicted by the closed-form identity h' = A S h - alpha(1-alpha)/(t^2(1-t^2)) f'.
pub fn h_prime(params: &ConeParams, p: &PhasePoint) -> Result<f64> {
    let d = diagnostics(params, p)?;
    let al = params.alpha;
    let t = p.t;
    Ok(d.a * d.s * d.h - al * (1.0 - al) / (t * t * (1.0 - t * t)) * p.fp)
}

/// (f/psi)' predicted by -h / (A psi).
pub fn f_over_psi_prime(params: &ConeParams, p: &PhasePoint) -> Result<f64> {
    let d = diagnostics(params, p)?;
    Ok(-d.h / (d.a * d.psi))
}

/// (f'/h)' predicted by the Riccati equation for the ratio.
pub fn ratio_prime(params: &ConeParams, p: &PhasePoint) -> Result<f64> {
    let d = diagnostics(params, p)?;
    let r = d.ratio.ok_or(Error::Domain { what: "h", value: 0.0 })?;
    let al = params.alpha;
    let t = p.t;
    let w = 1.0 - t * t;
    Ok(al * (1.0 - al) / (t * t * w) * r * r + (al / (t * w) - d.a * d.s) * r - d.s)
}

/// Phase point of the companion solution under s = sqrt(1 - t^2).
pub fn involute_point(p: &PhasePoint) -> PhasePoint {
    let s = (1.0 - p.t * p.t).sqrt();
    PhasePoint {
        t: s,
        f: p.f,
        fp: -(s / p.t) * p.fp,
    }
}

/// Slope transform of the involution, exact for vertical tangents.
pub fn involute_slope(t: f64, slope: Slope) -> Slope {
    let s = (1.0 - t * t).sqrt();
    slope.scaled(-s / t)
}

/// Phase point of f / sqrt(factor), which solves the equation with
/// weight lambda * factor.
pub fn rescale_point(p: &PhasePoint, factor: f64) -> Result<PhasePoint> {
    if !(factor > 0.0 && factor.is_finite()) {
        return Err(Error::Domain {
            what: "factor",
            value: factor,
        });
    }
    let r = factor.sqrt();
    Ok(PhasePoint {
        t: p.t,
        f: p.f / r,
        fp: p.fp / r,
    })
}

/// Parameters after multiplying lambda by `factor`.
pub fn rescale_params(params: &ConeParams, factor: f64) -> Result<ConeParams> {
    if !(factor > 0.0 && factor.is_finite()) {
        return Err(Error::Domain {
            what: "factor",
            value: factor,
        });
    }
    match params.lambda {
        Lambda::Finite(l) => params.with_lambda(l * factor),
        Lambda::Infinite => Ok(*params),
    }
}

/// Contact angle arctan(sqrt(1 - t^2) |f'|) at a zero.
pub fn contact_angle(t_star: f64, slope: Slope) -> f64 {
    match slope {
        Slope::Finite(v) => ((1.0 - t_star * t_star).sqrt() * v.abs()).atan(),
        _ => std::f64::consts::FRAC_PI_2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn p42() -> ConeParams {
        ConeParams::new(4, 2).unwrap()
    }

    #[test]
    fn rejects_bad_dimensions() {
        assert!(ConeParams::new(3, 2).is_err());
        assert!(ConeParams::new(5, 1).is_err());
        assert!(ConeParams::new(5, 4).is_err());
        assert!(ConeParams::new(4, 2).unwrap().with_lambda(-1.0).is_err());
        assert_eq!(
            ConeParams::new(4, 2).unwrap().with_lambda(f64::INFINITY).unwrap().lambda(),
            Lambda::Infinite
        );
    }

    #[test]
    fn coeff_a_values() {
        let p = p42();
        assert!(coeff_a(&p, std::f64::consts::FRAC_1_SQRT_2).unwrap().abs() < 1e-15);
        assert_eq!(coeff_a(&p, 1.0).unwrap(), 0.5);
        let q = ConeParams::new(5, 2).unwrap();
        assert!(coeff_a(&q, 1.0 / 3f64.sqrt()).unwrap().abs() < 1e-15);
        assert!(coeff_a(&p, 0.0).is_err());
    }

    #[test]
    fn rhs_capillary_examples() {
        let p = p42();
        assert_eq!(rhs_capillary(&p, &PhasePoint::new(0.4, 0.0, 0.0)).unwrap(), 0.0);
        let t = std::f64::consts::FRAC_1_SQRT_2;
        let (ff, m) = (0.7, -2.3);
        let expect = -(1.0 / (1.0 - t * t))
            * ((ff - t * m) + 2.0 * (1.0 + (1.0 - t * t) * m * m / (1.0 + ff * ff)) * ff);
        let got = rhs_capillary(&p, &PhasePoint::new(t, ff, m)).unwrap();
        assert_relative_eq!(got, expect, max_relative = 1e-13);
        // 50-digit evaluation of the closed form
        let got = rhs_capillary(&p, &PhasePoint::new(0.3, 0.1, 0.5)).unwrap();
        assert_relative_eq!(got, -2.0544554455445545, max_relative = 1e-14);
        assert!(rhs_capillary(&p, &PhasePoint::new(1.0, 0.1, 0.5)).is_err());
        let inf = p.with_lambda(f64::INFINITY).unwrap();
        assert!(rhs_capillary(&inf, &PhasePoint::new(0.3, 0.1, 0.5)).is_err());
    }

    #[test]
    fn rhs_linear_examples() {
        let p = ConeParams::linear(4, 2).unwrap();
        assert_eq!(rhs_linear(&p, &PhasePoint::new(0.3, 0.0, 0.0)).unwrap(), 0.0);
        assert_relative_eq!(
            rhs_linear(&p, &PhasePoint::new(0.5, 1.0, 0.0)).unwrap(),
            -4.0,
            max_relative = 1e-15
        );
        assert!(rhs_linear(&p, &PhasePoint::new(0.0, 1.0, 0.0)).is_err());
    }

    #[test]
    fn diagnostics_examples() {
        let p = p42();
        let d = diagnostics(&p, &PhasePoint::new(0.6, 0.4, 0.0)).unwrap();
        assert_eq!(d.h, 0.4);
        let t = std::f64::consts::FRAC_1_SQRT_2;
        let d = diagnostics(&p, &PhasePoint::new(t, 0.9, 3.0)).unwrap();
        assert_relative_eq!(d.big_psi, 0.81 - 0.5, max_relative = 1e-12);
        let d = diagnostics(&p, &PhasePoint::new(0.3, 0.1, 0.5)).unwrap();
        assert_relative_eq!(d.a, -1.3666666666666667, max_relative = 1e-15);
        assert_relative_eq!(d.h, 0.7833333333333333, max_relative = 1e-15);
        assert!(d.s > 0.0);
    }

    #[test]
    fn contact_angle_examples() {
        assert_eq!(contact_angle(0.4, Slope::Finite(0.0)), 0.0);
        assert_eq!(contact_angle(0.4, Slope::PosInf), std::f64::consts::FRAC_PI_2);
        assert_relative_eq!(
            contact_angle(0.6, Slope::Finite(1.25)),
            std::f64::consts::FRAC_PI_4,
            max_relative = 1e-15
        );
    }

    #[test]
    fn slope_json_uses_inf_string() {
        assert_eq!(serde_json::to_string(&Slope::PosInf).unwrap(), "\"inf\"");
        assert_eq!(serde_json::to_string(&Slope::Finite(1.5)).unwrap(), "1.5");
        let s: Slope = serde_json::from_str("\"inf\"").unwrap();
        assert_eq!(s, Slope::PosInf);
    }

    #[test]
    fn rescale_identity_and_domain() {
        let p = PhasePoint::new(0.3, 0.2, 0.7);
        assert_eq!(rescale_point(&p, 1.0).unwrap(), p);
        assert!(rescale_point(&p, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn linear_matches_lambda_zero(t in 0.01f64..0.99, f in -5.0f64..5.0, fp in -50.0f64..50.0,
                                      nk in prop::sample::select(vec![(4u32, 2u32), (5, 2), (5, 3), (6, 2), (6, 3), (6, 4), (9, 5)])) {
            let p = ConeParams::linear(nk.0, nk.1).unwrap();
            let pt = PhasePoint::new(t, f, fp);
            let a = rhs_linear(&p, &pt).unwrap();
            let b = rhs_capillary(&p, &pt).unwrap();
            let scale = a.abs().max(1.0 / (1.0 - t * t)) * (1.0 + f.abs() + fp.abs() / t);
            prop_assert!((a - b).abs() <= 1e-14 * scale);
        }

        #[test]
        fn rescaled_point_solves_scaled_equation(t in 0.05f64..0.95, f in 0.0f64..3.0, fp in -20.0f64..20.0,
                                                 lam in 0.1f64..4.0, factor in 0.01f64..100.0) {
            let p = ConeParams::new(6, 3).unwrap().with_lambda(lam).unwrap();
            let pt = PhasePoint::new(t, f, fp);
            let fpp = rhs_capillary(&p, &pt).unwrap();
            let q = rescale_params(&p, factor).unwrap();
            let r = rescale_point(&pt, factor).unwrap();
            let fpp_r = rhs_capillary(&q, &r).unwrap();
            prop_assert!((fpp_r - fpp / factor.sqrt()).abs() <= 1e-10 * (1.0 + fpp.abs() / factor.sqrt()));
        }

        #[test]
        fn involution_maps_solutions(t in 0.05f64..0.95, f in 0.0f64..3.0, fp in -20.0f64..20.0,
                                     nk in prop::sample::select(vec![(4u32, 2u32), (5, 2), (5, 3), (6, 2), (7, 3)])) {
            // second derivative of f(sqrt(1-s^2)) computed by the chain rule
            let p = ConeParams::new(nk.0, nk.1).unwrap();
            let pt = PhasePoint::new(t, f, fp);
            let fpp = rhs_capillary(&p, &pt).unwrap();
            let s = (1.0 - t * t).sqrt();
            let dt = -s / t;
            let d2t = -1.0 / (t * t * t);
            let ghat_pp = fpp * dt * dt + fp * d2t;
            let q = involute_point(&pt);
            let expect = rhs_capillary(&p.involuted(), &q).unwrap();
            prop_assert!((ghat_pp - expect).abs() <= 1e-9 * (1.0 + expect.abs()));
        }

        #[test]
        fn involute_point_twice_is_identity(t in 0.01f64..0.99, f in -3.0f64..3.0, fp in -20.0f64..20.0) {
            let pt = PhasePoint::new(t, f, fp);
            let back = involute_point(&involute_point(&pt));
            prop_assert!((back.t - t).abs() < 1e-12);
            prop_assert!((back.fp - fp).abs() < 1e-12 * (1.0 + fp.abs()));
        }
    }
}
