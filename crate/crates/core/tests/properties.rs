use approx::assert_relative_eq;
use capcone::equation::{
    contact_angle, involute_point, involute_slope, relative_residual, rescale_params, rescale_point, rhs_capillary,
    rhs_linear, ConeParams, PhasePoint, Slope,
};
use capcone::integrate::{shoot, ShotSpec, Tolerance};
use proptest::prelude::*;

const PAIRS: [(u32, u32); 6] = [(4, 2), (5, 2), (5, 3), (6, 2), (6, 3), (6, 4)];

fn pair() -> impl Strategy<Value = ConeParams> {
    (0..PAIRS.len()).prop_map(|i| ConeParams::new(PAIRS[i].0, PAIRS[i].1).unwrap())
}

fn state() -> impl Strategy<Value = PhasePoint> {
    (0.02f64..0.98, 0.0f64..2.0, -5.0f64..5.0).prop_map(|(t, f, fp)| PhasePoint::new(t, f, fp))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn involution_maps_solutions_to_solutions(p in pair(), pt in state()) {
        let fpp = rhs_capillary(&p, &pt).unwrap();
        let s = pt.t;
        let q = involute_point(&pt);
        let gpp = (q.t * q.t / (s * s)) * fpp - pt.fp / (s * s * s);
        let r = relative_residual(&p.involuted(), q.t, q.f, q.fp, gpp).unwrap();
        prop_assert!(r < 1e-10, "residual {r}");
    }

    #[test]
    fn involution_is_an_involution(pt in state()) {
        let back = involute_point(&involute_point(&pt));
        prop_assert!((back.t - pt.t).abs() < 1e-12);
        prop_assert!((back.fp - pt.fp).abs() < 1e-9 * (1.0 + pt.fp.abs()));
    }

    #[test]
    fn involution_preserves_contact_angle(t in 0.05f64..0.95, m in 0.0f64..100.0) {
        let s = (1.0 - t * t).sqrt();
        let a = contact_angle(t, Slope::Finite(m));
        let b = contact_angle(s, involute_slope(t, Slope::Finite(m)));
        prop_assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }

    #[test]
    fn lambda_rescaling_maps_solutions(p in pair(), pt in state(), r in 0.1f64..10.0) {
        let fpp = rhs_capillary(&p, &pt).unwrap();
        let q = rescale_point(&pt, r * r).unwrap();
        let pr = rescale_params(&p, r * r).unwrap();
        let res = relative_residual(&pr, q.t, q.f, q.fp, fpp / r).unwrap();
        prop_assert!(res < 1e-10, "residual {res}");
    }

    #[test]
    fn linear_equation_is_lambda_zero(p in pair(), pt in state()) {
        let lin = ConeParams::linear(p.n(), p.k()).unwrap();
        let a = rhs_linear(&lin, &pt).unwrap();
        let b = rhs_capillary(&lin, &pt).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()) / (1.0 - pt.t * pt.t));
    }

    #[test]
    fn contact_angle_monotone_in_slope(t in 0.01f64..0.99, m in 0.0f64..50.0, dm in 1e-3f64..10.0) {
        prop_assert!(contact_angle(t, Slope::Finite(m + dm)) > contact_angle(t, Slope::Finite(m)));
        prop_assert!(contact_angle(t, Slope::Finite(m)) < contact_angle(t, Slope::PosInf));
    }

    #[test]
    fn slope_json_round_trip(v in prop_oneof![Just(f64::INFINITY), Just(f64::NEG_INFINITY), -1e6f64..1e6]) {
        let s = Slope::from_f64(v);
        let back: Slope = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        prop_assert_eq!(back, s);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn returning_shots_straddle_sqrt_alpha(p in pair(), u in 0.05f64..0.95, m in prop_oneof![Just(f64::INFINITY), 0.1f64..100.0]) {
        let t1 = u * p.sqrt_alpha();
        let shot = shoot(&ShotSpec::new(p, t1, Slope::from_f64(m)), Tolerance::default()).unwrap();
        if let capcone::integrate::ShotEnd::Zero { t2, .. } = shot.end {
            prop_assert!(t2 > p.sqrt_alpha() && t2 < 1.0, "t2 = {t2}");
            prop_assert!(shot.traj.max_f() <= 2.0 / (p.n() as f64).sqrt() + 1e-8);
        }
    }
}

#[test]
fn coefficient_vanishes_at_sqrt_alpha() {
    for (n, k) in PAIRS {
        let p = ConeParams::new(n, k).unwrap();
        assert_relative_eq!(capcone::equation::coeff_a(&p, p.sqrt_alpha()).unwrap(), 0.0, epsilon = 1e-15);
    }
}
