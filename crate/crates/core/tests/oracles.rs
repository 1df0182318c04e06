//! Values frozen from independent mpmath/scipy integrations.

use capcone::phi::{solve_phi, DEFAULT_S_MAX};
use capcone::shoot::{solve_free_boundary, solve_symmetric_family};

#[test]
fn free_boundary_thresholds() {
    let cases = [
        (4, 2, 0.187605416349),
        (5, 2, 0.168539991810),
        (5, 3, 0.372112407522),
        (6, 2, 0.149713339476),
        (6, 3, 0.330980542951),
        (6, 4, 0.488828321550),
    ];
    for (n, k, t1) in cases {
        let p = solve_free_boundary(n, k).unwrap();
        assert!((p.t1 - t1).abs() < 1e-9, "({n},{k}) t1 = {} vs {t1}", p.t1);
    }
}

#[test]
fn symmetric_family_points() {
    let cases = [
        (2, 0.05, 0.9936649267307055, 0.2691774114065201),
        (2, 0.3, 0.9859694726516296, 1.4007600057138117),
        (3, 0.1, 0.9637055363725104, 0.5907587171399007),
    ];
    for (k, a, t2, theta) in cases {
        let p = solve_symmetric_family(k, a).unwrap().unwrap();
        assert!((p.t2 - t2).abs() < 1e-8, "k={k} a={a} t2 = {}", p.t2);
        assert!((p.theta - theta).abs() < 1e-7, "k={k} a={a} theta = {}", p.theta);
    }
}

#[test]
fn phi_limit_values() {
    let cases = [
        (2.0, 2.8388756216490068, 0.7370714570993216),
        (3.0, 3.2216350119875043, 0.5939311933345343),
        (4.0, 3.525462094274728, 0.5108624143029046),
        (8.0, 4.369520661666823, 0.3574455290753315),
    ];
    for (c, s_star, phi0) in cases {
        let sol = solve_phi(c, DEFAULT_S_MAX).unwrap();
        let got = sol.s_star.unwrap();
        assert!((got - s_star).abs() < 1e-8, "c={c} s_star = {got}");
        let (phi, _) = sol.at(0.0).unwrap();
        assert!((phi - phi0).abs() < 1e-9, "c={c} phi(0) = {phi}");
    }
}
