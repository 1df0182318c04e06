use std::path::Path;
use std::process::{Command, Output};

fn capcone(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_capcone"))
        .args(args)
        .env("CAPCONE_OUT", dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn error_json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stderr).unwrap_or_else(|_| panic!("stderr: {}", String::from_utf8_lossy(&o.stderr)))
}

/// (t1, t2, theta, residual) from a summary line.
fn summary(o: &Output) -> (f64, f64, f64, f64) {
    let out = stdout(o);
    let v: Vec<f64> = out.split_whitespace().take(4).map(|x| x.parse().unwrap()).collect();
    (v[0], v[1], v[2], v[3])
}

#[test]
fn solve_cone_writes_files_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let o = capcone(dir.path(), &["solve-cone", "--n", "4", "--k", "2", "--theta", "0.7853981634"]);
    assert!(o.status.success(), "{o:?}");
    let (t1, t2, theta, residual) = summary(&o);
    assert!(t1 < 0.5f64.sqrt() && 0.5f64.sqrt() < t2);
    assert!((theta - 0.7853981634).abs() < 1e-12);
    assert!(residual <= 1e-8);
    assert!(dir.path().join("cone_4_2.json").exists());
    let csv = std::fs::read_to_string(dir.path().join("cone_4_2.csv")).unwrap();
    assert!(csv.starts_with("t,f,fp,h,A,theta_left,theta_right\n"));
}

#[test]
fn right_angle_routes_to_free_boundary() {
    let dir = tempfile::tempdir().unwrap();
    let o = capcone(dir.path(), &["solve-cone", "--n", "4", "--k", "2", "--theta", "1.5707963268"]);
    assert!(o.status.success(), "{o:?}");
    assert!(stdout(&o).contains("p=1 q=1"));
    assert!(dir.path().join("free_boundary_4_2.json").exists());
    assert!(dir.path().join("free_boundary_4_2_doubled.json").exists());
}

#[test]
fn k_below_two_is_an_argument_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = capcone(dir.path(), &["solve-cone", "--n", "4", "--k", "1", "--theta", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_json(&o)["error"], "argument");
}

#[test]
fn bad_flags_are_argument_errors() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["solve-cone", "--n", "4", "--k", "2"],
        vec!["solve-cone", "--n", "4", "--k", "2", "--theta", "2.0"],
        vec!["verify", "--suite", "nope"],
        vec!["frobnicate"],
    ] {
        let o = capcone(dir.path(), &args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert_eq!(error_json(&o)["code"], 2);
    }
}

#[test]
fn free_boundary_companions() {
    let dir = tempfile::tempdir().unwrap();
    let a = capcone(dir.path(), &["free-boundary", "--n", "5", "--k", "2"]);
    let b = capcone(dir.path(), &["free-boundary", "--n", "5", "--k", "3"]);
    assert!(a.status.success() && b.status.success());
    assert!(stdout(&a).contains("p=2 q=1"));
    assert!(stdout(&b).contains("p=1 q=2"));
    let (a1, a2, _, _) = summary(&a);
    let (b1, b2, _, _) = summary(&b);
    assert!((b1 - (1.0 - a2 * a2).sqrt()).abs() < 1e-8);
    assert!((b2 - (1.0 - a1 * a1).sqrt()).abs() < 1e-8);

    let c = capcone(dir.path(), &["free-boundary", "--n", "6", "--k", "2"]);
    assert!(c.status.success());
    assert!(summary(&c).3 <= 1e-8);
    let doubled: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("free_boundary_6_2_doubled.json")).unwrap())
            .unwrap();
    assert_eq!(doubled["closed"], true);
}

#[test]
fn family_reports_a_star() {
    let dir = tempfile::tempdir().unwrap();
    let o = capcone(dir.path(), &["family", "--k", "2", "--points", "12"]);
    assert!(o.status.success(), "{o:?}");
    let out = stdout(&o);
    let a_star: f64 = out
        .split_whitespace()
        .find_map(|w| w.strip_prefix("a_star="))
        .unwrap()
        .parse()
        .unwrap();
    assert!(a_star < 2f64.sqrt());
    assert!(out.contains("covers(0.523599)=true"));
    let csv = std::fs::read_to_string(dir.path().join("family_k2.csv")).unwrap();
    assert_eq!(csv.lines().count(), 13);
    assert!(std::fs::read_to_string(dir.path().join("family_k2.svg")).unwrap().starts_with("<svg"));
}

#[test]
fn sweep_theta_records_every_point() {
    let dir = tempfile::tempdir().unwrap();
    let o = capcone(dir.path(), &["sweep-theta", "--n", "5", "--k", "2", "--points", "4", "--jobs", "2"]);
    assert!(o.status.success(), "{o:?}");
    let csv = std::fs::read_to_string(dir.path().join("sweep_5_2.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    assert!(dir.path().join("sweep_5_2.svg").exists());
}

#[test]
fn verify_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = capcone(dir.path(), &["verify", "--suite", "structure", "--seed", "7"]);
    let b = capcone(dir.path(), &["verify", "--suite", "structure", "--seed", "7"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn verify_reports_named_checks() {
    let dir = tempfile::tempdir().unwrap();
    let o = capcone(dir.path(), &["verify", "--suite", "bounds"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("sqrt-alpha/max-excess-over-2-over-sqrt-n"));
    let o = capcone(dir.path(), &["verify", "--suite", "phi-limit"]);
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    for c in ["2", "3", "4"] {
        let name = format!("c-{c}/s-star-found");
        let check = report["checks"].as_array().unwrap().iter().find(|x| x["name"] == name.as_str()).unwrap();
        assert_eq!(check["passed"], true);
    }
}

#[test]
fn config_file_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"command": "solve-cone", "n": 5, "k": 2, "theta": 0.5, "tol_abs": 1e-11}"#).unwrap();
    let o = capcone(dir.path(), &["solve-cone", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{o:?}");
    assert!((summary(&o).2 - 0.5).abs() < 1e-12);
    assert!(dir.path().join("cone_5_2.csv").exists());

    std::fs::write(&cfg, r#"{"n": 5, "bogus": 1}"#).unwrap();
    let o = capcone(dir.path(), &["solve-cone", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn out_flag_overrides_environment() {
    let env_dir = tempfile::tempdir().unwrap();
    let flag_dir = tempfile::tempdir().unwrap();
    let o = capcone(
        env_dir.path(),
        &["free-boundary", "--n", "4", "--k", "2", "--out", flag_dir.path().to_str().unwrap()],
    );
    assert!(o.status.success());
    assert!(flag_dir.path().join("free_boundary_4_2.csv").exists());
    assert!(!env_dir.path().join("free_boundary_4_2.csv").exists());
}
