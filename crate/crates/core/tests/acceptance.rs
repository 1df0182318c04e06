//! One pass/fail line per acceptance criterion.

use std::time::{Duration, Instant};

use capcone::equation::ConeParams;
use capcone::exec::Exec;
use capcone::integrate::Tolerance;
use capcone::shoot::solve_free_boundary_with;
use capcone::verify::{run_suite, Check, Suite, SuiteReport, PAIRS};

const SEED: u64 = 7;
const RUNTIME_LIMIT: Duration = Duration::from_secs(60);

const CRITERIA: [&str; 13] = [
    "free-boundary existence",
    "per-angle cones",
    "involution symmetry",
    "n = 2k self-symmetry",
    "bound at sqrt(alpha)",
    "structure of randomized shots",
    "Bernoulli comparison bounds",
    "vertical-shot well-posedness",
    "phi limit equation",
    "one-phase regime",
    "shallow-angle limit",
    "family completeness",
    "determinism",
];

fn criterion(suite: Suite, name: &str) -> Option<usize> {
    let starts = |p: &str| name.starts_with(p);
    match suite {
        Suite::EndToEnd if starts("free-boundary/") => Some(1),
        Suite::EndToEnd if starts("per-angle/") => Some(2),
        Suite::EndToEnd if starts("shallow") => Some(11),
        Suite::EndToEnd if starts("family") => Some(12),
        Suite::Involution if starts("companion/") => Some(3),
        Suite::Involution => Some(4),
        Suite::Bounds if starts("sqrt-alpha/") => Some(5),
        Suite::Bounds if starts("bernoulli/") => Some(7),
        Suite::Structure => Some(6),
        Suite::CoreIdentities if starts("vertical-launch") => Some(8),
        Suite::PhiLimit => Some(9),
        Suite::OnePhase => Some(10),
        _ => None,
    }
}

fn main() {
    let reports: Vec<SuiteReport> = Suite::ALL.iter().map(|&s| run_suite(s, SEED)).collect();
    let mut by_criterion: Vec<Vec<Check>> = vec![Vec::new(); 14];
    for (suite, report) in Suite::ALL.iter().zip(&reports) {
        for c in &report.checks {
            by_criterion[criterion(*suite, &c.name).unwrap_or(0)].push(c.clone());
        }
    }

    // criterion 1 also bounds the single-threaded solve time per case
    for (n, k) in PAIRS {
        let p = ConeParams::new(n, k).unwrap();
        let start = Instant::now();
        let ok = solve_free_boundary_with(&p, Tolerance::default(), Exec::Sequential).is_ok();
        let secs = start.elapsed().as_secs_f64();
        by_criterion[1].push(Check::at_most(format!("free-boundary/{n}-{k}/seconds"), secs, RUNTIME_LIMIT.as_secs_f64()));
        by_criterion[1].push(Check::holds(format!("free-boundary/{n}-{k}/sequential-solve"), ok));
    }

    for suite in [Suite::CoreIdentities, Suite::Structure, Suite::Bounds] {
        let a = run_suite(suite, SEED).to_json();
        let b = run_suite(suite, SEED).to_json();
        by_criterion[13].push(Check::holds(format!("{suite}/byte-identical"), a == b));
    }

    let mut failed = Vec::new();
    for (i, label) in CRITERIA.iter().enumerate() {
        let checks = &by_criterion[i + 1];
        let bad: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        let ok = !checks.is_empty() && bad.is_empty();
        println!(
            "criterion {:>2} {} {label} ({} checks{})",
            i + 1,
            if ok { "PASS" } else { "FAIL" },
            checks.len(),
            if bad.is_empty() { String::new() } else { format!("; failing: {}", bad.join(", ")) }
        );
        if !ok {
            failed.push(i + 1);
        }
    }
    let aux = &by_criterion[0];
    let aux_bad: Vec<&str> = aux.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    println!(
        "supporting identities {} ({} checks)",
        if aux_bad.is_empty() { "PASS" } else { "FAIL" },
        aux.len()
    );
    if !failed.is_empty() || !aux_bad.is_empty() {
        eprintln!("failing criteria: {failed:?}; failing identities: {aux_bad:?}");
        std::process::exit(1);
    }
}
