use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, FRAC_PI_6};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use capcone::equation::ConeParams;
use capcone::exec::{lin_grid, log_grid, Exec};
use capcone::geom::{self, fmt_num};
use capcone::integrate::Tolerance;
use capcone::profile::ConeProfile;
use capcone::shoot::{self, FamilyPoint, RIGHT_ANGLE_TOL};
use capcone::verify::{run_suite, Suite};
use clap::{Parser, Subcommand};
use serde::Deserialize;

#[derive(Parser, Debug)]
#[command(name = "capcone", version, about = "Capillary and free-boundary minimal cone solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Options,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Cone meeting the boundary at contact angle --theta (radians).
    SolveCone,
    /// Free-boundary cone and its doubled profile.
    FreeBoundary,
    /// Symmetric (2k, k) family over an amplitude grid.
    Family,
    /// Per-angle cones over a grid of contact angles.
    SweepTheta,
    /// Run a named verification suite and print its JSON report.
    Verify,
}

#[derive(clap::Args, Debug, Default)]
struct Options {
    #[arg(long, global = true)]
    n: Option<u32>,
    #[arg(long, global = true)]
    k: Option<u32>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    theta: Option<f64>,
    /// Upper amplitude of the family sweep.
    #[arg(long, global = true)]
    a: Option<f64>,
    #[arg(long, global = true)]
    lambda: Option<f64>,
    /// Grid size for sweeps, sample count for exports.
    #[arg(long, global = true)]
    points: Option<usize>,
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long, global = true)]
    tol_abs: Option<f64>,
    #[arg(long, global = true)]
    tol_rel: Option<f64>,
    #[arg(long, global = true, env = "CAPCONE_OUT")]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    suite: Option<String>,
    /// JSON file with defaults for any of the flags above.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

/// Optional defaults read from --config; flags take precedence.
#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
struct RunConfig {
    command: Option<String>,
    n: Option<u32>,
    k: Option<u32>,
    theta: Option<f64>,
    a: Option<f64>,
    lambda: Option<f64>,
    points: Option<usize>,
    jobs: Option<usize>,
    tol_abs: Option<f64>,
    tol_rel: Option<f64>,
    out: Option<PathBuf>,
    seed: Option<u64>,
    suite: Option<String>,
}

#[derive(Debug)]
enum Failure {
    Argument(String),
    Solver(String),
    Verification(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Argument(_) => 2,
            Failure::Solver(_) => 3,
            Failure::Verification(_) => 4,
        }
    }

    fn json(&self) -> String {
        let (kind, msg) = match self {
            Failure::Argument(m) => ("argument", m),
            Failure::Solver(m) => ("solver", m),
            Failure::Verification(m) => ("verification", m),
        };
        serde_json::json!({ "error": kind, "code": self.code(), "message": msg }).to_string()
    }
}

impl From<capcone::Error> for Failure {
    fn from(e: capcone::Error) -> Self {
        match e {
            capcone::Error::InvalidParams(_) | capcone::Error::Domain { .. } => Failure::Argument(e.to_string()),
            e => Failure::Solver(e.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// Flags merged over the optional config file, validated before any solve.
struct Run {
    opts: Options,
    tol: Tolerance,
}

impl Run {
    fn new(mut opts: Options, command: Command) -> CliResult<Run> {
        if let Some(path) = &opts.config {
            let text = fs::read_to_string(path).map_err(|e| Failure::Argument(format!("{}: {e}", path.display())))?;
            let cfg: RunConfig = serde_json::from_str(&text)
                .map_err(|e| Failure::Argument(format!("{}: {e}", path.display())))?;
            if let Some(c) = &cfg.command {
                if c != command_name(command) {
                    return Err(Failure::Argument(format!(
                        "config is for command {c:?}, not {:?}",
                        command_name(command)
                    )));
                }
            }
            opts.n = opts.n.or(cfg.n);
            opts.k = opts.k.or(cfg.k);
            opts.theta = opts.theta.or(cfg.theta);
            opts.a = opts.a.or(cfg.a);
            opts.lambda = opts.lambda.or(cfg.lambda);
            opts.points = opts.points.or(cfg.points);
            opts.jobs = opts.jobs.or(cfg.jobs);
            opts.tol_abs = opts.tol_abs.or(cfg.tol_abs);
            opts.tol_rel = opts.tol_rel.or(cfg.tol_rel);
            opts.out = opts.out.or(cfg.out);
            opts.seed = opts.seed.or(cfg.seed);
            opts.suite = opts.suite.or(cfg.suite);
        }
        let mut tol = Tolerance::default();
        for (v, slot, name) in [(opts.tol_abs, &mut tol.abs, "tol-abs"), (opts.tol_rel, &mut tol.rel, "tol-rel")] {
            if let Some(v) = v {
                if !(v > 0.0 && v < 1.0) {
                    return Err(Failure::Argument(format!("--{name} = {v} must lie in (0, 1)")));
                }
                *slot = v;
            }
        }
        if opts.points == Some(0) {
            return Err(Failure::Argument("--points must be positive".into()));
        }
        if opts.jobs == Some(0) {
            return Err(Failure::Argument("--jobs must be positive".into()));
        }
        Ok(Run { opts, tol })
    }

    fn params(&self) -> CliResult<ConeParams> {
        let n = self.opts.n.ok_or_else(|| Failure::Argument("--n is required".into()))?;
        let k = self.opts.k.ok_or_else(|| Failure::Argument("--k is required".into()))?;
        let p = ConeParams::new(n, k)?;
        Ok(match self.opts.lambda {
            Some(l) => p.with_lambda(l)?,
            None => p,
        })
    }

    fn k_only(&self) -> CliResult<u32> {
        let k = self.opts.k.ok_or_else(|| Failure::Argument("--k is required".into()))?;
        ConeParams::new(2 * k, k)?;
        Ok(k)
    }

    fn points(&self, default: usize) -> usize {
        self.opts.points.unwrap_or(default)
    }

    fn out_dir(&self) -> CliResult<PathBuf> {
        let dir = self.opts.out.clone().unwrap_or_else(|| PathBuf::from("."));
        fs::create_dir_all(&dir).map_err(|e| Failure::Solver(format!("{}: {e}", dir.display())))?;
        Ok(dir)
    }
}

fn command_name(c: Command) -> &'static str {
    match c {
        Command::SolveCone => "solve-cone",
        Command::FreeBoundary => "free-boundary",
        Command::Family => "family",
        Command::SweepTheta => "sweep-theta",
        Command::Verify => "verify",
    }
}

const EXPORT_SAMPLES: usize = 200;

fn write_profile(profile: &ConeProfile, dir: &Path, stem: &str) -> CliResult<()> {
    geom::export_profile_json(profile, EXPORT_SAMPLES, &dir.join(format!("{stem}.json")))?;
    geom::export_profile_csv(profile, EXPORT_SAMPLES, &dir.join(format!("{stem}.csv")))?;
    Ok(())
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| Failure::Solver(format!("{}: {e}", path.display())))
}

fn summary(p: &ConeProfile) -> String {
    format!("{:.12} {:.12} {:.12} {:.3e}", p.t1, p.t2, p.theta, p.validate().residual)
}

fn free_boundary(run: &Run, params: &ConeParams) -> CliResult<String> {
    let profile = shoot::solve_free_boundary_with(params, run.tol, Exec::default())?;
    let dir = run.out_dir()?;
    let stem = format!("free_boundary_{}_{}", params.n(), params.k());
    write_profile(&profile, &dir, &stem)?;
    let doubled = geom::double(&profile, run.points(EXPORT_SAMPLES))?;
    let text = serde_json::to_string_pretty(&doubled).map_err(|e| Failure::Solver(e.to_string()))?;
    write_text(&dir.join(format!("{stem}_doubled.json")), &text)?;
    Ok(format!(
        "{} p={} q={}",
        summary(&profile),
        params.n() - params.k() - 1,
        params.k() - 1
    ))
}

fn solve_cone(run: &Run) -> CliResult<String> {
    let params = run.params()?;
    let theta = run.opts.theta.ok_or_else(|| Failure::Argument("--theta is required".into()))?;
    if (theta - std::f64::consts::FRAC_PI_2).abs() <= RIGHT_ANGLE_TOL {
        return free_boundary(run, &params);
    }
    if !(theta > 0.0 && theta < std::f64::consts::FRAC_PI_2) {
        return Err(Failure::Argument(format!("--theta = {theta} must lie in (0, pi/2]")));
    }
    let profile = shoot::solve_capillary_cone_with(&params, theta, run.tol, Exec::default())?;
    write_profile(&profile, &run.out_dir()?, &format!("cone_{}_{}", params.n(), params.k()))?;
    Ok(summary(&profile))
}

const TARGET_ANGLES: [f64; 3] = [FRAC_PI_6, FRAC_PI_4, FRAC_PI_3];

fn family(run: &Run) -> CliResult<String> {
    let k = run.k_only()?;
    let a_star = shoot::find_a_star(k)?;
    let top = run.opts.a.unwrap_or(a_star * (1.0 - 1e-6));
    if !(top > 1e-3) {
        return Err(Failure::Argument(format!("--a = {top} must exceed 1e-3")));
    }
    let amps = log_grid(1e-3, top, run.points(40));
    let rows = shoot::sweep_symmetric(k, &amps, Exec::default());
    let mut out = String::new();
    let mut points: Vec<FamilyPoint> = Vec::new();
    for (a, r) in amps.iter().zip(rows) {
        match r {
            Ok(p) => points.push(p),
            Err(e) => {
                let _ = writeln!(out, "a={} failed: {e}", fmt_num(*a));
                points.push(FamilyPoint {
                    a: *a,
                    theta: None,
                    t1: None,
                    t2: None,
                });
            }
        }
    }
    let dir = run.out_dir()?;
    geom::export_family_csv(&points, &dir.join(format!("family_k{k}.csv")))?;

    let stride = (amps.len() / 8).max(1);
    let picks: Vec<f64> = amps.iter().step_by(stride).copied().collect();
    let mut profiles: Vec<ConeProfile> = Exec::default()
        .map(&picks, |&a| shoot::solve_symmetric_family(k, a))
        .into_iter()
        .filter_map(|r| r.ok().flatten())
        .collect();
    if let Ok((_, p)) = shoot::a_star_profile(k) {
        profiles.push(p);
    }
    geom::plot_svg(&profiles, &dir.join(format!("family_k{k}.svg")))?;

    let thetas: Vec<f64> = points.iter().filter_map(|p| p.theta).collect();
    let hi = thetas.iter().cloned().fold(0.0, f64::max);
    let _ = write!(out, "a_star={} bound={}", fmt_num(a_star), fmt_num(2.0 / (k as f64).sqrt()));
    for th in TARGET_ANGLES {
        let _ = write!(out, " covers({:.6})={}", th, th <= hi);
    }
    Ok(out)
}

fn sweep_theta(run: &Run) -> CliResult<String> {
    let params = run.params()?;
    let thetas = lin_grid(0.1, 1.5, run.points(15));
    let tol = run.tol;
    let rows = Exec::default().map(&thetas, |&th| shoot::solve_capillary_cone_with(&params, th, tol, Exec::Sequential));
    let mut csv = String::from("theta,t1,t2,residual,error\n");
    let mut profiles = Vec::new();
    let mut failed = 0;
    for (th, r) in thetas.iter().zip(rows) {
        match r {
            Ok(p) => {
                let _ = writeln!(
                    csv,
                    "{},{},{},{},",
                    fmt_num(*th),
                    fmt_num(p.t1),
                    fmt_num(p.t2),
                    fmt_num(p.validate().residual)
                );
                profiles.push(p);
            }
            Err(e) => {
                failed += 1;
                let msg = e.to_string().replace([',', '\n'], ";");
                let _ = writeln!(csv, "{},nan,nan,nan,{msg}", fmt_num(*th));
            }
        }
    }
    if let Ok(p) = shoot::solve_free_boundary_with(&params, tol, Exec::default()) {
        profiles.push(p);
    }
    let dir = run.out_dir()?;
    let stem = format!("sweep_{}_{}", params.n(), params.k());
    write_text(&dir.join(format!("{stem}.csv")), &csv)?;
    geom::plot_svg(&profiles, &dir.join(format!("{stem}.svg")))?;
    Ok(format!("solved={} failed={failed}", thetas.len() - failed))
}

fn verify(run: &Run) -> CliResult<String> {
    let name = run.opts.suite.as_deref().ok_or_else(|| Failure::Argument("--suite is required".into()))?;
    let suite: Suite = name.parse().map_err(Failure::Argument)?;
    let report = run_suite(suite, run.opts.seed.unwrap_or(0));
    let json = report.to_json();
    if let Some(dir) = &run.opts.out {
        fs::create_dir_all(dir).map_err(|e| Failure::Solver(format!("{}: {e}", dir.display())))?;
        write_text(&dir.join(format!("verify_{name}.json")), &json)?;
    }
    print!("{json}");
    if report.passed {
        Ok(String::new())
    } else {
        let names: Vec<&str> = report.failures().map(|c| c.name.as_str()).collect();
        Err(Failure::Verification(format!("failed checks: {}", names.join(", "))))
    }
}

fn execute(cli: Cli) -> CliResult<String> {
    let run = Run::new(cli.opts, cli.command)?;
    if let Some(j) = run.opts.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .map_err(|e| Failure::Argument(e.to_string()))?;
    }
    match cli.command {
        Command::SolveCone => solve_cone(&run),
        Command::FreeBoundary => free_boundary(&run, &run.params()?),
        Command::Family => family(&run),
        Command::SweepTheta => sweep_theta(&run),
        Command::Verify => verify(&run),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let f = Failure::Argument(e.to_string().trim().to_string());
            eprintln!("{}", f.json());
            return ExitCode::from(f.code());
        }
    };
    match execute(cli) {
        Ok(line) => {
            if !line.is_empty() {
                println!("{line}");
            }
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("{}", f.json());
            ExitCode::from(f.code())
        }
    }
}
