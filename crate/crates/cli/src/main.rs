//! `blowup`: certification, simulation, profile comparison, self-similar
//! scans and the acceptance suite from the command line.
//!
//! Exit status: 0 pass, 1 a check failed, 2 usage or config error,
//! 3 numerical failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use blowup_core::acceptance::{Context, Registry};
use blowup_core::config::ExperimentConfig;
use blowup_core::ode_asym::{ResolventTable, DEFAULT_A0, DEFAULT_TOL};
use blowup_core::pipeline::{self, SelfsimRequest};
use blowup_core::{io, nonlin, selfsim, Error, Result};
use clap::{Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "blowup", version, about = "Numerical laboratory for slowly perturbed exponential blow-up")]
struct Cli {
    /// Experiment config (TOML); `simulate` also takes it positionally.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for artifacts.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for independent runs and scans.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Resolvent quadrature tolerance (single shots: ODE tolerance).
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Slow-variation and resolvent certification of a family.
    Certify {
        family: String,
        /// Family parameter as `key=value`; repeatable.
        #[arg(long = "param", short = 'p')]
        params: Vec<String>,
    },
    /// Run the configured pipeline and write its artifacts.
    Simulate { config: Option<PathBuf> },
    /// Recompute the profile comparison of a finished run.
    Profiles { rundir: PathBuf },
    /// Shoot the self-similar profile equation in dimension `n`.
    Selfsim {
        n: usize,
        /// Scan a in (0, a_max] instead of a single shot.
        #[arg(long)]
        scan: bool,
        /// Central value for a single shot.
        #[arg(long, default_value_t = 1.0)]
        a: f64,
        #[arg(long, default_value_t = 10.0)]
        a_max: f64,
        #[arg(long, default_value_t = 100)]
        points: usize,
        #[arg(long, default_value_t = selfsim::DEFAULT_R_MAX)]
        r_max: f64,
    },
    /// Run the acceptance suite.
    Accept {
        /// Restrict to these criterion ids.
        #[arg(long)]
        only: Vec<usize>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.jobs == 0 {
        eprintln!("error: --jobs must be at least 1");
        return ExitCode::from(2);
    }
    if let Some(t) = cli.tol {
        if !(t > 0.0 && t < 1e-3) {
            eprintln!("error: --tol {t} outside (0, 1e-3)");
            return ExitCode::from(2);
        }
    }
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(3);
        }
    };
    match pool.install(|| dispatch(&cli)) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

/// Runs the command; `Ok(false)` means a check failed.
fn dispatch(cli: &Cli) -> Result<bool> {
    let parallel = cli.jobs > 1;
    match &cli.command {
        Command::Certify { family, params } => certify(cli, family, params),
        Command::Simulate { config } => {
            let path = config
                .as_ref()
                .or(cli.config.as_ref())
                .ok_or_else(|| Error::config("config", "simulate needs a config path"))?;
            simulate(cli, path)
        }
        Command::Profiles { rundir } => profiles(cli, rundir),
        Command::Selfsim {
            n,
            scan,
            a,
            a_max,
            points,
            r_max,
        } => {
            let req = SelfsimRequest {
                n: *n,
                scan: *scan,
                a: *a,
                a_max: *a_max,
                points: *points,
                r_max: *r_max,
            };
            run_selfsim(cli, &req, parallel)
        }
        Command::Accept { only } => accept(cli, only, parallel),
    }
}

fn certify(cli: &Cli, family: &str, params: &[String]) -> Result<bool> {
    let mut p = nonlin::Params::parse_pairs(params)?;
    let mut a0 = DEFAULT_A0;
    let mut tol = DEFAULT_TOL;
    if let Some(path) = &cli.config {
        let cfg = ExperimentConfig::load(path)?;
        if cfg.family.name == family {
            let mut merged = cfg.family.params.clone();
            merged.0.extend(p.0);
            p = merged;
        }
        a0 = cfg.solver.a0;
        tol = cfg.solver.tol;
    }
    let tol = cli.tol.unwrap_or(tol);
    let fam = nonlin::make_builtin(family, &p)?;
    let label = fam.label();
    let table = Arc::new(ResolventTable::new(fam, tol, a0)?);
    let report = pipeline::certify(&table)?;
    let hash = io::config_hash(&serde_json::json!({ "certify": label, "tol": tol, "a0": a0 }))?;
    if let Some(dir) = &cli.out {
        io::write_json(&dir.join(format!("certify_{family}.json")), &hash, &report)?;
    }
    println!("{}", serde_json::to_string_pretty(&report)?);
    eprintln!("certify {label}: {}", verdict(report.pass));
    Ok(report.pass)
}

fn simulate(cli: &Cli, path: &Path) -> Result<bool> {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(t) = cli.tol {
        cfg.solver.tol = t;
    }
    let hash = io::config_hash(&cfg)?;
    let out = cli
        .out
        .clone()
        .or_else(|| cfg.output_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("runs").join(&hash[..12]));
    let outcome = pipeline::run_config(&cfg, Some(&out))?;
    let s = &outcome.summary;
    if s.t_est.is_finite() {
        println!("T_est = {:.12e} (ODE bound {:.12e}), {} steps", s.t_est, s.ode_lower_bound, s.steps);
    }
    for c in &s.checks {
        println!("{:<16} {}  {}", format!("{:?}", c.check).to_lowercase(), verdict(c.pass), c.detail);
    }
    println!("artifacts in {}", out.display());
    Ok(s.pass)
}

fn profiles(cli: &Cli, rundir: &Path) -> Result<bool> {
    let (report, hash) = pipeline::profiles_from_rundir(rundir)?;
    let out = cli.out.clone().unwrap_or_else(|| rundir.join("profiles"));
    pipeline::write_comparison(&out.join("comparison.csv"), &hash, &report)?;
    io::write_json(&out.join("profiles.json"), &hash, &report)?;
    let mut pass = true;
    for t in &report.trends {
        println!("{:<13} {:<8} {}  {}", t.kind.as_str(), t.region, verdict(t.pass), t.rule);
    }
    for (kind, region) in pipeline::PROFILE_TRENDS {
        pass &= report.trend(kind, region).is_some_and(|t| t.pass);
    }
    println!("artifacts in {}", out.display());
    Ok(pass)
}

fn run_selfsim(cli: &Cli, req: &SelfsimRequest, parallel: bool) -> Result<bool> {
    let report = if req.scan {
        pipeline::run_selfsim(req, parallel)?
    } else {
        // a single shot honours --tol as the ODE tolerance
        let shot = selfsim::shoot_with(req.n, req.a, req.r_max, cli.tol.unwrap_or(selfsim::DEFAULT_RTOL))?;
        let members = if shot.is_nontrivial_member() {
            vec![pipeline::member_report(&shot)?]
        } else {
            vec![]
        };
        pipeline::SelfsimReport {
            n: req.n,
            scan: None,
            shot: Some(shot),
            members,
            pass: true,
            expectation: "single shot: classification only".into(),
        }
    };
    let hash = io::config_hash(req)?;
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("selfsim"));
    pipeline::write_selfsim(&out, &hash, &report)?;
    if let Some(shot) = &report.shot {
        println!("n = {}, a = {}: {} ({})", req.n, shot.a, shot.class.as_str(), shot.detail);
    }
    if let Some(scan) = &report.scan {
        println!("n = {}: {} transitions, {} members", req.n, scan.transitions.len(), scan.members.len());
    }
    for m in &report.members {
        println!(
            "  member a = {:.12}, min g = {:.4} at r = {:.2}, residual {:.2e}",
            m.a,
            m.sign.g_min,
            m.sign.r_at_min,
            m.residual.unwrap_or(f64::NAN)
        );
    }
    println!("expectation ({}): {}", report.expectation, verdict(report.pass));
    Ok(report.pass)
}

fn accept(cli: &Cli, only: &[usize], parallel: bool) -> Result<bool> {
    let registry = Registry::standard();
    let ctx = Context::new(parallel);
    let ids: Vec<usize> = if only.is_empty() { registry.ids() } else { only.to_vec() };
    let mut results = Vec::new();
    for id in ids {
        let r = registry
            .run_one(id, &ctx)
            .ok_or_else(|| Error::config("--only", format!("no criterion {id}")))?;
        println!("{}", r.line());
        results.push(r);
    }
    let passed = results.iter().filter(|r| r.passed).count();
    println!("{passed}/{} criteria passed", results.len());
    if let Some(dir) = &cli.out {
        let hash = io::config_hash(&serde_json::json!({ "accept": results.iter().map(|r| r.id).collect::<Vec<_>>() }))?;
        io::write_json(&dir.join("acceptance.json"), &hash, &results)?;
    }
    Ok(passed == results.len())
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "pass"
    } else {
        "FAIL"
    }
}
