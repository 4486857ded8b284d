//! Command-line surface: `lvfb <command> [--config] [--out] [--jobs] [--resume]`.
//!
//! Exit codes: 0 ok, 2 numerical failure, 3 configuration error, 4 no result
//! (no threshold, no bracket, no witness).

pub mod checkpoint;
pub mod config;
pub mod plots;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::barriers::search_mu0;
use crate::classifier::{classify_record, find_mu_star_resumable, mu_s0_plan, sweep, write_sweep_csv, Classification};
use crate::error::{Error, Result};
use crate::model::{classify_regime, coexistence_limit, lambda_threshold, InitSpec, ProblemKind, Regime};
use crate::odelimits::{integrate_ode, iterate_bounds, write_iteration_csv, write_trajectory_csv, OdeState};
use crate::solver::{write_run_dir, RunOptions, RunRecord, Simulation};
use crate::steady::{build_barriers, check_sandwich};

use checkpoint::{Checkpoint, ThresholdCheckpoint, RUN_CHECKPOINT_FILE, THRESHOLD_CHECKPOINT_FILE};
use config::InitSection;
pub use config::RunConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NUMERIC: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_NO_RESULT: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "lvfb",
    version,
    about = "Free-boundary Lotka-Volterra competition laboratory"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON configuration; missing keys take their defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `output.dir`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for parallel stages.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Checkpoint to continue from (`simulate`, `threshold`).
    #[arg(long, global = true)]
    pub resume: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Run to `grid.t_max` and write series, profiles, metadata and verdict.
    Simulate,
    /// Run until the verdict is settled and write it.
    Classify,
    /// Bracket the critical front coefficient.
    Threshold,
    /// Steady barrier profiles, optionally checked against a DFB run.
    Steady,
    /// Kinetic ODE trajectory and the bound iteration.
    Ode,
    /// Search for a vanishing super-solution certificate (DFB).
    Barrier,
    /// Classify a grid of (mu, s0) pairs.
    Sweep,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Precondition(_) | Error::Json(_) => EXIT_CONFIG,
        Error::NoThreshold { .. } | Error::NoBracket(_) | Error::NoWitness(_) => EXIT_NO_RESULT,
        _ => EXIT_NUMERIC,
    }
}

/// Parses `args`, runs the command and returns the process exit code.
/// Environment overrides are read from `vars`.
pub fn main_with<I, T>(args: I, vars: impl IntoIterator<Item = (String, String)>) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli, vars) {
        Ok(out) => {
            println!("wrote {}", out.display());
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Loads and validates the configuration, then runs the command on a thread
/// pool of `--jobs` workers. Returns the output directory.
pub fn execute(cli: &Cli, vars: impl IntoIterator<Item = (String, String)>) -> Result<PathBuf> {
    let mut cfg = RunConfig::load(cli.config.as_deref(), vars)?;
    if let Some(out) = &cli.out {
        cfg.output.dir = out.clone();
    }
    if cli.resume.is_some() && !matches!(cli.command, Command::Simulate | Command::Threshold) {
        return Err(Error::Config("--resume applies to simulate and threshold only".into()));
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(Error::Config("--jobs must be at least 1".into()));
        }
        pool = pool.num_threads(jobs);
    }
    let pool = pool.build().map_err(|e| Error::Config(e.to_string()))?;
    let out = cfg.output.dir.clone();
    let resume = cli.resume.as_deref();
    pool.install(|| match cli.command {
        Command::Simulate => cmd_simulate(&cfg, resume, false),
        Command::Classify => cmd_simulate(&cfg, None, true),
        Command::Threshold => cmd_threshold(&cfg, resume),
        Command::Steady => cmd_steady(&cfg),
        Command::Ode => cmd_ode(&cfg),
        Command::Barrier => cmd_barrier(&cfg),
        Command::Sweep => cmd_sweep(&cfg),
    })?;
    Ok(out)
}

fn write_json<T: Serialize + ?Sized>(value: &T, path: &Path) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)?)?;
    Ok(())
}

fn failure_error(record: &RunRecord) -> Result<()> {
    match &record.failure {
        Some(f) => Err(Error::Consistency(format!("solver failure: {f}"))),
        None => Ok(()),
    }
}

/// `simulate` runs the full horizon and leaves a checkpoint; `classify`
/// (`settle = true`) stops once spreading is certified.
pub fn cmd_simulate(cfg: &RunConfig, resume: Option<&Path>, settle: bool) -> Result<()> {
    let init = cfg.validate_run(&cfg.params)?;
    let hash = cfg.physics_hash()?;
    let out = &cfg.output.dir;
    let kind = cfg.kind();
    let lambda = lambda_threshold(&cfg.params, kind);

    let mut sim = match resume {
        Some(path) => {
            let cp = checkpoint::load_run(path, &hash)?;
            let mut record = cp.resumable_record();
            record.grid.t_max = cfg.grid.t_max;
            if cp.state.step > record.grid.total_steps() {
                return Err(Error::Config(format!(
                    "checkpoint at t = {} lies beyond t_max",
                    cp.state.t
                )));
            }
            Simulation::resume(cp.state, record)
        }
        None => Simulation::new(cfg.params, kind, &init, cfg.grid)?,
    };
    let opts = RunOptions {
        stop_above: settle.then_some(lambda),
    };
    sim.run(&opts);
    fs::create_dir_all(out)?;
    if !settle {
        checkpoint::save(
            &Checkpoint::new(hash, sim.state.clone(), sim.record.clone()),
            &out.join(RUN_CHECKPOINT_FILE),
        )?;
    }
    let record = sim.into_record();
    write_run_dir(&record, out)?;
    if cfg.output.plots {
        plots::plot_front(&record, lambda, &out.join("front.svg"))?;
        if let Some(snap) = record.final_snapshot() {
            plots::plot_profiles(snap, &out.join("profiles.svg"))?;
        }
    }
    failure_error(&record)?;
    let verdict: Classification = classify_record(&record, &cfg.classify)?;
    write_json(&verdict, &out.join("classification.json"))?;
    println!("{}: {}", kind, verdict.verdict);
    Ok(())
}

pub fn cmd_threshold(cfg: &RunConfig, resume: Option<&Path>) -> Result<()> {
    let init = cfg.validate_threshold()?;
    let hash = cfg.physics_hash()?;
    let out = &cfg.output.dir;
    let kind = cfg.kind();
    let lambda = lambda_threshold(&cfg.params, kind);
    if cfg.params.s0 >= lambda {
        return Err(Error::NoThreshold {
            s0: cfg.params.s0,
            lambda,
        });
    }
    let start = match resume {
        Some(path) => Some(checkpoint::load_threshold(path, &hash)?.bracket),
        None => None,
    };
    fs::create_dir_all(out)?;
    let cp_path = out.join(THRESHOLD_CHECKPOINT_FILE);
    let mut save_error = None;
    let result = find_mu_star_resumable(&cfg.params, kind, &init, &cfg.grid, &cfg.search(), start, |b| {
        let cp = ThresholdCheckpoint {
            version: checkpoint::CHECKPOINT_VERSION,
            config_hash: hash.clone(),
            bracket: b.clone(),
        };
        if let Err(e) = checkpoint::save(&cp, &cp_path) {
            save_error.get_or_insert(e);
        }
    });
    if let Some(e) = save_error {
        return Err(e);
    }
    let bracket = result?;
    write_json(&bracket, &out.join("bracket.json"))?;
    println!("mu* in [{}, {}]", bracket.mu_lo, bracket.mu_hi);
    Ok(())
}

pub fn cmd_steady(cfg: &RunConfig) -> Result<()> {
    cfg.validate_steady()?;
    let out = &cfg.output.dir;
    let grid = &cfg.steady.grid;
    let barriers = build_barriers(&cfg.params, grid)?;
    fs::create_dir_all(out)?;
    barriers.write_csv(&out.join("barriers.csv"))?;
    let sw = &cfg.steady.sandwich;
    let x_max = if sw.enabled { sw.window.1 } else { grid.length.min(10.0) };
    if cfg.output.plots {
        plots::plot_barriers(&barriers, None, x_max, &out.join("barriers.svg"))?;
    }
    if sw.enabled {
        let init = cfg.validate_run(&cfg.params)?;
        let mut sim = Simulation::new(cfg.params, ProblemKind::Dfb, &init, cfg.grid)?;
        sim.run(&RunOptions::default());
        let record = sim.into_record();
        let run_dir = out.join("run");
        write_run_dir(&record, &run_dir)?;
        failure_error(&record)?;
        let report = check_sandwich(&record, &barriers, sw.window, sw.slack)?;
        write_json(&report, &out.join("sandwich.json"))?;
        if cfg.output.plots {
            plots::plot_barriers(&barriers, record.final_snapshot(), x_max, &out.join("sandwich.svg"))?;
        }
        println!("sandwich {}", if report.passed { "holds" } else { "violated" });
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct OdeSummary {
    regime: Regime,
    limit: Option<(f64, f64)>,
    final_state: OdeState,
    distance_to_limit: Option<f64>,
}

pub fn cmd_ode(cfg: &RunConfig) -> Result<()> {
    cfg.validate_ode()?;
    let out = &cfg.output.dir;
    let o = &cfg.ode;
    let traj = integrate_ode(&cfg.params, o.u0, o.v0, o.t_max)?;
    fs::create_dir_all(out)?;
    write_trajectory_csv(&traj, &out.join("trajectory.csv"))?;
    let last = *traj.last().unwrap();
    let limit = coexistence_limit(&cfg.params).ok();
    let summary = OdeSummary {
        regime: classify_regime(&cfg.params),
        limit,
        final_state: last,
        distance_to_limit: limit.map(|(u, v)| (last.u - u).abs().max((last.v - v).abs())),
    };
    write_json(&summary, &out.join("ode.json"))?;
    let (h, k) = (cfg.params.h, cfg.params.k);
    if 0.0 < h && h < 1.0 && k >= 1.0 && o.iterations > 0 {
        write_iteration_csv(&iterate_bounds(h, k, o.iterations)?, &out.join("iteration.csv"))?;
    }
    Ok(())
}

pub fn cmd_barrier(cfg: &RunConfig) -> Result<()> {
    let init = cfg.validate_barrier()?;
    let lambda = lambda_threshold(&cfg.params, ProblemKind::Dfb);
    if cfg.params.s0 >= lambda {
        return Err(Error::NoWitness(format!(
            "s0 = {} >= lambda = {lambda}: no vanishing super-solution exists",
            cfg.params.s0
        )));
    }
    let (mu0, cert) = search_mu0(&cfg.params, ProblemKind::Dfb, &init, &cfg.barrier)?;
    fs::create_dir_all(&cfg.output.dir)?;
    write_json(&cert, &cfg.output.dir.join("certificate.json"))?;
    println!("mu0 = {mu0}, front bound {} < lambda = {lambda}", cert.front_bound);
    Ok(())
}

pub fn cmd_sweep(cfg: &RunConfig) -> Result<()> {
    cfg.validate_sweep()?;
    let spec = match &cfg.init {
        InitSection::Auto { amplitude, amplitude_v } => InitSpec::Auto {
            amplitude: *amplitude,
            amplitude_v: *amplitude_v,
        },
        InitSection::Table { .. } => unreachable!("rejected by validate_sweep"),
    };
    let plan = mu_s0_plan(&cfg.params, &cfg.sweep.mus, &cfg.sweep.s0s);
    let rows = sweep(&plan, cfg.kind(), &spec, &cfg.grid, &cfg.classify)?;
    fs::create_dir_all(&cfg.output.dir)?;
    write_sweep_csv(&rows, &cfg.output.dir.join("sweep.csv"))?;
    let failed = rows.iter().filter(|r| r.outcome.is_err()).count();
    println!("{} runs, {failed} failed", rows.len());
    Ok(())
}
