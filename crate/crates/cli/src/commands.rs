use std::ffi::OsString;
use std::path::{Path, PathBuf};

use cbf_core::assimilation::{assimilate, generate_twin_data, recovery_error, TwinSettings};
use cbf_core::control::{optimize, Termination};
use cbf_core::forward::{solve_forward_observed, Model};
use cbf_core::verify::run_verification;
use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::fieldfile::{save_fields, save_trajectory};
use crate::output::{format_checks, write_checks_csv, write_energy_csv, write_optim_csv};

#[derive(Debug, Parser)]
#[command(name = "cbf", version, about = "Brinkman-Forchheimer solver and adjoint optimal control")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the invariant suite and print a pass/fail table.
    Verify(Common),
    /// Solve the state equation; writes trajectory.cbf and energy.csv.
    Simulate(Common),
    /// Solve the distributed-control problem; writes optim.csv and control.cbf.
    Optimize(Common),
    /// Twin-data initial-state recovery; writes optim.csv and initial.cbf.
    Assimilate(Common),
    /// Print the default configuration.
    DefaultConfig,
}

#[derive(Debug, Args)]
struct Common {
    /// TOML configuration; defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, default_value = "cbf-out")]
    out: PathBuf,
    /// Overrides the configuration seed.
    #[arg(long)]
    seed: Option<u64>,
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// exit status: 0 success, 1 failed checks or runtime error, 2 bad
/// configuration or usage, 3 numerical blowup.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command) -> CliResult<i32> {
    match command {
        Command::Verify(c) => verify(&prepare(&c)?, &c.out),
        Command::Simulate(c) => simulate(&prepare(&c)?, &c.out),
        Command::Optimize(c) => run_optimize(&prepare(&c)?, &c.out),
        Command::Assimilate(c) => run_assimilate(&prepare(&c)?, &c.out),
        Command::DefaultConfig => {
            let text = toml::to_string_pretty(&RunConfig::default()).map_err(|e| CliError::Config(e.to_string()))?;
            print!("{text}");
            Ok(0)
        }
    }
}

fn prepare(c: &Common) -> CliResult<RunConfig> {
    let mut cfg = match &c.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = c.seed {
        cfg.seed = seed;
        cfg.validate()?;
    }
    std::fs::create_dir_all(&c.out).map_err(|e| CliError::io(&c.out, e))?;
    Ok(cfg)
}

fn verify(cfg: &RunConfig, out: &Path) -> CliResult<i32> {
    let checks = run_verification(&cfg.verify_config())?;
    print!("{}", format_checks(&checks));
    write_checks_csv(&out.join("verify.csv"), &checks)?;
    Ok(if checks.iter().all(|c| c.passed) { 0 } else { 1 })
}

fn simulate(cfg: &RunConfig, out: &Path) -> CliResult<i32> {
    let model: Model = cfg.model()?;
    let time = cfg.time_grid()?;
    let u0 = cfg.field(&cfg.initial)?;
    let (traj, ledger) = solve_forward_observed(&u0, &model, &[], time, cfg.output.checkpoint_stride, |_, _| {})?;
    save_trajectory(&out.join("trajectory.cbf"), &traj)?;
    write_energy_csv(&out.join("energy.csv"), &ledger)?;
    println!(
        "simulated {} steps; final energy {:.6e}, energy residual {:.3e}",
        time.steps(),
        traj.final_state().norm_h().powi(2),
        ledger.final_residual()
    );
    Ok(0)
}

fn run_optimize(cfg: &RunConfig, out: &Path) -> CliResult<i32> {
    let problem = cfg.control_problem()?;
    let report = optimize(&problem, problem.zero_decision(), &cfg.optimizer())?;
    write_optim_csv(&out.join("optim.csv"), &report)?;
    save_fields(
        &out.join("control.cbf"),
        &report.optimum,
        problem.time.dt(),
        1,
        problem.time.steps(),
    )?;
    summarize(&report.termination, report.iterations, report.costs[0], report.final_cost());
    Ok(0)
}

fn run_assimilate(cfg: &RunConfig, out: &Path) -> CliResult<i32> {
    let model = cfg.model()?;
    let time = cfg.time_grid()?;
    let truth = cfg.field(&cfg.assimilation.truth)?;
    let twin = TwinSettings {
        noise_level: cfg.assimilation.noise_level,
        seed: cfg.seed,
    };
    let data = generate_twin_data(&truth, &model, time, twin, cfg.assimilation.weights)?;
    let (estimate, report) = assimilate(&data, &model, time, &cfg.optimizer(), None)?;
    write_optim_csv(&out.join("optim.csv"), &report)?;
    save_fields(&out.join("initial.cbf"), std::slice::from_ref(&estimate), time.dt(), 1, 0)?;
    summarize(&report.termination, report.iterations, report.costs[0], report.final_cost());
    println!("relative recovery error {:.4e}", recovery_error(&estimate, &truth));
    Ok(0)
}

fn summarize(termination: &Termination, iterations: usize, first: f64, last: f64) {
    println!("{termination:?} after {iterations} iterations; cost {first:.6e} -> {last:.6e}");
}
