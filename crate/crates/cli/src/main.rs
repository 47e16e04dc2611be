//! Batch front end for the leaky-wire solver.
//!
//! Exit codes: 0 success, 1 invalid configuration or output path,
//! 2 numerical failure.

mod config;
mod tasks;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{ConfigError, RunConfig};
use tasks::{NumericalFailure, Output};

#[derive(Parser)]
#[command(name = "leakywire", version, about = "Scattering and bound states of a deformed leaky wire")]
struct Cli {
    /// Print the defaults table as TOML and exit.
    #[arg(long, global = true)]
    show_defaults: bool,
    #[command(subcommand)]
    task: Option<Task>,
}

#[derive(Subcommand)]
enum Task {
    /// Sweep T and R over energies in the scattering window.
    Scatter(RunArgs),
    /// Generalized eigenfunction on a grid.
    Field(RunArgs),
    /// Bound states below the guided-mode threshold.
    Spectrum(RunArgs),
    /// Compare with the 1D comparison operator for a list of couplings.
    Conjecture(RunArgs),
    /// Kernel oracle chain; writes a JSON report.
    Selftest(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration (optional for `selftest`).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads for sweeps; results do not depend on it.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    jobs: u16,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<ConfigError>().is_some() || err.downcast_ref::<std::io::Error>().is_some() {
        return 1;
    }
    if err.downcast_ref::<NumericalFailure>().is_some() {
        return 2;
    }
    match err.downcast_ref::<leakywire::Error>() {
        Some(leakywire::Error::Domain(_) | leakywire::Error::Geometry(_) | leakywire::Error::Mesh(_)) => 1,
        _ => 2,
    }
}

fn run(task: Task) -> anyhow::Result<()> {
    type Runner = fn(&RunConfig, &Output) -> anyhow::Result<()>;
    let (runner, args, needs_config): (Runner, RunArgs, bool) = match task {
        Task::Scatter(a) => (tasks::scatter, a, true),
        Task::Field(a) => (tasks::field, a, true),
        Task::Spectrum(a) => (tasks::spectrum, a, true),
        Task::Conjecture(a) => (tasks::conjecture, a, true),
        Task::Selftest(a) => (tasks::selftest, a, false),
    };
    let cfg = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None if !needs_config => RunConfig::parse("", ".".as_ref())?,
        None => return Err(ConfigError("--config is required for this task".into()).into()),
    };
    let out = Output::new(&args.out, cfg.hash(), args.jobs.into())?;
    runner(&cfg, &out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.show_defaults {
        print!("{}", config::defaults_toml());
        return ExitCode::SUCCESS;
    }
    let Some(task) = cli.task else {
        eprintln!("no task given; see `leakywire --help`");
        return ExitCode::from(1);
    };
    match run(task) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
