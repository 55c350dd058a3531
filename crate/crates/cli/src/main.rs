use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dsl_core::runner::{self, ConfigSource, Experiment};
use dsl_core::Error;

#[derive(Parser)]
#[command(name = "dsl", version, about = "Run double-solution laboratory experiments from TOML configs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Split-step NLS evolution of a soliton or Gaussian.
    NlsRun(RunArgs),
    /// Energy curves along the three dilation families.
    DerrickScan(RunArgs),
    /// Schrödinger-Newton ground state.
    SnGround(RunArgs),
    /// Schrödinger-Newton evolution of a Gaussian or ground state.
    SnRun(RunArgs),
    /// Coarse-grained H-function relaxation in a 2D box.
    Relaxation(RunArgs),
    /// Branch trapping of a guided ensemble.
    Branch(RunArgs),
    /// Signaling gap against the collapse exponent.
    SignalingScan(RunArgs),
    /// Hump tracking through a resonant fission.
    Resonance(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML config; without one, every parameter takes its default.
    #[arg(short, long)]
    config: Option<PathBuf>,

    /// Override a key, e.g. `--set dt=5e-4` or `--set rng_seed=7`.
    #[arg(short = 's', long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl Command {
    fn split(self) -> (Experiment, RunArgs) {
        match self {
            Command::NlsRun(a) => (Experiment::NlsRun, a),
            Command::DerrickScan(a) => (Experiment::DerrickScan, a),
            Command::SnGround(a) => (Experiment::SnGround, a),
            Command::SnRun(a) => (Experiment::SnRun, a),
            Command::Relaxation(a) => (Experiment::Relaxation, a),
            Command::Branch(a) => (Experiment::Branch, a),
            Command::SignalingScan(a) => (Experiment::SignalingScan, a),
            Command::Resonance(a) => (Experiment::Resonance, a),
        }
    }
}

fn execute(experiment: Experiment, args: RunArgs) -> Result<(), Error> {
    let text = match &args.config {
        Some(path) => std::fs::read_to_string(path)?,
        None => String::new(),
    };
    let source = ConfigSource {
        text,
        path: args.config.clone(),
        experiment: Some(experiment),
        overrides: args.overrides,
        output_dir: std::env::var_os("DSL_OUTPUT_DIR").map(PathBuf::from),
    };
    let config = runner::parse_config(&source)?;
    let report = runner::run(&config)?;
    println!("{}", report.report_path.display());
    for (key, value) in &report.metrics {
        println!("  {key} = {value}");
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let (experiment, args) = Cli::parse().command.split();
    match execute(experiment, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(if e.is_validation() { 1 } else { 2 })
        }
    }
}
