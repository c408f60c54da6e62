//! `hkdelay` command line: run delayed opinion-dynamics simulations, verify
//! the contraction bounds against them, sweep parameter grids, and run
//! mean-field N-scaling experiments. See README.md for the config format.
//!
//! Exit codes: 0 success, 1 verification failure, 2 configuration error,
//! 3 integration failure, 4 certificate unsupported for the scheme.

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod output;

use config::RunConfig;

#[derive(Debug)]
pub enum CliError {
    /// Unreadable or invalid configuration (exit 2).
    Config(String),
    /// The integrator produced a non-finite state (exit 3).
    Integration(String),
    /// Certificate requested for a scheme that has none (exit 4).
    Unsupported(String),
    /// A verified bound failed (exit 1).
    Verification(String),
    /// Everything else, e.g. I/O (exit 1).
    Other(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Integration(_) => 3,
            CliError::Unsupported(_) => 4,
            CliError::Verification(_) | CliError::Other(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m)
            | CliError::Integration(m)
            | CliError::Unsupported(m)
            | CliError::Verification(m)
            | CliError::Other(m) => f.write_str(m),
        }
    }
}

impl From<hkdelay::Error> for CliError {
    fn from(e: hkdelay::Error) -> Self {
        match e {
            hkdelay::Error::Config(_) | hkdelay::Error::InputDomain(_) => {
                CliError::Config(format!("config error: {e}"))
            }
            hkdelay::Error::IntegrationFailure { .. } => CliError::Integration(e.to_string()),
            hkdelay::Error::UnsupportedCertificate => CliError::Unsupported(e.to_string()),
            other => CliError::Other(other.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "hkdelay",
    about = "Delayed Hegselmann-Krause consensus: simulation and runtime verification",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (defaults to the config's [output].dir, then "out").
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for grid commands.
    #[arg(long)]
    jobs: Option<usize>,
    /// Suppress progress messages.
    #[arg(long)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one run and write trajectory.csv + summary.json.
    Simulate(CommonArgs),
    /// Run, then check stay/speed/contraction bounds; write report CSV(s)
    /// and certificate.json.
    Verify(CommonArgs),
    /// Cartesian parameter grid over [sweep]; write sweep.csv.
    Sweep(CommonArgs),
    /// Mean-field N-scaling experiment over [meanfield]; write meanfield.csv.
    Meanfield(CommonArgs),
}

fn load_config(args: &CommonArgs) -> Result<(RunConfig, PathBuf), CliError> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| {
        CliError::Config(format!(
            "config error: cannot read {}: {e}",
            args.config.display()
        ))
    })?;
    let cfg = RunConfig::parse(&text)?;
    let out_dir = args
        .out
        .clone()
        .or_else(|| cfg.output.as_ref().map(|o| PathBuf::from(&o.dir)))
        .unwrap_or_else(|| PathBuf::from("out"));
    Ok((cfg, out_dir))
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Simulate(args) => {
            let (cfg, out) = load_config(args)?;
            commands::simulate(&cfg, &out, args.quiet)
        }
        Command::Verify(args) => {
            let (cfg, out) = load_config(args)?;
            commands::verify(&cfg, &out, args.quiet)
        }
        Command::Sweep(args) => {
            let (cfg, out) = load_config(args)?;
            commands::sweep(&cfg, &out, args.jobs, args.quiet)
        }
        Command::Meanfield(args) => {
            let (cfg, out) = load_config(args)?;
            commands::meanfield(&cfg, &out, args.quiet)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hkdelay: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
