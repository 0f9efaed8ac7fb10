//! Command-line driver: reads a TOML experiment config, checks that it
//! addresses the invoked subcommand, and hands it to the library runner.
//!
//! Exit codes: 0 success, 2 configuration error, 3 strict-mode violation,
//! 4 runtime (numerical or I/O) failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use trotterlab::config::{parse_config, CommandKind};
use trotterlab::runner::{run, RunOptions};
use trotterlab::Error;

#[derive(Parser)]
#[command(
    name = "trotterlab",
    version,
    about = "Product-formula evolution analysis for layered spin Hamiltonians",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Matched exact-vs-effective eigenvalue table
    Spectrum(RunArgs),
    /// Fidelity/phase/norm/Euclidean error curve over step counts
    TrotterError(RunArgs),
    /// Discretized adiabatic sweep over a grid of total times
    DasSweep(RunArgs),
    /// Phase-register drift of a Trotterized eigenphase
    Qpe(RunArgs),
    /// Robust two-channel eigenphase-difference readout
    Rpe(RunArgs),
    /// Closed-form bound evaluations for the configured model
    Bounds(RunArgs),
    /// Subspace leakage of the product-formula walk
    Leakage(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Path to the TOML experiment config
    #[arg(long)]
    config: PathBuf,
    /// Treat violated bound preconditions as errors
    #[arg(long)]
    strict: bool,
    /// Directory to root artifacts in (default: current directory)
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Command {
    fn split(self) -> (CommandKind, RunArgs) {
        match self {
            Command::Spectrum(args) => (CommandKind::Spectrum, args),
            Command::TrotterError(args) => (CommandKind::TrotterError, args),
            Command::DasSweep(args) => (CommandKind::DasSweep, args),
            Command::Qpe(args) => (CommandKind::Qpe, args),
            Command::Rpe(args) => (CommandKind::Rpe, args),
            Command::Bounds(args) => (CommandKind::Bounds, args),
            Command::Leakage(args) => (CommandKind::Leakage, args),
        }
    }
}

fn execute(kind: CommandKind, args: &RunArgs) -> Result<(), Error> {
    // An unreadable config document is a usage problem (exit 2), unlike
    // artifact I/O failures inside the runner (exit 4).
    let text = std::fs::read_to_string(&args.config).map_err(|source| Error::Config {
        message: format!("cannot read {}: {source}", args.config.display()),
    })?;
    let config = parse_config(&text)?;
    if config.command != kind {
        return Err(Error::Config {
            message: format!(
                "config is for '{}' but '{}' was invoked",
                config.command.name(),
                kind.name()
            ),
        });
    }
    let outcome = run(
        &config,
        &RunOptions { strict: args.strict, out_dir: args.out.clone() },
    )?;
    for warning in &outcome.warnings {
        eprintln!("warning: {warning}");
    }
    for path in &outcome.artifacts {
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = cli.command.split();
    match execute(kind, &args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
