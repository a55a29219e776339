//! `fsopt <command> <config.json>`: runs one experiment and writes `schema=v1` outputs.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 usage or config error, 3 numerical failure.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use crate::error::{CliError, CliResult};

#[derive(Parser)]
#[command(name = "fsopt", version, about = "Fourier sampling scheme experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Objective terms over all two-point schemes, with local minima.
    Landscape { config: PathBuf },
    /// Average power spectral density of a dataset and its maxima.
    Psd { config: PathBuf },
    /// Check the spurious-minimizer certificate on a candidate set.
    Certify { config: PathBuf },
    /// Compare the analytic gradient with finite differences on random instances.
    Gradcheck { config: PathBuf },
    /// Optimize a sampling scheme and record its trajectory.
    Optimize { config: PathBuf },
    /// Run the six strategies and cross-evaluate their schemes.
    Table1 { config: PathBuf },
    /// Export a signal dataset with its JSON sidecar.
    Dataset { config: PathBuf },
}

fn dispatch(cmd: &Command) -> CliResult<()> {
    match cmd {
        Command::Landscape { config } => commands::landscape::run(&config::load(config)?),
        Command::Psd { config } => commands::psd::run(&config::load(config)?),
        Command::Certify { config } => commands::certify::run(&config::load(config)?),
        Command::Gradcheck { config } => commands::gradcheck::run(&config::load(config)?),
        Command::Optimize { config } => run_optimize(config),
        Command::Table1 { config } => commands::table1::run(&config::load(config)?),
        Command::Dataset { config } => commands::dataset::run(&config::load(config)?),
    }
}

/// Writes the offending scheme next to the other outputs when the objective blows up.
fn run_optimize(path: &PathBuf) -> CliResult<()> {
    let cfg = config::load(path)?;
    match commands::optimize::run(&cfg) {
        Err(CliError::Core(fsopt::Error::NonFinite { iteration, xi })) => {
            let out = output::Output::create(&cfg)?;
            out.json("failure.json", json!({"iteration": iteration, "xi": xi}))?;
            Err(CliError::Numerical(format!("non-finite objective at iteration {iteration}")))
        }
        other => other,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
