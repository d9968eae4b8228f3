//! Command-line front end for the flux-qubit coupling suite.
//!
//! Exit codes: 0 clean run, 1 unusable configuration or arguments, 2 run
//! completed but some grid points failed (marked in the CSV and manifest).

mod commands;
mod output;
mod store;

use std::fmt;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments or config: nothing was computed.
    Config(String),
    /// Filesystem trouble writing results.
    Io(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "{msg}"),
            CliError::Io(msg) => write!(f, "{msg}"),
        }
    }
}

impl From<fluxcap::Error> for CliError {
    fn from(e: fluxcap::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "fluxcap",
    version,
    about = "Flux-qubit spectra, voltage-controlled ZZ coupling, error budgets, and cluster-state schedules"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Single-qubit transition energies along a control axis.
    Spectrum(commands::spectrum::SpectrumArgs),
    /// Pair coupling versus gate voltage, or chain decay versus Cc.
    Coupling(commands::coupling::CouplingArgs),
    /// Local and correlated error budgets.
    Errors(commands::errors::ErrorsArgs),
    /// Echo schedules, residual-phase audits, cluster-state simulation.
    Cluster(commands::cluster::ClusterArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are clean exits; anything else is a usage
            // problem and maps to the config exit code.
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.cmd {
        Cmd::Spectrum(args) => commands::spectrum::run(args),
        Cmd::Coupling(args) => commands::coupling::run(args),
        Cmd::Errors(args) => commands::errors::run(args),
        Cmd::Cluster(args) => commands::cluster::run(args),
    };
    match result {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
