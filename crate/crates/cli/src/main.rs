// SPDX-License-Identifier: Apache-2.0

//! `mtpla`: synthesize, analyse and simulate power-gated PLAs.
//!
//! Exit codes: 0 success, 1 internal error, 2 user or configuration error.

mod commands;
mod format;
mod settings;

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;

use settings::Settings;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    User(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::User(_) => 2,
            CliError::Internal(_) => 1,
        }
    }
}

#[derive(Parser)]
#[command(name = "mtpla", version, about = "Power-gated PLA design and analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the footer virtual-ground voltage and leakage ratio
    Vgnd(Settings),
    /// Per-line power for one input vector
    Power(Settings),
    /// Per-line power for every input vector, written as CSV/JSON
    Sweep(Settings),
    /// Saving statistics of gated against conventional power
    Compare(Settings),
    /// Step response of selected nodes and wake-up latency of each footer
    Transient(Settings),
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Vgnd(s) => commands::vgnd(&s.resolve()?),
        Command::Power(s) => commands::power(&s.resolve()?),
        Command::Sweep(s) => commands::sweep(&s.resolve()?),
        Command::Compare(s) => commands::compare(&s.resolve()?),
        Command::Transient(s) => commands::transient(&s.resolve()?),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mtpla: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
