//! `holonomy run <config> [--out DIR] [--seed S] [--parallel]`
//!
//! Exit status: 0 all assertions hold, 1 an assertion failed, 2 the
//! configuration or output path is unusable, 3 a numerical routine or search
//! budget gave out.

mod config;
mod experiments;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Scenario, DEFAULT_OUTPUT};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical error: {0}")]
    Numeric(String),
    #[error("cannot write report: {0}")]
    Output(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) | Self::Output(_) => 2,
            Self::Numeric(_) => 3,
        }
    }
}

impl From<holonomy_core::Error> for CliError {
    fn from(e: holonomy_core::Error) -> Self {
        Self::Numeric(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "holonomy", version, about = "Adiabatic holonomy experiments from scenario files")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one scenario and write its report files.
    Run {
        config: PathBuf,
        /// Output directory, overriding the scenario's `output`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Scenario seed, overriding the scenario's `seed`.
        #[arg(long)]
        seed: Option<u64>,
        /// Evaluate independent cells concurrently; output order is unchanged.
        #[arg(long)]
        parallel: bool,
    },
}

fn run(config: PathBuf, out: Option<PathBuf>, seed: Option<u64>, parallel: bool) -> Result<bool, CliError> {
    let mut scenario = Scenario::load(&config)?;
    if let Some(s) = seed {
        scenario.seed = s;
    }
    let out = out
        .or_else(|| scenario.output.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT));
    if out.exists() && !out.is_dir() {
        return Err(CliError::Config(format!("output path {} is not a directory", out.display())));
    }
    let setup = experiments::Setup::build(&scenario)?;
    let report = experiments::run(&scenario, &setup, parallel)?;
    report.write(&out)?;
    print!("{}", report.summary());
    if let Some(budget) = &report.budget_error {
        return Err(CliError::Numeric(budget.clone()));
    }
    Ok(report.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Command::Run { config, out, seed, parallel } = cli.command;
    match run(config, out, seed, parallel) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("assertion failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
