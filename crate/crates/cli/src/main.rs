//! `dirac-minmax` command-line entry point.

mod args;
mod commands;
mod output;

use std::fmt::Display;
use std::process::ExitCode;

use clap::Parser;
use thiserror::Error;

use args::{Cli, Command, MatrixCommand, ScanCommand};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("numerical failure in {stage}: {source}")]
    Numerical {
        stage: String,
        source: dirac_minmax::Error,
    },

    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn io(e: impl Display) -> Self {
        CliError::Io(e.to_string())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numerical { .. } => 3,
            CliError::Io(_) => 1,
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let k = commands::constants(cli.c)?;
    match &cli.command {
        Command::Solve(a) => commands::solve(a, &k),
        Command::Scan(ScanCommand::Shower(a)) => commands::shower(a, &k),
        Command::Scan(ScanCommand::Fig5(a)) => commands::fig5(a, &k),
        Command::Scan(ScanCommand::DftFallacy(a)) => commands::dft_fallacy(a, &k),
        Command::Scan(ScanCommand::Maxmin(a)) => commands::maxmin(a, &k),
        Command::Matrix(MatrixCommand::Collapse(a)) => commands::collapse(a, &k),
        Command::Matrix(MatrixCommand::Nepp(a)) => commands::nepp(a, &k),
        Command::Matrix(MatrixCommand::Conjugation(a)) => commands::conjugation(a, &k),
    }
}

fn main() -> ExitCode {
    let argv = match args::expand_config(std::env::args().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
