mod commands;
mod config;
mod input;
mod output;

use std::fmt;
use std::process::ExitCode;

use clap::Parser;

use config::{Cli, FileConfig, RunConfig};

/// Failure of a CLI run, carrying its exit status.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config keys or parameter values: exit 2.
    Validation(String),
    /// File system or parse problems with inputs and outputs: exit 2.
    Io(String),
    /// A regularity condition or domain requirement fails: exit 3.
    Condition(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) | CliError::Io(_) => 2,
            CliError::Condition(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "validation error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Condition(m) => write!(f, "condition error: {m}"),
        }
    }
}

impl From<spacings::Error> for CliError {
    fn from(e: spacings::Error) -> Self {
        use spacings::Error as E;
        match e {
            E::InvalidParameter(_) => CliError::Validation(e.to_string()),
            E::Domain(_)
            | E::Singularity { .. }
            | E::Condition { .. }
            | E::TiltDomain { .. }
            | E::Positivity { .. }
            | E::Quadrature(_) => CliError::Condition(e.to_string()),
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let cfg = RunConfig::resolve(&cli.command, file)?;
    let threads = cfg.threads;
    spacings::parallel::with_threads(threads, || commands::dispatch(&cfg))??;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("spacings: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
