mod cli;
mod commands;
mod config;
mod format;

use std::process::ExitCode;

use clap::Parser;

use cli::Cli;

/// Process exit status for failures.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags, config or parameter values (exit 2).
    Usage(anyhow::Error),
    /// Unreadable or inconsistent data (exit 3).
    Data(anyhow::Error),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Data(_) => 3,
        }
    }

    pub fn usage(e: impl Into<anyhow::Error>) -> Self {
        Failure::Usage(e.into())
    }

    pub fn data(e: impl Into<anyhow::Error>) -> Self {
        Failure::Data(e.into())
    }
}

impl From<freqbell::Error> for Failure {
    fn from(e: freqbell::Error) -> Self {
        match e {
            freqbell::Error::InvalidArgument(_) => Failure::Usage(e.into()),
            _ => Failure::Data(e.into()),
        }
    }
}

pub type CliResult<T> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            let (Failure::Usage(e) | Failure::Data(e)) = &failure;
            eprintln!("error: {e:#}");
            ExitCode::from(failure.code())
        }
    }
}
