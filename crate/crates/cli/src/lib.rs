//! File formats, replayable oracles and the `ctxent` command-line tool built on `ctxent-core`.

use std::path::Path;
use std::process::ExitCode;

use thiserror::Error;

pub mod args;
pub mod commands;
pub mod curves;
pub mod formats;
pub mod manifest;
pub mod record;

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    /// A property battery reported a failing check.
    pub const CHECK_FAILED: u8 = 1;
    pub const INPUT: u8 = 2;
    pub const AMBIGUOUS: u8 = 3;
    pub const INFEASIBLE: u8 = 4;
    pub const NUMERICAL: u8 = 5;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),

    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },

    #[error(transparent)]
    Core(#[from] ctxent_core::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io { path: path.display().to_string(), source }
    }

    pub fn exit_code(&self) -> ExitCode {
        use ctxent_core::Error as E;
        let code = match self {
            Self::Core(E::NumericalBreakdown { .. } | E::NoConvergence | E::BudgetExhausted { .. }) => exit::NUMERICAL,
            _ => exit::INPUT,
        };
        ExitCode::from(code)
    }
}
