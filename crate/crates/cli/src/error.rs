use std::path::Path;

use thiserror::Error;

/// Failures of a command, each with a fixed process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable, malformed or inconsistent input (exit 2).
    #[error("{0}")]
    Input(String),
    /// Training diverged or overflowed (exit 3).
    #[error("{0}")]
    Divergence(String),
    /// A loading protocol cannot be realised by the model (exit 4).
    #[error("{0}")]
    Infeasible(String),
    /// Writing results failed (exit 1).
    #[error("{0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Output(_) => 1,
            CliError::Input(_) => 2,
            CliError::Divergence(_) => 3,
            CliError::Infeasible(_) => 4,
        }
    }

    pub fn read(path: &Path, e: impl std::fmt::Display) -> Self {
        CliError::Input(format!("cannot read {}: {e}", path.display()))
    }

    pub fn write(path: &Path, e: impl std::fmt::Display) -> Self {
        CliError::Output(format!("cannot write {}: {e}", path.display()))
    }
}

impl From<cann::Error> for CliError {
    fn from(e: cann::Error) -> Self {
        use cann::Error as E;
        let msg = e.to_string();
        match e {
            E::Overflow { .. } | E::Divergence { .. } => CliError::Divergence(msg),
            E::InfeasibleProtocol { .. } | E::NoConvergence { .. } => CliError::Infeasible(msg),
            _ => CliError::Input(msg),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
