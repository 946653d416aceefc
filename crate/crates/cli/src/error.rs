use std::path::Path;

use thiserror::Error;

/// Failure of a subcommand, carrying its exit status class.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Internal(_) => 3,
        }
    }

    /// A library error met while processing the input at `path`.
    pub fn data(path: &Path, err: impl std::fmt::Display) -> Self {
        CliError::Data(format!("{}: {err}", path.display()))
    }

    pub fn write(path: &Path, err: impl std::fmt::Display) -> Self {
        CliError::Internal(format!("cannot write {}: {err}", path.display()))
    }
}

impl From<mstphase::Error> for CliError {
    fn from(e: mstphase::Error) -> Self {
        match e {
            mstphase::Error::InvalidConfig(_) | mstphase::Error::InvalidSpec(_) => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Data(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
