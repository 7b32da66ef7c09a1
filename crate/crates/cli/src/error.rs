use std::path::PathBuf;

use expsearch::oracle::OracleError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Write { path: PathBuf, source: std::io::Error },
    /// Malformed JSON; serde reports the line and column.
    #[error("{}: {source}", path.display())]
    Parse { path: PathBuf, source: serde_json::Error },
    /// Well-formed input the library rejected.
    #[error("{}: {source}", path.display())]
    Invalid { path: PathBuf, source: expsearch::Error },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Library(#[from] expsearch::Error),
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// 3 when a solver gave up, 2 for everything the caller can fix.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Library(expsearch::Error::Oracle(OracleError::NoConvergence(_))) => 3,
            _ => 2,
        }
    }
}

/// Lifts any library error into [`CliError::Library`].
pub fn lib<E: Into<expsearch::Error>>(e: E) -> CliError {
    CliError::Library(e.into())
}
