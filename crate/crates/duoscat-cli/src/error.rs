//! Error type for the command-line layer, carrying the process exit code.

use std::io;

use thiserror::Error;

/// Exit codes: 0 success, 1 usage error, 2 numerical failure, 3 I/O error.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("numerical failure: {0}")]
    Numerical(#[from] duoscat_core::Error),
    #[error("i/o failure: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}
