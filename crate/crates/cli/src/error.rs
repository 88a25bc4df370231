//! Command-line error type and its mapping onto process exit codes:
//! 0 success, 2 for anything the user can fix in inputs or configuration,
//! 3 for a sampler abort, 1 for environment failures such as I/O.

use std::fmt;

#[derive(Debug)]
pub enum CliError {
    /// Bad configuration, data, or flags; exit code 2.
    Validation(String),
    /// The sampler gave up (non-finite state, failed factorization); exit code 3.
    Sampler(String),
    /// Filesystem or serialization trouble; exit code 1.
    Io(String),
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Sampler(_) => 3,
            CliError::Io(_) => 1,
        }
    }

    pub fn validation(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "invalid input: {m}"),
            CliError::Sampler(m) => write!(f, "sampler failure: {m}"),
            CliError::Io(m) => write!(f, "i/o failure: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<inflaquant::Error> for CliError {
    fn from(e: inflaquant::Error) -> Self {
        if e.is_validation() {
            CliError::Validation(e.to_string())
        } else {
            CliError::Sampler(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        // Malformed rows are a data problem; everything else is I/O.
        if e.is_io_error() {
            CliError::Io(e.to_string())
        } else {
            CliError::Validation(e.to_string())
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
