//! Error type of the std front end and its process exit-code mapping.

use kamiltonian_core::CoreError;

/// Errors raised by numerics, IO and configuration handling.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Invalid user input (configuration, flags, parameters).
    #[error("invalid input: {0}")]
    Input(String),
    /// A numerical routine failed to converge or lost accuracy.
    #[error("numerical failure: {0}")]
    Numeric(String),
    /// Error from the symbolic core.
    #[error(transparent)]
    Core(#[from] CoreError),
    /// Filesystem error.
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    /// JSON (de)serialisation error.
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    /// CSV error.
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code: 2 for invalid input or configuration, 3 for
    /// failures during the computation (numerics, resonant denominators,
    /// file output).
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Input(_) | Error::Json(_) => 2,
            Error::Core(CoreError::InvalidInput(_) | CoreError::Unassigned(_) | CoreError::Unsupported(_)) => 2,
            Error::Numeric(_) | Error::Core(_) | Error::Io(_) | Error::Csv(_) => 3,
        }
    }
}

/// Result alias.
pub type Result<T> = std::result::Result<T, Error>;
