//! Error type shared by every module.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// A cell of an input file failed to parse. `row` and `column` are
    /// 1-based positions in the file.
    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: usize,
        message: String,
    },

    #[error("empty input: {0}")]
    EmptyInput(String),

    /// Data violates a domain invariant (non-finite sample, too-short
    /// trial, asymmetric matrix, ...).
    #[error("invalid data: {0}")]
    Validation(String),

    /// A parameter is outside its declared bounds or a set of parameters
    /// is inconsistent.
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("class {label} has only {count} trials; stratified splitting needs at least {needed}")]
    Stratification {
        label: u32,
        count: usize,
        needed: usize,
    },

    #[error("no vertices with label {label} remain in selection round {round}")]
    EmptyClass { label: u32, round: usize },

    #[error("id mismatch: {0}")]
    IdMismatch(String),

    #[error("metric undefined: {0}")]
    UndefinedMetric(String),

    #[error("threshold schedule error: {0}")]
    Schedule(String),

    /// An internal identity that the algorithm guarantees was violated at
    /// run time. Maps to its own process exit code in the CLI.
    #[error("internal assertion failed: {0}")]
    Internal(String),
}

impl Error {
    /// Process exit code the CLI uses for this error: 2 for configuration
    /// errors, 3 for data errors, 4 for internal assertion failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Schedule(_) => 2,
            Error::Internal(_) => 4,
            _ => 3,
        }
    }
}
