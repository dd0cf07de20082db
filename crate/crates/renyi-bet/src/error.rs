use std::path::PathBuf;

use thiserror::Error;

/// Exit code for a successful run.
pub const EXIT_OK: i32 = 0;
/// Exit code for malformed input, schema violations and exceeded guards.
pub const EXIT_VALIDATION: i32 = 2;
/// Exit code for a violated inequality or identity.
pub const EXIT_VIOLATION: i32 = 3;
/// Exit code for a numeric singularity.
pub const EXIT_SINGULARITY: i32 = 4;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] renyi_bet_core::Error),
    #[error("{0}")]
    Validation(String),
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write output: {0}")]
    Write(#[from] std::io::Error),
    #[error("malformed JSON in {path}: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("instance exceeds the {what} guard: {size} > {limit}")]
    GuardExceeded {
        what: &'static str,
        size: u128,
        limit: u128,
    },
    #[error("{0}")]
    Violation(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Core(e) if e.is_singularity() => EXIT_SINGULARITY,
            Error::Violation(_) => EXIT_VIOLATION,
            _ => EXIT_VALIDATION,
        }
    }

    /// Short machine-readable category used in diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Core(e) if e.is_singularity() => "singularity",
            Error::Core(_) => "invalid-input",
            Error::Validation(_) => "invalid-input",
            Error::Read { .. } | Error::Write(_) => "io",
            Error::Json { .. } => "malformed-json",
            Error::Csv(_) => "io",
            Error::GuardExceeded { .. } => "guard-exceeded",
            Error::Violation(_) => "property-violation",
        }
    }
}
