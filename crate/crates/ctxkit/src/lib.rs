//! Command-line front end, JSON file formats and parallel drivers for `ctxkit-core`.

pub mod cli;
pub mod json;
pub mod parallel;

use std::path::PathBuf;

use ctxkit_core::Error;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("csv output failed: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// 2 for bad input, 3 for resource limits, 1 for anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(Error::InvalidArgument(_) | Error::NotFound(_) | Error::InvalidContext(_)) => 2,
            CliError::Core(Error::ResourceLimit(_)) => 3,
            CliError::Json(_) | CliError::Io { .. } | CliError::Usage(_) => 2,
            CliError::Core(_) | CliError::Csv(_) => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core(Error::InvalidArgument(_)) | CliError::Usage(_) => "invalid_argument",
            CliError::Core(Error::NotFound(_)) => "not_found",
            CliError::Core(Error::InvalidContext(_)) => "invalid_context",
            CliError::Core(Error::ResourceLimit(_)) => "resource_limit",
            CliError::Core(Error::NumericFailure(_)) => "numeric_failure",
            CliError::Core(Error::Internal(_)) => "internal",
            CliError::Json(_) => "malformed_json",
            CliError::Io { .. } => "io",
            CliError::Csv(_) => "csv",
        }
    }
}
