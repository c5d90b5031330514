use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Everything that stops an experiment before its report is written.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: io::Error },
    #[error("malformed config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] fslab_core::Error),
    #[error("cannot write output: {0}")]
    Io(#[from] io::Error),
    #[error("cannot write csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// Machine-readable category, reported in the error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Read { .. } => "read",
            CliError::Parse(_) => "parse",
            CliError::Invalid(_) => "invalid",
            CliError::Core(e) => e.kind(),
            CliError::Io(_) | CliError::Csv(_) => "io",
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "status": "error",
            "kind": self.kind(),
            "message": self.to_string(),
        })
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

pub(crate) fn invalid(message: impl Into<String>) -> CliError {
    CliError::Invalid(message.into())
}
