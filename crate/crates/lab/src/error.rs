use std::path::PathBuf;

use serde_json::json;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] xcf_core::Error),

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },

    #[error("csv output failed: {0}")]
    Csv(#[from] csv::Error),

    #[error("{0}")]
    Failed(String),
}

pub type Result<T> = std::result::Result<T, LabError>;

impl LabError {
    pub fn kind(&self) -> &'static str {
        match self {
            LabError::Config(_) => "config",
            LabError::Core(_) => "numerics",
            LabError::Io { .. } | LabError::Csv(_) => "io",
            LabError::Json { .. } => "json",
            LabError::Failed(_) => "failed",
        }
    }

    /// Process exit status: 2 for bad input, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config(_) | LabError::Json { .. } => 2,
            LabError::Core(xcf_core::Error::InvalidMetric { .. })
            | LabError::Core(xcf_core::Error::InvalidControls(_))
            | LabError::Core(xcf_core::Error::UnknownGeometry(_))
            | LabError::Core(xcf_core::Error::UnknownSign(_)) => 2,
            _ => 1,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({ "error": { "kind": self.kind(), "message": self.to_string() } })
    }
}

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> LabError {
    let path = path.into();
    move |source| LabError::Io { path, source }
}
