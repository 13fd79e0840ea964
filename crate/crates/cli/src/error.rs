use std::path::PathBuf;

use qem_core::QemError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid config:\n  {}", .0.join("\n  "))]
    Schema(Vec<String>),
    #[error("dimension cap exceeded: {0}")]
    Cap(String),
    #[error("experiment {index} ({what}) failed: {source}")]
    Runtime {
        index: usize,
        what: String,
        #[source]
        source: QemError,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl LabError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Schema(_) | LabError::Io { .. } => 2,
            LabError::Cap(_) => 3,
            LabError::Runtime { .. } => 4,
        }
    }
}
