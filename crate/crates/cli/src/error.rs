use std::path::PathBuf;

use hjfield::ErrorClass;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] hjfield::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot serialize report: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 1 validation, 2 unsupported model, 3 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) => match e.class() {
                ErrorClass::Validation => 1,
                ErrorClass::Unsupported => 2,
                ErrorClass::Numerical => 3,
            },
            CliError::Io { .. } | CliError::Json(_) | CliError::Usage(_) => 1,
        }
    }
}
