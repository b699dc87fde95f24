use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Numeric(#[from] geolorenz_core::Error),
    #[error("missing file {0}")]
    Missing(PathBuf),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("malformed {what}: {detail}")]
    Parse { what: &'static str, detail: String },
}

impl LabError {
    /// Process exit code: 2 config error, 3 numeric failure, 4 insufficient data.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config(_) => 2,
            LabError::Numeric(e) if e.is_insufficient_data() => 4,
            LabError::Missing(_) => 4,
            _ => 3,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> LabError {
        let path = path.into();
        move |source| {
            if source.kind() == std::io::ErrorKind::NotFound {
                LabError::Missing(path)
            } else {
                LabError::Io { path, source }
            }
        }
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
