use std::path::PathBuf;

/// Errors of the file formats, studies and front end.
#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{}: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },
    /// A parameter, document or study spec that fails validation.
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] proxflow_core::Error),
}

impl AppError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AppError::Io { path: path.into(), source }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        AppError::Invalid(msg.into())
    }

    /// Whether the error stems from the user's input rather than from a
    /// failing run.
    pub fn is_usage(&self) -> bool {
        match self {
            AppError::Json { .. } | AppError::Invalid(_) => true,
            AppError::Core(e) => matches!(
                e,
                proxflow_core::Error::InvalidParameter(_) | proxflow_core::Error::DimensionMismatch { .. }
            ),
            AppError::Io { .. } | AppError::Csv { .. } => false,
        }
    }
}

pub type Result<T, E = AppError> = std::result::Result<T, E>;
