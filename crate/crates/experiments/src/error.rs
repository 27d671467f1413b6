use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("config error: {0}")]
    Config(String),
    #[error("self-audit failed: {0}")]
    Audit(String),
    #[error(transparent)]
    Core(#[from] covest::Error),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl ExperimentError {
    pub fn config(msg: impl Into<String>) -> Self {
        Self::Config(msg.into())
    }

    /// Process exit status: 2 for configuration problems, 3 for numerical
    /// non-convergence, 1 for anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Json(_) => 2,
            Self::Core(e) if e.is_non_convergence() => 3,
            Self::Core(covest::Error::UnknownKind(_) | covest::Error::InvalidModel(_)) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, ExperimentError>;
