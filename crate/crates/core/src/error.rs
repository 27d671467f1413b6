use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A documented precondition of an operation was violated by the caller.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("no convergence after {iterations} iterations (best estimate {best}, achieved gap {gap:e})")]
    NonConvergence {
        best: f64,
        gap: f64,
        iterations: usize,
    },

    #[error("minimum-norm point did not converge in {iterations} iterations (achieved gap {gap:e})")]
    MinNormNonConvergence {
        best: Box<crate::hull::MinNormPoint>,
        gap: f64,
        iterations: usize,
    },

    #[error("rank-deficient input: rank {rank} < dimension {dim}")]
    RankDeficient { rank: usize, dim: usize },

    #[error("unknown model kind `{0}`")]
    UnknownKind(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error(transparent)]
    Structure(#[from] crate::structure::StructureError),

    #[error(transparent)]
    Decoupling(#[from] crate::decoupling::DecouplingFailure),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn is_non_convergence(&self) -> bool {
        matches!(self, Error::NonConvergence { .. } | Error::MinNormNonConvergence { .. })
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }
}
