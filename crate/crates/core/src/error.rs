use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("rank error: {0}")]
    RankError(String),
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),
    #[error("code family does not form a lattice: {0}")]
    NotALattice(String),
    #[error("configuration error: {0}")]
    ConfigError(String),
    #[error("far-input generation failed: {0}")]
    GenerationFailed(String),
    #[error("invariant violated: {0}")]
    InvariantViolated(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::ConfigError(_) | Error::InvalidInput(_) | Error::Json(_) => 2,
            Error::ResourceLimit(_) => 3,
            _ => 1,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
