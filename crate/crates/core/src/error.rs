use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid experiment or circuit configuration.
    #[error("configuration error: {0}")]
    Config(String),
    /// Malformed or inconsistent call arguments.
    #[error("input error: {0}")]
    Input(String),
    #[error("capacity error: {what} exceeds the configured cap of {cap}")]
    Capacity { what: String, cap: usize },
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("numeric fault at contraction step {step}: non-finite value")]
    NumericFault { step: usize },
    #[error("subtask {subtask} (configuration {config_bits}) failed: {source}")]
    Subtask {
        subtask: usize,
        config_bits: String,
        #[source]
        source: Box<Error>,
    },
    #[error("statistics error: {0}")]
    Statistics(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Strips subtask wrappers to reach the underlying fault.
    pub fn root(&self) -> &Error {
        match self {
            Error::Subtask { source, .. } => source.root(),
            other => other,
        }
    }
}
