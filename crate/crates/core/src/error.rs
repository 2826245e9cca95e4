use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A domain value violates its type invariant (negative size, weights not
    /// summing to one, non-positive power, ...).
    #[error("invalid {field}: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    /// A scenario document is malformed or inconsistent.
    #[error("config error: {0}")]
    Config(String),

    /// A caller broke an operation precondition (trial count, solver bound).
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// An agent sent a message the controller cannot honor.
    #[error("protocol violation: {0}")]
    Protocol(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }

    /// True for errors caused by bad scenario input rather than misuse.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. } | Error::Config(_) | Error::Json(_)
        )
    }
}
