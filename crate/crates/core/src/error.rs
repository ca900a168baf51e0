use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    Dimension { left: usize, right: usize },

    /// An input violates a model axiom or a structural invariant.
    #[error("validation failed ({what}): {detail}")]
    Validation { what: String, detail: String },

    #[error("budget exceeded: {0}")]
    Budget(String),

    #[error("outside domain: {0}")]
    Domain(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn validation(what: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Validation {
            what: what.into(),
            detail: detail.into(),
        }
    }
}
