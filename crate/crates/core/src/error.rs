use thiserror::Error;

/// Errors raised by the density algebra, the elicitation routines and the
/// counterexample engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("contract violation: {0}")]
    Contract(String),

    /// A functional that must be single-valued has more than one optimizer.
    #[error("non-unique {what}: {detail}")]
    NonUnique { what: &'static str, detail: String },

    #[error("numerical failure: {0}")]
    Numeric(String),

    /// The candidate identification function has no root on the original
    /// density, so it does not identify anything there.
    #[error("no identification root: {0}")]
    NoRoot(String),

    #[error("certification failed: {0}")]
    Certification(String),

    #[error("internal error: {0}")]
    Internal(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
