use thiserror::Error;

/// Errors raised by tree construction, map algebra, and the analyses.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Malformed tree, point, subtree, or map data.
    #[error("structural error: {0}")]
    Structural(String),

    /// An operation was called outside its domain.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A point lies outside the sets an operation needs it in.
    #[error("domain error: {0}")]
    Domain(String),

    /// A mathematical invariant that should hold was found broken.
    #[error("invariant violated: {0}")]
    Invariant(String),

    /// A configured budget (piece count, period bound) was exhausted.
    #[error("resource limit: {what} exceeded cap {cap}")]
    Resource { what: String, cap: u64 },

    /// Orbit search ended without a definitive answer.
    #[error("inconclusive: {0}")]
    Inconclusive(String),

    /// Text input could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn structural(msg: impl Into<String>) -> Error {
    Error::Structural(msg.into())
}

pub(crate) fn precondition(msg: impl Into<String>) -> Error {
    Error::Precondition(msg.into())
}
