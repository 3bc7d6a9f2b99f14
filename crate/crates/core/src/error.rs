use thiserror::Error;

/// Errors raised by graph construction, combinatorial search and the numeric layer.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("edge {{{u},{v}}} is not present in color {color}")]
    InvalidEdge { color: usize, u: usize, v: usize },

    #[error("color {color}: {reason}")]
    NotPerfect { color: usize, reason: String },

    #[error("invalid matching: {0}")]
    InvalidMatching(String),

    #[error("ground set mismatch: {left} vs {right} vertices")]
    GroundMismatch { left: usize, right: usize },

    #[error("vertex {0} is not free")]
    NotFree(usize),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("graph must be connected: {0}")]
    Disconnected(String),

    #[error("budget exceeded: {what} (limit {limit})")]
    BudgetExceeded { what: String, limit: String },

    #[error("missing entry for subset {0:#b}")]
    MissingSubset(u32),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
