use thiserror::Error;

/// Errors surfaced by the exact-arithmetic pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// Instance or configuration data violates a stated precondition.
    #[error("validation error: {0}")]
    Validation(String),

    /// An operation was called outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Enclosure operands live at different places.
    #[error("place mismatch between enclosure operands")]
    PlaceMismatch,

    /// A rigorous enclosure could not reach the requested width.
    #[error("precision unreachable with iteration cap")]
    PrecisionUnreachable,

    /// The certifier exhausted its (l, n) search budget.
    #[error("no admissible (l,n) in budget: {0}")]
    NoAdmissibleCell(String),
}

pub type Result<T> = std::result::Result<T, Error>;
