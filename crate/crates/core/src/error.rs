use alloc::string::String;

use crate::model::ValidationReport;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    Dimension {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid instance: {0}")]
    InvalidInstance(ValidationReport),

    #[error("alpha must be ≥ 4 (got {0})")]
    AlphaTooSmall(f64),

    #[error("problem is infeasible")]
    Infeasible,

    #[error("problem is unbounded")]
    Unbounded,

    #[error("simplex iteration cap of {0} exceeded")]
    IterationLimit(usize),

    #[error("instance too large for exhaustive search: n = {n}, limit = {limit}")]
    TooLarge { n: usize, limit: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A rounding stage ran out of floating-point slack against one of its
    /// strict thresholds.
    #[error("numerical margin exhausted: {0}")]
    NumericalMargin(String),

    /// A structural invariant of an intermediate object does not hold.
    #[error("internal invariant broken: {0}")]
    Internal(String),
}
