use alloc::string::String;

use crate::lp::LpError;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("shape or alphabet mismatch between distributions")]
    ShapeMismatch,

    #[error("shape is not a subset of the distribution's shape")]
    NotASubset,

    #[error("pattern space too large: {count} patterns (limit 2^40)")]
    TooManyPatterns { count: u128 },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("constraint set is empty")]
    EmptyConstraintSet,

    #[error("search space too large: {bits:.1} bits exceeds the limit of {limit} bits")]
    SearchSpaceTooLarge { bits: f64, limit: u32 },

    #[error("language is empty")]
    EmptyLanguage,

    #[error("no feasible product measure found")]
    NoFeasibleMeasure,

    #[error("inequality violated: {0}")]
    InequalityViolated(String),

    #[error("linear program failed: {0}")]
    Lp(#[from] LpError),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
