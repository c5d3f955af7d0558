use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("ray dimension must be at least 3, got {0}")]
    DimensionTooSmall(usize),

    #[error("zero vector is not a ray")]
    ZeroRay,

    #[error("cannot parse rational from {0:?}")]
    ParseRational(String),

    #[error("duplicate label {0:?}")]
    DuplicateLabel(String),

    #[error("unknown label {0:?}")]
    UnknownLabel(String),

    #[error("rays {0:?} and {1:?} are parallel")]
    ParallelRays(String, String),

    #[error("invalid block decomposition m = {m}, n = {n} for dimension {d}")]
    InvalidDecomposition { d: usize, m: usize, n: usize },

    #[error("dimension {0} is not supported here (need d >= {1})")]
    UnsupportedDimension(usize, usize),

    #[error("triple {0:?} is not independent in the base graph")]
    NotIndependent([String; 3]),

    #[error("quadratic term pairs non-orthogonal rays {0:?} and {1:?}")]
    NonOrthogonalPair(String, String),

    #[error("assignment has no value for variable {0:?}")]
    MissingVariable(String),

    #[error("form has {found} variables, exhaustive cap is {cap}")]
    TooManyVariables { found: usize, cap: usize },

    #[error("invalid mixture: {0}")]
    InvalidMixture(String),

    #[error("cross-block terms are not expressible through block sums: {0}")]
    NotBlockSeparable(String),

    #[error("malformed input: {0}")]
    Malformed(String),
}

pub type Result<T> = std::result::Result<T, Error>;
