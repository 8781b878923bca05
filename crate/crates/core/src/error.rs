use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point index {index} out of range for cloud of {len} points")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("empty vertex set")]
    EmptyVertexSet,

    #[error("invalid point cloud: {0}")]
    InvalidCloud(String),

    #[error("{0} is not a prime modulus")]
    NotPrime(u32),

    #[error("field mismatch: F_{left} vs F_{right}")]
    FieldMismatch { left: u32, right: u32 },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("dimension {dim} out of range (max {max})")]
    DimensionOutOfRange { dim: usize, max: usize },

    #[error("simplex count {count} exceeds budget {budget} in region {region}")]
    BudgetExceeded {
        count: usize,
        budget: usize,
        region: String,
    },

    #[error("chain is not a cycle")]
    NotACycle,

    #[error("simplex {0} is not supported by this region's complex")]
    UnsupportedSimplex(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    /// An exactness or chain-level contract was violated. Always a bug.
    #[error("internal consistency failure: {0}")]
    Internal(String),
}
