use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced while constructing or running the models.
#[derive(Debug, Error)]
pub enum Error {
    #[error("geometry mismatch: {0}")]
    GeometryMismatch(String),
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("non-summable migration: {0}")]
    NonSummableMigration(String),
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("sample size {n} exceeds exact-solver cap {cap}; use the Monte-Carlo path instead")]
    AbsorptionCapExceeded { n: usize, cap: usize },
    #[error("stick-breaking sampler requires a pure Fleming-Viot equilibrium (Lambda = 0); \
             the atom-size law for Lambda != 0 is an open problem")]
    StickBreakingNeedsFlemingViot,
    #[error("unclassified family: {0}")]
    Unclassified(String),
}

impl Error {
    pub(crate) fn parameter(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
