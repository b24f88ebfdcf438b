use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("level mismatch: {0} vs {1}")]
    LevelMismatch(u32, u32),

    #[error("{what} = {value} out of range [{lo}, {hi}]")]
    OutOfRange {
        what: &'static str,
        value: i64,
        lo: i64,
        hi: i64,
    },

    #[error("eigensolver failed to converge at index {index} after {iterations} iterations")]
    NonConvergence { index: usize, iterations: usize },

    #[error("operation requires eigenvectors, spectrum has none for index {0}")]
    MissingEigenvectors(usize),

    #[error("vector is not normalized: |psi|^2 = {0}")]
    NotNormalized(f64),

    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("empty pool")]
    EmptyPool,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl Error {
    pub(crate) fn out_of_range(what: &'static str, value: i64, lo: i64, hi: i64) -> Self {
        Error::OutOfRange { what, value, lo, hi }
    }

    /// True for failures of the numerical machinery (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NonConvergence { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
