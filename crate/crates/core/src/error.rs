use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid lattice specification: {0}")]
    InvalidSpec(String),

    #[error("index {index} out of range (size {size})")]
    Index { index: usize, size: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid data: {0}")]
    InvalidData(String),

    /// An exact enumeration would exceed its configured cap.
    #[error("capacity exceeded: {what} = {requested} exceeds cap {cap}")]
    Capacity {
        what: &'static str,
        requested: u128,
        cap: u128,
    },

    #[error("unsupported algorithm: {0}")]
    UnsupportedAlgorithm(String),

    #[error("unsupported parameter: {0}")]
    UnsupportedParameter(String),

    #[error("divergent integral: {0}")]
    DivergentIntegral(String),

    /// Quadrature refinement stopped before reaching its tolerance.
    #[error("not converged: {0}")]
    NotConverged(String),

    #[error("insufficient data: need at least {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },

    /// No crossing of the finite-size curves inside the scanned window.
    #[error("inconclusive scan: {0}")]
    InconclusiveScan(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
