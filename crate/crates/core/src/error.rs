use thiserror::Error;

/// Errors shared across the solver and I/O modules.
#[derive(Debug, Error)]
pub enum Error {
    /// A row of the system matrix has (numerically) zero norm. Row index is 0-based.
    #[error("row {0} of the matrix is zero")]
    ZeroRow(usize),

    /// Operand shapes do not line up.
    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: String, got: String },

    /// A NaN or infinity was encountered while constructing a value from I/O.
    #[error("non-finite value {value} at {location}")]
    NonFinite { value: f64, location: String },

    /// An iterative routine failed to settle within its iteration budget.
    #[error("no convergence after {iterations} iterations")]
    NoConvergence { iterations: usize },

    /// A SIRT weight came out zero with the fallback disabled. Index is 0-based.
    #[error("degenerate weight at index {0}")]
    DegenerateWeight(usize),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed input file (Matrix Market, vector literal, ...).
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Invalid run configuration.
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
