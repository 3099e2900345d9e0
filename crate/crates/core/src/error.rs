use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A caller-supplied argument violated a precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// An operator failed the commutation residual check against a sector basis.
    #[error("operator does not respect the {symmetry} symmetry of the sector (residual {residual:.3e})")]
    SymmetryViolation { symmetry: String, residual: f64 },

    /// The dense eigen/singular value backend failed or its output did not
    /// pass the trace-moment residual check.
    #[error("spectral computation failed for a {dim}x{dim} matrix (hash {hash:016x}): {reason}")]
    Spectral { dim: usize, hash: u64, reason: String },

    #[error("matrix dimension {dim} exceeds the supported dense envelope of {limit}")]
    SizeLimit { dim: usize, limit: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
