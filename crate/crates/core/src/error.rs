use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter lies outside its supported range.
    #[error("{name} out of range: {detail}")]
    Range { name: &'static str, detail: String },

    /// Filter bank fails one of its algebraic invariants.
    #[error("invalid filter bank: {0}")]
    Filter(String),

    /// The refinement (cascade) iteration did not settle.
    #[error("cascade did not converge: {0}")]
    Convergence(String),

    /// Incompatible boxes, scale ranges or dimensions.
    #[error("geometry mismatch: {0}")]
    Geometry(String),

    /// The sampling grid cannot resolve the requested functions.
    #[error("insufficient resolution: {0}")]
    Precision(String),

    /// Kernel probe points are degenerate (on the diagonal, or invalid shifts).
    #[error("degenerate probe: {0}")]
    Probe(String),

    /// The wavelet system lacks the smoothness needed for a check.
    #[error("capability: {0}")]
    Capability(String),

    /// An input violates the precondition of an operation.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// Input is not posed on the periodic unit torus, or has nonzero mean.
    #[error("domain: {0}")]
    Domain(String),

    /// Parse failure for one of the plain-text or JSON formats.
    #[error("parse error: {0}")]
    Parse(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn range_err(name: &'static str, detail: impl Into<String>) -> Error {
    Error::Range {
        name,
        detail: detail.into(),
    }
}
