use thiserror::Error;

/// Errors raised by the analysis routines.
///
/// CLI exit status 2 covers every variant except [`Error::Verdict`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unsupported polygon shape: {0}")]
    UnsupportedShape(String),

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("leading tau coefficient vanishes: A_2m(0,...,0,1) = {0}")]
    NotEllipticInXiN(f64),

    #[error("malformed pencil: {0}")]
    MalformedPencil(String),

    #[error("root {root} lies within {tol:e} of the real axis")]
    RealAxisRoot { root: String, tol: f64 },

    #[error("expected {expected} roots in the upper half-plane, found {found}")]
    UpperRootCount { expected: usize, found: usize },

    #[error("eigenvalue iteration did not converge")]
    NoConvergence,

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("grouping does not match solution roots: {0}")]
    GroupingMismatch(String),

    #[error("verification verdict failed: {0}")]
    Verdict(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
