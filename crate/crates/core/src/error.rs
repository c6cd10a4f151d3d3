use thiserror::Error;

/// Errors raised by the numerical kernels and harnesses.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("divergent integral: {0}")]
    Divergence(String),

    #[error("separation failure: {0}")]
    Separation(String),

    #[error("root polishing did not converge (worst residual {worst_residual:e})")]
    Convergence { worst_residual: f64 },

    #[error("integrand not finite at node (r = {r}, theta = {theta})")]
    Evaluation { r: f64, theta: f64 },

    #[error("parameter gate failed: {0}")]
    Gate(String),

    #[error("cross-check failed: {0}")]
    CrossCheck(String),

    #[error("identity violated: {0}")]
    IdentityViolation(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
