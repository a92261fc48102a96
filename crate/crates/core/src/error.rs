use thiserror::Error;

/// Error type shared by all verification and computation routines.
#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on an argument was violated.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Evaluation was requested exactly at a pole.
    #[error("evaluation at a pole: {0}")]
    Pole(String),

    /// The input lies outside the numerically validated envelope.
    #[error("outside the validated domain: {0}")]
    UnsupportedDomain(String),

    /// Adaptive quadrature could not reach the requested tolerance.
    /// Carries the best available estimate and its error bound.
    #[error(
        "quadrature did not reach tolerance {tolerance:e}: \
         partial value {value} with error estimate {error:e}"
    )]
    ConvergenceFailure {
        value: f64,
        error: f64,
        tolerance: f64,
    },

    /// An intermediate link of a certified inequality chain failed.
    #[error("certification failed at `{link}`: value {value} violates threshold {threshold}")]
    CertificationFailure {
        link: &'static str,
        value: f64,
        threshold: f64,
    },

    /// A binary table cache could not be decoded.
    #[error("corrupt table cache: {0}")]
    CorruptCache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
