use thiserror::Error;

/// Errors shared by all modules.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A generation method cannot be applied to the given inputs; the message
    /// names the fallback where one exists.
    #[error("method error: {0}")]
    Method(String),

    /// A numerical procedure did not reach its tolerance. The best available
    /// estimate and its error indicator are attached.
    #[error("numeric error: {what} (estimate {estimate:e}, indicator {indicator:e})")]
    Numeric {
        what: String,
        estimate: f64,
        indicator: f64,
    },

    /// An estimator bandwidth or step size falls below the resolution of the
    /// discretized input.
    #[error("resolution error: {0}")]
    Resolution(String),

    /// Discretization too coarse for a stable integration step.
    #[error("stability error: {0}")]
    Stability(String),

    /// The input shape is valid but not supported by this operation.
    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
