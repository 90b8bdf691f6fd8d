use thiserror::Error;

/// Failure modes shared by every module.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported order {order} (maximum {max})")]
    UnsupportedOrder { order: usize, max: usize },

    #[error("quadrature did not converge: estimate {estimate:e}, error {error:e}")]
    Accuracy { estimate: f64, error: f64 },

    #[error("invalid configuration: {field}: {reason}")]
    Configuration { field: String, reason: String },

    #[error("sampling error: {0}")]
    Sampling(String),

    #[error("timing error: {0}")]
    Timing(String),

    #[error("resolution error: {0}")]
    Resolution(String),

    #[error("step budget exceeded: {0}")]
    Budget(String),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("singular configuration: {0}")]
    Singular(String),

    #[error("evaluation point rejected: {0}")]
    EvaluationPoint(String),

    #[error("tail mass {mass:e} exceeds bound {bound:e}")]
    TailMass { mass: f64, bound: f64 },

    #[error("domain too small: {0}")]
    DomainSize(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Configuration {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// True for errors caused by user input rather than numerical failure.
    pub fn is_configuration(&self) -> bool {
        matches!(self, Error::Configuration { .. } | Error::Io(_))
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
