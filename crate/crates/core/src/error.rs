use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Argument outside the domain of a special function (pole, negative order, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Result exceeds the representable range of `f64`.
    #[error("overflow: {0}")]
    Overflow(String),

    /// Meijer G parameter block that cannot be evaluated on a vertical contour.
    #[error("invalid Meijer G parameters: {0}")]
    MeijerConstruction(String),

    /// A numerical evaluation could not reach its tolerance; never a silent wrong value.
    #[error("evaluation failed: {0}")]
    Evaluation(String),

    #[error("quadrature tolerance not met: value {value:e}, error {err:e}, tolerance {tol:e}")]
    ToleranceNotMet { value: f64, err: f64, tol: f64 },

    #[error("series did not converge after {terms} terms: {reason}")]
    SeriesNonConvergence { terms: usize, reason: String },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// A probability left `[0, 1]` by more than its own error estimate.
    #[error("probability {value:e} outside [0, 1] beyond its error estimate {err:e}")]
    OutOfRange { value: f64, err: f64 },

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// Innermost error, skipping context wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            other => other,
        }
    }
}

pub(crate) trait ResultExt<T> {
    fn context(self, context: impl FnOnce() -> String) -> Result<T>;
}

impl<T> ResultExt<T> for Result<T> {
    fn context(self, context: impl FnOnce() -> String) -> Result<T> {
        self.map_err(|e| e.context(context()))
    }
}
