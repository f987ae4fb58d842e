use thiserror::Error;

/// Errors raised by the estimator, error-criterion and bandwidth routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The inputs are valid individually but the combination is not supported
    /// by the formula being evaluated.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The requested computation needs an assumption the inputs do not meet.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Adaptive quadrature ran out of subdivisions before meeting its tolerance.
    #[error("quadrature did not converge for {what} (value {value:e}, error estimate {error:e})")]
    Quadrature {
        what: &'static str,
        value: f64,
        error: f64,
    },

    /// A sampler exhausted its proposal budget.
    #[error("sampler error: {0}")]
    Sampler(String),

    /// A name did not match any catalog entry.
    #[error("unknown {kind} `{name}`; expected one of: {expected}")]
    UnknownName {
        kind: &'static str,
        name: String,
        expected: &'static str,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
