use thiserror::Error;

/// Errors raised by the formula evaluators, integrators and simulators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The formula has a genuine singularity at the requested point (e.g. `x = y`).
    #[error("singular input: {0}")]
    Singular(String),

    #[error("point {point:?} is outside the domain")]
    OutsideDomain { point: Vec<f64> },

    /// Returned by threshold computations when the jump weight is zero.
    #[error("no finite regime threshold for jump weight a = 0")]
    NoFiniteThreshold,

    #[error(
        "quadrature did not converge: value {value}, error estimate {abs_error}, {evaluations} evaluations ({reason})"
    )]
    NonConvergence {
        value: f64,
        abs_error: f64,
        evaluations: usize,
        reason: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
