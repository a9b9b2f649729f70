use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the discretization, integrators and drivers.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("time {t} outside the interval [{lower}, {upper}] covered by the state")]
    OutOfRange { t: f64, lower: f64, upper: f64 },

    /// A user supplied coefficient or history function failed or produced
    /// non-finite values.
    #[error("evaluation failed: {0}")]
    Evaluation(String),

    #[error("non-finite state in interval {interval} at step {step}")]
    NonFiniteState { interval: usize, step: usize },

    #[error("Magnus convergence bound exceeded: h*||A|| = {estimate:.3e} >= pi at t = {t}")]
    ConvergenceBound { t: f64, estimate: f64 },

    /// The QR iteration hit its cap; `partial` holds the eigenvalues that
    /// had already deflated.
    #[error("eigenvalue iteration did not converge after {iterations} sweeps ({} of {dim} values found)", partial.len())]
    NoConvergence {
        iterations: usize,
        dim: usize,
        partial: Vec<Complex64>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// `true` for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonFiniteState { .. } | Error::NoConvergence { .. } | Error::ConvergenceBound { .. }
        )
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
