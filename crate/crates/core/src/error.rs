use thiserror::Error;

use crate::trace::Trace;

/// Errors raised by problem construction, solvers and oracles.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid instance: {0}")]
    Instance(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("inner solver stopped after {iterations} iterations with residual {residual:e}")]
    InnerSolver { iterations: usize, residual: f64 },

    /// The minimization defining a dual component (or any block subproblem)
    /// is unbounded below; `direction` is a recession direction certifying it.
    #[error("subproblem unbounded below along direction {direction:?}")]
    Unbounded { direction: Vec<f64> },

    /// The iterate norm exceeded the divergence threshold. The trace up to
    /// that point is kept so callers can still write it out.
    #[error("iteration diverged at k = {iteration}")]
    Diverged { iteration: usize, trace: Box<Trace> },

    #[error("stepsize tuning failed: no stepsize above {floor:e} passed the probe")]
    TuningFailed { floor: f64 },

    #[error("oracle unavailable: {0}")]
    OracleUnavailable(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_dim(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        })
    }
}
