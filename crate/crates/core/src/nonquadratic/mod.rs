//! Nonquadratic penalties: the exponential method of multipliers for
//! inequality-constrained separable problems (with its incremental aggregated
//! form, IAALI), and the entropy-regularized aggregated methods for
//! minimization over the nonnegative orthant.

pub mod entropy;
pub mod multiplier;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub use entropy::{
    entropy_iag_step, entropy_iap_step, heuristic_stepsizes, optimality_residual, projected_iag_step,
    quadratic_limit_deviation, CoordinateStepsizes, EntropySolver, EntropyState, DEFAULT_DELTA, XBAR_REFRESH,
};
pub use multiplier::{
    exp_al_step, exp_multiplier_duality_check, penalized_block_argmin, MultiplierSolver, MultiplierState,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PositiveAlgorithm {
    /// Exponential method of multipliers (one block).
    ExpAl,
    Iaali,
    EntropyIap,
    EntropyIag,
    /// Aggregated gradient step followed by projection on the orthant.
    ProjIag,
}

impl PositiveAlgorithm {
    pub const ALL: [Self; 5] = [
        Self::ExpAl,
        Self::Iaali,
        Self::EntropyIap,
        Self::EntropyIag,
        Self::ProjIag,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Self::ExpAl => "exp_al",
            Self::Iaali => "iaali",
            Self::EntropyIap => "entropy_iap",
            Self::EntropyIag => "entropy_iag",
            Self::ProjIag => "proj_iag",
        }
    }

    /// Whether the method works on multipliers of a separable problem.
    pub fn is_multiplier_method(self) -> bool {
        matches!(self, Self::ExpAl | Self::Iaali)
    }
}

impl fmt::Display for PositiveAlgorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for PositiveAlgorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|a| a.tag() == s)
            .ok_or_else(|| Error::Config(format!("unknown algorithm `{s}`")))
    }
}
