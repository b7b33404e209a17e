//! Incremental aggregated proximal and augmented Lagrangian methods.
//!
//! The library covers sums of convex components (IAP, IAG and their plain
//! incremental relatives), separable equality and inequality constrained
//! problems (dual gradient, augmented Lagrangian and ADMM variants) and
//! exponential and entropy methods on the nonnegative orthant. All
//! aggregated methods share a delay engine with a bounded staleness
//! contract. The `analysis` and `suite` modules fit rates, solve reference
//! KKT systems and check the solvers against each other.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod config;
pub mod delay;
pub mod dual;
pub mod error;
pub mod experiment;
pub mod inner;
pub mod instances;
pub mod linalg;
pub mod nonquadratic;
pub mod primal;
pub mod problem;
pub mod suite;
pub mod trace;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/problems.md")]
    mod problems {}
    #[doc = include_str!("../../../book/src/delays.md")]
    mod delays {}
    #[doc = include_str!("../../../book/src/primal.md")]
    mod primal {}
    #[doc = include_str!("../../../book/src/dual.md")]
    mod dual {}
    #[doc = include_str!("../../../book/src/nonquadratic.md")]
    mod nonquadratic {}
    #[doc = include_str!("../../../book/src/analysis.md")]
    mod analysis {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
