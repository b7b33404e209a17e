//! Problem instances: finite sums, separable constrained problems, their
//! component functions, constraint sets and penalty functions.

mod component;
mod constraint;
mod penalty;
mod separable;
mod sum;

pub use component::{ComponentFunction, ComponentKind, GradientFn, ValueFn};
pub use constraint::ConstraintSet;
pub use penalty::{exp_clamped, PenaltySpec, EXP_CLAMP};
pub use separable::{Block, ConstraintKind, ConstraintMap, JacobianFn, KnownSolution, MapFn, SeparableProblem};
pub use sum::SumProblem;
