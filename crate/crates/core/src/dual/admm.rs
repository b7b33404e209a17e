//! ADMM for separable problems and its diagonally scaled form.
//!
//! Every block is updated from the same multiplier, so the block
//! minimizations within a step are independent; the multiplier update is the
//! synchronization point.

use crate::error::{check_dim, Error, Result};
use crate::inner::InnerOptions;
use crate::linalg::Vector;
use crate::problem::{ConstraintKind, SeparableProblem};
use crate::trace::{Trace, TraceKind};

use super::{block_al_argmin, dual_converged, dual_diverged, dual_row, DualRunOptions, DualStepInfo};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdmmVariant {
    /// Multiplier step `α/m` on every row.
    Plain,
    /// Multiplier step `α/m_j` on row `j`, `m_j` counting blocks that touch it.
    Scaled,
}

#[derive(Debug, Clone)]
pub struct AdmmState {
    pub lambda: Vector,
    pub y: Vec<Vector>,
    /// Per-block targets `z^i` (scaled variant).
    pub z: Vec<Vector>,
    pub k: usize,
}

#[derive(Debug, Clone)]
pub struct AdmmSolver<'a> {
    problem: &'a SeparableProblem,
    variant: AdmmVariant,
    alpha: f64,
    row_counts: Vec<usize>,
    inner: InnerOptions,
}

impl<'a> AdmmSolver<'a> {
    pub fn new(problem: &'a SeparableProblem, variant: AdmmVariant, alpha: f64) -> Result<Self> {
        if problem.kind() != ConstraintKind::Equality {
            return Err(Error::Unsupported("ADMM here handles equality constraints".into()));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::Config(format!("ADMM stepsize must be positive, got {alpha}")));
        }
        Ok(Self {
            problem,
            variant,
            alpha,
            row_counts: problem.nonzero_row_counts(),
            inner: InnerOptions::default(),
        })
    }

    pub fn with_inner(mut self, inner: InnerOptions) -> Self {
        self.inner = inner;
        self
    }

    /// `m_j` for each constraint row.
    pub fn row_counts(&self) -> &[usize] {
        &self.row_counts
    }

    // Per-row divisor of the multiplier step.
    fn divisors(&self) -> Vector {
        let m = self.problem.m() as f64;
        match self.variant {
            AdmmVariant::Plain => Vector::from_element(self.problem.rows(), m),
            AdmmVariant::Scaled => {
                Vector::from_iterator(self.row_counts.len(), self.row_counts.iter().map(|&c| c.max(1) as f64))
            }
        }
    }

    /// Start at `lambda0` and `y0` (default block points when absent). The
    /// targets start at `A_i y^i_0 − (Σ_j A_j y^j_0 − b)/m_j` row by row, the
    /// point the plain method would aim at.
    pub fn start(&self, lambda0: &Vector, y0: Option<Vec<Vector>>) -> Result<AdmmState> {
        let p = self.problem;
        check_dim("initial multiplier", p.rows(), lambda0.len())?;
        let y = y0.unwrap_or_else(|| p.initial_blocks());
        check_dim("initial blocks", p.m(), y.len())?;
        let shift = p.residual(&y).component_div(&self.divisors());
        let z = p.blocks().iter().zip(&y).map(|(b, yi)| &b.a * yi - &shift).collect();
        Ok(AdmmState {
            lambda: lambda0.clone(),
            y,
            z,
            k: 0,
        })
    }

    pub fn step(&self, state: &mut AdmmState) -> Result<DualStepInfo> {
        let p = self.problem;
        let alpha = self.alpha;
        let targets: Vec<Vector> = match self.variant {
            AdmmVariant::Plain => {
                let shift = p.residual(&state.y) / p.m() as f64;
                p.blocks()
                    .iter()
                    .zip(&state.y)
                    .map(|(b, yi)| &b.a * yi - &shift)
                    .collect()
            }
            AdmmVariant::Scaled => state.z.clone(),
        };
        let y_next = p
            .blocks()
            .iter()
            .zip(&targets)
            .zip(&state.y)
            .map(|((blk, target), yi)| block_al_argmin(blk, &state.lambda, alpha, target, yi, &self.inner))
            .collect::<Result<Vec<_>>>()?;
        let residual = p.residual(&y_next);
        let step = residual.component_div(&self.divisors()) * alpha;
        let lambda_next = &state.lambda + &step;
        if self.variant == AdmmVariant::Scaled {
            state.z = p
                .blocks()
                .iter()
                .zip(&y_next)
                .map(|(b, yi)| &b.a * yi - &step / alpha)
                .collect();
        }
        state.y = y_next;
        state.lambda = lambda_next;
        state.k += 1;
        Ok(DualStepInfo {
            index: None,
            alpha,
            staleness: 0,
            residual_used: residual,
        })
    }

    pub fn run(&self, lambda0: &Vector, opts: &DualRunOptions) -> Result<Trace> {
        let mut state = self.start(lambda0, None)?;
        let mut trace = Trace::new(TraceKind::Dual);
        trace
            .rows
            .push(dual_row(self.problem, &state.lambda, &state.y, 0, None));
        if opts.record_iterates {
            trace.iterates.push(state.lambda.clone());
        }
        while state.k < opts.max_iter {
            let info = self.step(&mut state)?;
            let row = dual_row(self.problem, &state.lambda, &state.y, state.k, Some(&info));
            let done = dual_converged(&row, opts.tol);
            trace.rows.push(row);
            if opts.record_iterates {
                trace.iterates.push(state.lambda.clone());
            }
            if dual_diverged(&state.lambda, &state.y, opts.divergence) {
                trace.evaluations = state.k * self.problem.m();
                return Err(Error::Diverged {
                    iteration: state.k,
                    trace: Box::new(trace),
                });
            }
            if done {
                break;
            }
        }
        trace.evaluations = state.k * self.problem.m();
        Ok(trace)
    }
}

/// Largest multiplier and block deviation between plain and scaled ADMM run
/// in lockstep for `steps` iterations.
pub fn admm_scaled_deviation(problem: &SeparableProblem, alpha: f64, steps: usize) -> Result<f64> {
    let plain = AdmmSolver::new(problem, AdmmVariant::Plain, alpha)?;
    let scaled = AdmmSolver::new(problem, AdmmVariant::Scaled, alpha)?;
    let lambda0 = Vector::zeros(problem.rows());
    let mut a = plain.start(&lambda0, None)?;
    let mut b = scaled.start(&lambda0, None)?;
    let mut worst: f64 = 0.0;
    for _ in 0..steps {
        plain.step(&mut a)?;
        scaled.step(&mut b)?;
        worst = worst.max((&a.lambda - &b.lambda).amax());
        for (ya, yb) in a.y.iter().zip(&b.y) {
            worst = worst.max((ya - yb).amax());
        }
    }
    Ok(worst)
}
