//! Dual decomposition for separable equality-constrained problems
//! `min Σ h_i(y^i)` subject to `Σ A_i y^i = b`, `y^i ∈ Y_i`.
//!
//! The dual function is `Q(λ) = Σ q_i(λ)` with
//! `q_i(λ) = min_{y∈Y_i} h_i(y) + λ'(A_i y − b_i)`, and every method here is
//! a primal method applied to `−Q`: IADG is IAG, IAL is IP and IAAL is IAP.
//! ADMM and its diagonally scaled form live in [`admm`].

pub mod admm;

use std::fmt;
use std::str::FromStr;

use log::warn;

use crate::delay::{DelayEngine, DelaySchedule};
use crate::error::{check_dim, Error, Result};
use crate::inner::{minimize_smooth, quadratic_argmin, InnerOptions};
use crate::linalg::{solve_spd, Matrix, Vector};
use crate::primal::{halving_search, probe_verdict, StepRule, Tuning, PROBE_ITERATIONS};
use crate::problem::{Block, ConstraintKind, SeparableProblem};
use crate::trace::{Trace, TraceKind, TraceRow};

pub use admm::{AdmmSolver, AdmmState, AdmmVariant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DualAlgorithm {
    Iadg,
    Ial,
    Iaal,
    /// IAAL with a full Gauss-Seidel pass over the blocks per multiplier update.
    IaalCycle,
    Admm,
    AdmmScaled,
}

impl DualAlgorithm {
    pub const ALL: [Self; 6] = [
        Self::Iadg,
        Self::Ial,
        Self::Iaal,
        Self::IaalCycle,
        Self::Admm,
        Self::AdmmScaled,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Self::Iadg => "iadg",
            Self::Ial => "ial",
            Self::Iaal => "iaal",
            Self::IaalCycle => "iaal_cycle",
            Self::Admm => "admm",
            Self::AdmmScaled => "admm_scaled",
        }
    }
}

impl fmt::Display for DualAlgorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for DualAlgorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|a| a.tag() == s)
            .ok_or_else(|| Error::Config(format!("unknown dual algorithm `{s}`")))
    }
}

/// Value, gradient and minimizer of one dual component.
#[derive(Debug, Clone, PartialEq)]
pub struct DualComponent {
    pub value: f64,
    pub gradient: Vector,
    pub y: Vector,
}

/// `q_i(λ)`, `∇q_i(λ) = A_i y(λ) − b_i` and `y(λ)`.
pub fn dual_component(
    problem: &SeparableProblem,
    i: usize,
    lambda: &Vector,
    inner: &InnerOptions,
) -> Result<DualComponent> {
    check_dim("multiplier", problem.rows(), lambda.len())?;
    let blk = problem.block(i);
    let tilt = blk.a.transpose() * lambda;
    let y = match blk.objective.as_quadratic() {
        Some((q, c, _)) => quadratic_argmin(q, &(c + &tilt), &blk.set, None, inner)?,
        None => {
            let h = &blk.objective;
            let start = blk.default_start();
            minimize_smooth(
                |y| {
                    h.gradient(y)
                        .map(|g| g + &tilt)
                        .unwrap_or_else(|_| Vector::from_element(y.len(), f64::NAN))
                },
                &start,
                &blk.set,
                inner,
            )?
        }
    };
    let gradient = blk.constraint_value(&y);
    let value = blk.objective.evaluate(&y)? + lambda.dot(&gradient);
    Ok(DualComponent { value, gradient, y })
}

/// `Q(λ)` with its gradient and the block minimizers.
pub fn dual_function(problem: &SeparableProblem, lambda: &Vector, inner: &InnerOptions) -> Result<DualComponent> {
    let mut total = DualComponent {
        value: 0.0,
        gradient: Vector::zeros(problem.rows()),
        y: Vector::zeros(0),
    };
    for i in 0..problem.m() {
        let c = dual_component(problem, i, lambda, inner)?;
        total.value += c.value;
        total.gradient += c.gradient;
    }
    Ok(total)
}

/// `argmin_{y∈Y} h(y) + λ'Ay + (α/2)‖Ay − v‖²`, the block step shared by
/// every augmented Lagrangian method here.
pub fn block_al_argmin(
    blk: &Block,
    lambda: &Vector,
    alpha: f64,
    v: &Vector,
    start: &Vector,
    inner: &InnerOptions,
) -> Result<Vector> {
    let at = blk.a.transpose();
    match blk.objective.as_quadratic() {
        Some((q, c, _)) => {
            let p = q + &at * &blk.a * alpha;
            let r = c + &at * (lambda - v * alpha);
            quadratic_argmin(&p, &r, &blk.set, Some(start), inner)
        }
        None => {
            let h = &blk.objective;
            minimize_smooth(
                |y| {
                    let g = h
                        .gradient(y)
                        .unwrap_or_else(|_| Vector::from_element(y.len(), f64::NAN));
                    g + &at * (lambda + (&blk.a * y - v) * alpha)
                },
                start,
                &blk.set,
                inner,
            )
        }
    }
}

/// Iterate bundle of a dual run.
#[derive(Debug, Clone)]
pub struct DualState {
    pub lambda: Vector,
    pub y: Vec<Vector>,
    pub k: usize,
    /// Translated multiplier `λ_k + α Σ_{i≠i_k} ∇q_i(λ_{ℓ_i})` of the last
    /// IAAL step.
    pub nu: Option<Vector>,
    multiplier_engine: Option<DelayEngine<Vector>>,
    block_engine: Option<DelayEngine<Vec<Vector>>>,
    evaluations: usize,
}

impl DualState {
    /// Slots `A_i y^i − b_i` of the delayed table, when the method has one.
    pub fn table_slots(&self) -> Option<&[Vector]> {
        self.multiplier_engine
            .as_ref()
            .map(|e| e.table().slots())
            .or_else(|| self.block_engine.as_ref().map(|e| e.table().slots()))
    }

    pub fn evaluations(&self) -> usize {
        self.evaluations
            + self.multiplier_engine.as_ref().map_or(0, DelayEngine::evaluations)
            + self.block_engine.as_ref().map_or(0, DelayEngine::evaluations)
    }
}

/// What a dual step did.
#[derive(Debug, Clone, PartialEq)]
pub struct DualStepInfo {
    pub index: Option<usize>,
    pub alpha: f64,
    pub staleness: usize,
    /// Residual the multiplier moved along: `λ_{k+1} = λ_k + α · residual`.
    pub residual_used: Vector,
}

/// Stopping and divergence thresholds for dual runs.
#[derive(Debug, Clone, PartialEq)]
pub struct DualRunOptions {
    pub max_iter: usize,
    /// Stop once `‖Σ A_i y^i − b‖ ≤ tol` and, with a known solution,
    /// `‖λ_k − λ*‖ ≤ tol`.
    pub tol: Option<f64>,
    pub divergence: f64,
    pub record_iterates: bool,
}

impl Default for DualRunOptions {
    fn default() -> Self {
        Self {
            max_iter: 50_000,
            tol: Some(1e-6),
            divergence: 1e12,
            record_iterates: false,
        }
    }
}

/// IADG, IAL, IAAL and the IAAL full-cycle variant.
#[derive(Debug, Clone)]
pub struct DualSolver<'a> {
    problem: &'a SeparableProblem,
    algorithm: DualAlgorithm,
    schedule: DelaySchedule,
    rule: StepRule,
    inner: InnerOptions,
}

impl<'a> DualSolver<'a> {
    /// Constant stepsizes for IAAL need a strongly concave dual; otherwise the
    /// rule is switched to a diminishing one with the same initial value.
    pub fn new(
        problem: &'a SeparableProblem,
        algorithm: DualAlgorithm,
        schedule: DelaySchedule,
        rule: StepRule,
    ) -> Result<Self> {
        if problem.kind() != ConstraintKind::Equality {
            return Err(Error::Unsupported(
                "dual methods here handle equality constraints".into(),
            ));
        }
        if matches!(algorithm, DualAlgorithm::Admm | DualAlgorithm::AdmmScaled) {
            return Err(Error::Unsupported("use AdmmSolver for ADMM".into()));
        }
        if matches!(rule, StepRule::Diagonal(_)) {
            return Err(Error::Unsupported("dual methods take a scalar stepsize".into()));
        }
        rule.validate(1)?;
        let rule = match rule {
            StepRule::Constant(a)
                if matches!(algorithm, DualAlgorithm::Iaal | DualAlgorithm::IaalCycle)
                    && !problem.strongly_concave_dual() =>
            {
                warn!("dual is not strongly concave; IAAL switched to a diminishing stepsize");
                StepRule::Diminishing(a)
            }
            r => r,
        };
        Ok(Self {
            problem,
            algorithm,
            schedule,
            rule,
            inner: InnerOptions::default(),
        })
    }

    pub fn with_inner(mut self, inner: InnerOptions) -> Self {
        self.inner = inner;
        self
    }

    pub fn rule(&self) -> &StepRule {
        &self.rule
    }

    pub fn start(&self, lambda0: &Vector, y0: Option<Vec<Vector>>) -> Result<DualState> {
        let p = self.problem;
        check_dim("initial multiplier", p.rows(), lambda0.len())?;
        let mut y = y0.unwrap_or_else(|| p.initial_blocks());
        check_dim("initial blocks", p.m(), y.len())?;
        let mut multiplier_engine = None;
        let mut block_engine = None;
        match self.algorithm {
            DualAlgorithm::Iadg => {
                let inner = self.inner;
                let ys = &mut y;
                multiplier_engine = Some(DelayEngine::new(self.schedule, p.m(), lambda0, |i, lam| {
                    let c = dual_component(p, i, lam, &inner)?;
                    ys[i] = c.y;
                    Ok(c.gradient)
                })?);
            }
            DualAlgorithm::Iaal => {
                block_engine = Some(DelayEngine::new(self.schedule, p.m(), &y, |i, ys: &Vec<Vector>| {
                    Ok(p.block(i).constraint_value(&ys[i]))
                })?);
            }
            _ => {}
        }
        Ok(DualState {
            lambda: lambda0.clone(),
            y,
            k: 0,
            nu: None,
            multiplier_engine,
            block_engine,
            evaluations: 0,
        })
    }

    pub fn step(&self, state: &mut DualState) -> Result<DualStepInfo> {
        let p = self.problem;
        let k = state.k;
        let alpha = self.rule.scalar_at(k);
        let inner = self.inner;
        let info = match self.algorithm {
            DualAlgorithm::Iadg => {
                let engine = state.multiplier_engine.as_mut().expect("IADG owns a table");
                let i = engine.select(k);
                let ys = &mut state.y;
                engine.prepare(k, &state.lambda, i, true, |j, lam| {
                    let c = dual_component(p, j, lam, &inner)?;
                    ys[j] = c.y;
                    Ok(c.gradient)
                })?;
                if engine.table().stamps()[i] < k {
                    let fresh = dual_component(p, i, &state.lambda, &inner)?;
                    engine.count_evaluation();
                    state.y[i] = fresh.y;
                    engine.refresh(i, fresh.gradient, k);
                }
                let staleness = engine.staleness(k);
                let residual_used = engine.table().aggregate().clone();
                state.lambda += &residual_used * alpha;
                DualStepInfo {
                    index: Some(i),
                    alpha,
                    staleness,
                    residual_used,
                }
            }
            DualAlgorithm::Ial => {
                let i = self.schedule.select(k, p.m());
                let blk = p.block(i);
                let y = block_al_argmin(blk, &state.lambda, alpha, &blk.b, &state.y[i], &inner)?;
                state.evaluations += 1;
                let residual_used = blk.constraint_value(&y);
                state.y[i] = y;
                state.lambda += &residual_used * alpha;
                DualStepInfo {
                    index: Some(i),
                    alpha,
                    staleness: 0,
                    residual_used,
                }
            }
            DualAlgorithm::Iaal => {
                let engine = state.block_engine.as_mut().expect("IAAL owns a table");
                let i = engine.select(k);
                engine.prepare(k, &state.y, i, false, |j, ys: &Vec<Vector>| {
                    Ok(p.block(j).constraint_value(&ys[j]))
                })?;
                let staleness = engine.staleness(k);
                let others = engine.table().sum_except(i);
                let blk = p.block(i);
                let v = &blk.b - &others;
                let y = block_al_argmin(blk, &state.lambda, alpha, &v, &state.y[i], &inner)?;
                state.evaluations += 1;
                let own = blk.constraint_value(&y);
                let residual_used = &own + &others;
                state.nu = Some(&state.lambda + &others * alpha);
                state.y[i] = y;
                engine.refresh(i, own, k + 1);
                state.lambda += &residual_used * alpha;
                DualStepInfo {
                    index: Some(i),
                    alpha,
                    staleness,
                    residual_used,
                }
            }
            DualAlgorithm::IaalCycle => {
                let mut values: Vec<Vector> = p
                    .blocks()
                    .iter()
                    .zip(&state.y)
                    .map(|(b, y)| b.constraint_value(y))
                    .collect();
                let mut total = values.iter().fold(Vector::zeros(p.rows()), |acc, v| acc + v);
                // Indexes blocks, values and iterates together.
                #[allow(clippy::needless_range_loop)]
                for i in 0..p.m() {
                    let blk = p.block(i);
                    let others = &total - &values[i];
                    let v = &blk.b - &others;
                    let y = block_al_argmin(blk, &state.lambda, alpha, &v, &state.y[i], &inner)?;
                    state.evaluations += 1;
                    values[i] = blk.constraint_value(&y);
                    total = others + &values[i];
                    state.y[i] = y;
                }
                let residual_used = p.residual(&state.y);
                state.lambda += &residual_used * alpha;
                DualStepInfo {
                    index: None,
                    alpha,
                    staleness: 0,
                    residual_used,
                }
            }
            DualAlgorithm::Admm | DualAlgorithm::AdmmScaled => unreachable!("rejected in new"),
        };
        state.k += 1;
        Ok(info)
    }

    /// Iterate from `lambda0` (blocks start at their default points).
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
                trace.evaluations = state.evaluations();
                return Err(Error::Diverged {
                    iteration: state.k,
                    trace: Box::new(trace),
                });
            }
            if done {
                break;
            }
        }
        trace.evaluations = state.evaluations();
        Ok(trace)
    }
}

pub(crate) fn dual_row(
    problem: &SeparableProblem,
    lambda: &Vector,
    y: &[Vector],
    k: usize,
    info: Option<&DualStepInfo>,
) -> TraceRow {
    let residual = problem.residual(y).norm();
    let err = problem.known().map(|s| (lambda - &s.lambda).norm());
    TraceRow {
        k,
        index: info.and_then(|i| i.index),
        alpha: info.map(|i| i.alpha),
        err,
        obj: residual,
        staleness: info.map_or(0, |i| i.staleness),
        mu_min: None,
        x_min: None,
    }
}

pub(crate) fn dual_converged(row: &TraceRow, tol: Option<f64>) -> bool {
    match tol {
        Some(t) => row.obj <= t && row.err.is_none_or(|e| e <= t),
        None => false,
    }
}

pub(crate) fn dual_diverged(lambda: &Vector, y: &[Vector], threshold: f64) -> bool {
    let n = lambda.norm();
    !n.is_finite() || n > threshold || y.iter().any(|v| !v.norm().is_finite() || v.norm() > threshold)
}

/// Halving search for a constant dual stepsize, starting at `1/L` of the dual.
pub fn tune_dual_stepsize(
    problem: &SeparableProblem,
    algorithm: DualAlgorithm,
    schedule: DelaySchedule,
) -> Result<Tuning> {
    let lipschitz = problem
        .dual_lipschitz()
        .ok_or_else(|| Error::Precondition("dual tuning needs quadratic blocks over free sets".into()))?;
    if problem.known().is_none() {
        return Err(Error::OracleUnavailable("dual tuning needs a known multiplier".into()));
    }
    let burn_in = 2 * schedule.bound(problem.m()) + problem.m();
    let lambda0 = Vector::zeros(problem.rows());
    halving_search(1.0 / lipschitz, |alpha| {
        let solver = DualSolver::new(problem, algorithm, schedule, StepRule::Constant(alpha)).ok()?;
        let opts = DualRunOptions {
            max_iter: PROBE_ITERATIONS,
            tol: Some(0.0),
            ..DualRunOptions::default()
        };
        solver
            .run(&lambda0, &opts)
            .ok()
            .and_then(|t| probe_verdict(&t.errors(), burn_in))
    })
}

/// Outcome of running the augmented Lagrangian two-step form beside the
/// explicit proximal recursion on the dual.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProxAlCheck {
    /// `max_k ‖λ_k^AL − λ_k^prox‖∞`.
    pub max_deviation: f64,
    /// `max_k ‖(λ_{k+1} − λ_k)/α − (A y_{k+1} − b)‖∞` and the same against
    /// `∇Q(λ_{k+1})`.
    pub max_gradient_gap: f64,
}

/// Compare the augmented Lagrangian method with the proximal point method on
/// the closed-form dual of a one-block quadratic problem over a free set.
pub fn prox_al_equivalence_check(
    problem: &SeparableProblem,
    lambda0: &Vector,
    alpha: f64,
    steps: usize,
) -> Result<ProxAlCheck> {
    if problem.m() != 1 {
        return Err(Error::Precondition("the check needs a single block".into()));
    }
    let blk = problem.block(0);
    let (q, c, _) = blk
        .objective
        .as_quadratic()
        .filter(|_| blk.set.is_free())
        .ok_or_else(|| Error::Precondition("the check needs a quadratic block over a free set".into()))?;
    let chol = q
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Precondition("the check needs a positive definite block".into()))?;
    let r = problem.rows();
    let qinv_c = chol.solve(c);
    let qinv_at = chol.solve(&blk.a.transpose());
    let curvature: Matrix = &blk.a * &qinv_at;
    let system = &curvature + Matrix::identity(r, r) / alpha;
    let y_of = |lam: &Vector| -(&qinv_at * lam + &qinv_c);
    let inner = InnerOptions::default();

    let mut lam_al = lambda0.clone();
    let mut lam_prox = lambda0.clone();
    let mut y = blk.default_start();
    let mut check = ProxAlCheck {
        max_deviation: 0.0,
        max_gradient_gap: 0.0,
    };
    for _ in 0..steps {
        y = block_al_argmin(blk, &lam_al, alpha, &blk.b, &y, &inner)?;
        let u = blk.constraint_value(&y);
        let next_al = &lam_al + &u * alpha;

        let rhs = &lam_prox / alpha - &blk.a * &qinv_c - &blk.b;
        let next_prox = solve_spd(&system, &rhs)
            .ok_or_else(|| Error::OracleUnavailable("dual proximal system is singular".into()))?;
        let dual_grad = &blk.a * y_of(&next_prox) - &blk.b;
        let step_ratio = (&next_prox - &lam_prox) / alpha;

        check.max_gradient_gap = check
            .max_gradient_gap
            .max(((&next_al - &lam_al) / alpha - &u).amax())
            .max((step_ratio - dual_grad).amax());
        lam_al = next_al;
        lam_prox = next_prox;
        check.max_deviation = check.max_deviation.max((&lam_al - &lam_prox).amax());
    }
    Ok(check)
}

#[cfg(test)]
mod tests;
