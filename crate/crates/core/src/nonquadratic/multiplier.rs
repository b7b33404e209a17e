//! Exponential method of multipliers and IAALI for
//! `min Σ h_i(y^i)` subject to `Σ_i g_i(y^i) ≤ 0`, `y^i ∈ Y_i`.

use log::warn;

use crate::delay::{DelayEngine, DelaySchedule};
use crate::dual::DualRunOptions;
use crate::dual::DualStepInfo;
use crate::error::{check_dim, Error, Result};
use crate::inner::{damped_newton, minimize_smooth, quadratic_argmin, InnerOptions};
use crate::linalg::{min_entry, Vector};
use crate::problem::{exp_clamped, Block, ConstraintKind, PenaltySpec, SeparableProblem};
use crate::trace::{Trace, TraceKind, TraceRow};

const PSI: PenaltySpec = PenaltySpec::Exponential;

fn nan_vector(n: usize) -> Vector {
    Vector::from_element(n, f64::NAN)
}

/// `argmin_{y∈Y} h(y) + Σ_j (μ_j/α_j) ψ(α_j (g_j(y) + shift_j))` with the
/// exponential `ψ`. Damped Newton on free blocks, projected gradient
/// otherwise.
pub fn penalized_block_argmin(
    blk: &Block,
    mu: &Vector,
    alphas: &Vector,
    shift: &Vector,
    start: &Vector,
    inner: &InnerOptions,
) -> Result<Vector> {
    let r = blk.rows();
    check_dim("multipliers", r, mu.len())?;
    check_dim("penalty parameters", r, alphas.len())?;
    check_dim("constraint shift", r, shift.len())?;
    if !blk.objective.has_gradient() {
        return Err(Error::Unsupported("penalized minimization needs gradients".into()));
    }
    let h = &blk.objective;
    let n = blk.dim();
    let args = |y: &Vector| (blk.constraint_value(y) + shift).component_mul(alphas);
    let value = |y: &Vector| {
        let u = args(y);
        let pen: f64 = (0..r).map(|j| mu[j] / alphas[j] * PSI.value(u[j])).sum();
        h.evaluate(y).map(|v| v + pen).unwrap_or(f64::NAN)
    };
    let grad = |y: &Vector| {
        let u = args(y);
        let weights = Vector::from_fn(r, |j, _| mu[j] * PSI.derivative(u[j]));
        match h.gradient(y) {
            Ok(g) => g + blk.constraint_jacobian(y).transpose() * weights,
            Err(_) => nan_vector(n),
        }
    };
    if !blk.set.is_free() {
        return minimize_smooth(grad, start, &blk.set, inner);
    }
    let hess = |y: &Vector| {
        let u = args(y);
        let jac = blk.constraint_jacobian(y);
        let mut hm = match h.hessian(y) {
            Ok(m) => m,
            Err(_) => return crate::linalg::Matrix::from_element(n, n, f64::NAN),
        };
        for j in 0..r {
            let row = jac.row(j).transpose();
            hm += &row * row.transpose() * (mu[j] * alphas[j] * PSI.second_derivative(u[j]));
            if !blk.is_affine() {
                hm += blk.constraint_hessian(y, j) * (mu[j] * PSI.derivative(u[j]));
            }
        }
        hm
    };
    damped_newton(value, grad, hess, start, inner)
}

/// `μ_j ψ'(α_j t_j)` with the exponent clamped and the result kept strictly
/// positive. Returns the new multipliers and whether any exponent was clamped.
fn multiplier_update(mu: &Vector, alphas: &Vector, total: &Vector) -> (Vector, bool) {
    let mut clamped = false;
    let next = Vector::from_fn(mu.len(), |j, _| {
        let (e, c) = exp_clamped(alphas[j] * total[j]);
        clamped |= c;
        (mu[j] * e).max(f64::MIN_POSITIVE)
    });
    (next, clamped)
}

fn validate_parameters(problem: &SeparableProblem, alphas: &Vector) -> Result<()> {
    if problem.kind() != ConstraintKind::Inequality {
        return Err(Error::Unsupported(
            "multiplier methods here handle inequality constraints".into(),
        ));
    }
    check_dim("penalty parameters", problem.rows(), alphas.len())?;
    if alphas.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
        return Err(Error::Config(format!(
            "penalty stepsize must be positive: {:?}",
            alphas.as_slice()
        )));
    }
    Ok(())
}

fn validate_multipliers(mu: &Vector) -> Result<()> {
    if mu.iter().any(|m| !(*m > 0.0 && m.is_finite())) {
        return Err(Error::Precondition(format!(
            "multipliers must be positive: {:?}",
            mu.as_slice()
        )));
    }
    Ok(())
}

/// One step of the exponential method of multipliers on a single-block
/// problem: `y⁺ = argmin H(y) + Σ_j (μ_j/α_j) ψ(α_j G_j(y))`, then
/// `μ_j⁺ = μ_j exp(α_j G_j(y⁺))`. Newton starts from `y`.
pub fn exp_al_step(
    problem: &SeparableProblem,
    mu: &Vector,
    alphas: &Vector,
    y: &Vector,
    inner: &InnerOptions,
) -> Result<(Vector, Vector)> {
    validate_parameters(problem, alphas)?;
    validate_multipliers(mu)?;
    if problem.m() != 1 {
        return Err(Error::Precondition(
            "the exponential method of multipliers takes one block".into(),
        ));
    }
    let blk = problem.block(0);
    let zero = Vector::zeros(problem.rows());
    let y_next = penalized_block_argmin(blk, mu, alphas, &zero, y, inner)?;
    let (mu_next, _) = multiplier_update(mu, alphas, &blk.constraint_value(&y_next));
    Ok((y_next, mu_next))
}

/// Iterate bundle of a multiplier run.
#[derive(Debug, Clone)]
pub struct MultiplierState {
    pub mu: Vector,
    pub y: Vec<Vector>,
    pub k: usize,
    engine: DelayEngine<Vec<Vector>>,
    clamped: usize,
    evaluations: usize,
}

impl MultiplierState {
    /// Stored constraint values `g_i(y^i_{ℓ_i})`.
    pub fn table_slots(&self) -> &[Vector] {
        self.engine.table().slots()
    }

    /// Steps in which an exponent hit the clamp.
    pub fn clamped_steps(&self) -> usize {
        self.clamped
    }

    pub fn evaluations(&self) -> usize {
        self.evaluations + self.engine.evaluations()
    }
}

/// IAALI with constant per-constraint penalty parameters. With one block it
/// is the exponential method of multipliers.
#[derive(Debug, Clone)]
pub struct MultiplierSolver<'a> {
    problem: &'a SeparableProblem,
    schedule: DelaySchedule,
    alphas: Vector,
    inner: InnerOptions,
}

impl<'a> MultiplierSolver<'a> {
    pub fn new(problem: &'a SeparableProblem, schedule: DelaySchedule, alphas: Vector) -> Result<Self> {
        validate_parameters(problem, &alphas)?;
        Ok(Self {
            problem,
            schedule,
            alphas,
            inner: InnerOptions::default(),
        })
    }

    pub fn with_inner(mut self, inner: InnerOptions) -> Self {
        self.inner = inner;
        self
    }

    pub fn start(&self, mu0: &Vector, y0: Option<Vec<Vector>>) -> Result<MultiplierState> {
        let p = self.problem;
        check_dim("initial multiplier", p.rows(), mu0.len())?;
        validate_multipliers(mu0)?;
        let y = y0.unwrap_or_else(|| p.initial_blocks());
        check_dim("initial blocks", p.m(), y.len())?;
        let engine = DelayEngine::new(self.schedule, p.m(), &y, |i, ys: &Vec<Vector>| {
            Ok(p.block(i).constraint_value(&ys[i]))
        })?;
        Ok(MultiplierState {
            mu: mu0.clone(),
            y,
            k: 0,
            engine,
            clamped: 0,
            evaluations: 0,
        })
    }

    pub fn step(&self, state: &mut MultiplierState) -> Result<DualStepInfo> {
        let p = self.problem;
        let k = state.k;
        let i = state.engine.select(k);
        state.engine.prepare(k, &state.y, i, false, |j, ys: &Vec<Vector>| {
            Ok(p.block(j).constraint_value(&ys[j]))
        })?;
        let staleness = state.engine.staleness(k);
        let shift = state.engine.table().sum_except(i);
        let blk = p.block(i);
        let y = penalized_block_argmin(blk, &state.mu, &self.alphas, &shift, &state.y[i], &self.inner)?;
        state.evaluations += 1;
        let own = blk.constraint_value(&y);
        let total = &own + &shift;
        let (mu, clamped) = multiplier_update(&state.mu, &self.alphas, &total);
        if clamped {
            state.clamped += 1;
            if state.clamped == 1 {
                warn!("multiplier exponent clamped at step {k}; the penalty parameter is likely too large");
            }
        }
        state.mu = mu;
        state.y[i] = y;
        state.engine.refresh(i, own, k + 1);
        state.k += 1;
        Ok(DualStepInfo {
            index: Some(i),
            alpha: self.alphas.max(),
            staleness,
            residual_used: total,
        })
    }

    fn row(&self, state: &MultiplierState, info: Option<&DualStepInfo>) -> Result<TraceRow> {
        let err = self.problem.known().map(|s| (&state.mu - &s.lambda).norm());
        Ok(TraceRow {
            k: state.k,
            index: info.and_then(|i| i.index),
            alpha: info.map(|i| i.alpha),
            err,
            obj: self.problem.objective(&state.y)?,
            staleness: info.map_or(0, |i| i.staleness),
            mu_min: Some(min_entry(&state.mu)),
            x_min: None,
        })
    }

    fn converged(&self, state: &MultiplierState, tol: Option<f64>) -> bool {
        match (tol, self.problem.known()) {
            (Some(t), Some(s)) => {
                (&state.mu - &s.lambda).norm() <= t && state.y.iter().zip(&s.y).all(|(a, b)| (a - b).norm() <= t)
            }
            _ => false,
        }
    }

    /// Iterate until `μ` and every block are within `tol` of the known
    /// solution, or the iteration cap.
    pub fn run(&self, mu0: &Vector, opts: &DualRunOptions) -> Result<Trace> {
        let mut state = self.start(mu0, None)?;
        let mut trace = Trace::new(TraceKind::Positive);
        trace.rows.push(self.row(&state, None)?);
        if opts.record_iterates {
            trace.iterates.push(state.mu.clone());
        }
        while state.k < opts.max_iter {
            let info = self.step(&mut state)?;
            trace.rows.push(self.row(&state, Some(&info))?);
            if opts.record_iterates {
                trace.iterates.push(state.mu.clone());
            }
            let norm = state.mu.norm();
            if !norm.is_finite() || norm > opts.divergence {
                trace.evaluations = state.evaluations();
                return Err(Error::Diverged {
                    iteration: state.k,
                    trace: Box::new(trace),
                });
            }
            if self.converged(&state, opts.tol) {
                break;
            }
        }
        trace.evaluations = state.evaluations();
        Ok(trace)
    }
}

// argmin_{y∈Y} h(y) + μ'g(y).
fn lagrangian_argmin(blk: &Block, mu: &Vector, start: &Vector, inner: &InnerOptions) -> Result<Vector> {
    match (blk.objective.as_quadratic(), blk.is_affine()) {
        (Some((q, c, _)), true) => quadratic_argmin(q, &(c + blk.a.transpose() * mu), &blk.set, Some(start), inner),
        _ => {
            let h = &blk.objective;
            let n = blk.dim();
            minimize_smooth(
                |y| match h.gradient(y) {
                    Ok(g) => g + blk.constraint_jacobian(y).transpose() * mu,
                    Err(_) => nan_vector(n),
                },
                start,
                &blk.set,
                inner,
            )
        }
    }
}

/// Run the exponential method of multipliers beside the entropy proximal
/// recursion `μ⁺ = argmax Q(μ) − (μ_k/α) ψ*(μ/μ_k)` on a one-block,
/// one-constraint problem and return `max_k |μ_k^AL − μ_k^prox|`.
///
/// The proximal step is computed independently of the penalized
/// minimization: bisection in `t = ln μ` on the stationarity condition
/// `g(y(e^t)) − (t − ln μ_k)/α = 0`, whose left side is decreasing.
pub fn exp_multiplier_duality_check(
    problem: &SeparableProblem,
    mu0: f64,
    alpha: f64,
    steps: usize,
    inner: &InnerOptions,
) -> Result<f64> {
    if problem.m() != 1 || problem.rows() != 1 {
        return Err(Error::Precondition(
            "the duality check takes one block and one constraint".into(),
        ));
    }
    let blk = problem.block(0);
    let alphas = Vector::from_element(1, alpha);
    let mut mu_al = Vector::from_element(1, mu0);
    let mut y_al = blk.default_start();
    let mut mu_prox = mu0;
    let mut y_prox = blk.default_start();
    let mut worst: f64 = 0.0;
    for _ in 0..steps {
        let (y, mu) = exp_al_step(problem, &mu_al, &alphas, &y_al, inner)?;
        y_al = y;
        mu_al = mu;

        let t_k = mu_prox.ln();
        let mut phi = |t: f64| -> Result<f64> {
            let y = lagrangian_argmin(blk, &Vector::from_element(1, t.exp()), &y_prox, inner)?;
            let g = blk.constraint_value(&y)[0];
            y_prox = y;
            Ok(g - (t - t_k) / alpha)
        };
        let (mut lo, mut hi) = (t_k, t_k);
        let mut width = 1.0;
        if phi(t_k)? > 0.0 {
            while phi(hi)? > 0.0 {
                lo = hi;
                hi += width;
                width *= 2.0;
            }
        } else {
            while phi(lo)? < 0.0 {
                hi = lo;
                lo -= width;
                width *= 2.0;
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if phi(mid)? > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        mu_prox = (0.5 * (lo + hi)).exp();
        worst = worst.max((mu_al[0] - mu_prox).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::delay::DelaySchedule;
    use crate::instances::{exp_al_worked, two_block_inequality};
    use crate::linalg::Matrix;
    use crate::problem::{ComponentFunction, ConstraintSet};
    use approx::assert_abs_diff_eq;

    fn v1(x: f64) -> Vector {
        Vector::from_element(1, x)
    }

    // Newton on y − 2 + eʸ = 0, written out independently of the library.
    fn worked_root() -> f64 {
        let mut y = 0.0_f64;
        for _ in 0..50 {
            y -= (y - 2.0 + y.exp()) / (1.0 + y.exp());
        }
        y
    }

    #[test]
    fn first_step_of_worked_instance() {
        let p = exp_al_worked().unwrap();
        let (y, mu) = exp_al_step(&p, &v1(1.0), &v1(1.0), &v1(2.0), &InnerOptions::default()).unwrap();
        let root = worked_root();
        assert_abs_diff_eq!(y[0], root, epsilon = 1e-10);
        assert_abs_diff_eq!(mu[0], root.exp(), epsilon = 1e-9);
        assert_abs_diff_eq!(y[0], 0.4428, epsilon = 1e-4);
        assert_abs_diff_eq!(mu[0], 1.5572, epsilon = 1e-4);
    }

    #[test]
    fn zero_constraint_value_keeps_multiplier() {
        // h = ½y², g(y) = y: with μ = 0⁺ the minimizer is 0, so G = 0.
        let blk = Block::affine(
            ComponentFunction::quadratic(Matrix::from_element(1, 1, 1.0), v1(0.0), 0.0).unwrap(),
            ConstraintSet::Free,
            Matrix::from_element(1, 1, 1.0),
            v1(0.0),
        )
        .unwrap();
        let (mu, _) = multiplier_update(&v1(0.7), &v1(2.0), &v1(0.0));
        assert_eq!(mu[0], 0.7);
        let y = penalized_block_argmin(
            &blk,
            &v1(1e-300),
            &v1(1.0),
            &v1(0.0),
            &v1(3.0),
            &InnerOptions::default(),
        )
        .unwrap();
        assert!(y[0].abs() <= 1e-10);
    }

    #[test]
    fn worked_instance_converges() {
        let p = exp_al_worked().unwrap();
        let solver = MultiplierSolver::new(&p, DelaySchedule::last_update(), v1(1.0)).unwrap();
        let trace = solver.run(&v1(1.0), &DualRunOptions::default()).unwrap();
        let last = trace.last().unwrap();
        assert!(last.err.unwrap() <= 1e-6);
        assert!(trace.rows.iter().all(|r| r.mu_min.unwrap() > 0.0));
    }

    #[test]
    fn iaali_with_one_block_is_exp_al() {
        let p = exp_al_worked().unwrap();
        let solver = MultiplierSolver::new(&p, DelaySchedule::last_update(), v1(0.5)).unwrap();
        let mut state = solver.start(&v1(1.0), None).unwrap();
        let (mut y, mut mu) = (p.initial_blocks()[0].clone(), v1(1.0));
        for _ in 0..20 {
            solver.step(&mut state).unwrap();
            let next = exp_al_step(&p, &mu, &v1(0.5), &y, &InnerOptions::default()).unwrap();
            y = next.0;
            mu = next.1;
            assert!((state.mu[0] - mu[0]).abs() <= 1e-10);
        }
    }

    #[test]
    fn two_block_instance_converges() {
        let p = two_block_inequality().unwrap();
        let solver = MultiplierSolver::new(&p, DelaySchedule::last_update(), v1(0.2)).unwrap();
        let trace = solver.run(&v1(1.0), &DualRunOptions::default()).unwrap();
        assert!(trace.last().unwrap().err.unwrap() <= 1e-6);
        assert!(trace.rows.iter().all(|r| r.mu_min.unwrap() > 0.0));
    }

    #[test]
    fn gradient_of_penalized_objective_matches_differences() {
        let p = exp_al_worked().unwrap();
        let blk = p.block(0);
        let (mu, a) = (v1(1.3), v1(0.8));
        let f = |y: f64| 0.5 * (y - 2.0).powi(2) + mu[0] / a[0] * (a[0] * y).exp_m1();
        // At the minimizer the finite-difference slope vanishes.
        let y = penalized_block_argmin(blk, &mu, &a, &v1(0.0), &v1(0.0), &InnerOptions::default()).unwrap()[0];
        let h = 1e-6;
        assert!(((f(y + h) - f(y - h)) / (2.0 * h)).abs() <= 1e-5);
    }

    #[test]
    fn duality_matches_entropy_proximal_recursion() {
        let p = exp_al_worked().unwrap();
        for alpha in [1.0, 0.3] {
            let dev = exp_multiplier_duality_check(&p, 1.0, alpha, 10, &InnerOptions::default()).unwrap();
            assert!(dev <= 1e-8, "alpha {alpha}: {dev:e}");
        }
    }

    #[test]
    fn rejects_nonpositive_multipliers_and_equalities() {
        let p = exp_al_worked().unwrap();
        let solver = MultiplierSolver::new(&p, DelaySchedule::last_update(), v1(1.0)).unwrap();
        assert!(solver.start(&v1(0.0), None).is_err());
        assert!(MultiplierSolver::new(&p, DelaySchedule::last_update(), v1(-1.0)).is_err());
        let eq = crate::instances::scalar_equality().unwrap();
        assert!(MultiplierSolver::new(&eq, DelaySchedule::last_update(), v1(1.0)).is_err());
    }
}
