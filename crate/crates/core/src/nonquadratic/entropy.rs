//! Aggregated methods for `min Σ f_i(x)` over `x ≥ 0` that keep iterates
//! strictly positive: the entropy-regularized IAP step, its explicit
//! multiplicative IAG analog, and projected IAG as a baseline.

use log::warn;

use crate::delay::{DelayEngine, DelaySchedule};
use crate::error::{check_dim, Error, Result};
use crate::inner::{newton_root, InnerOptions};
use crate::linalg::{min_entry, Matrix, Vector};
use crate::primal::{iap_two_step, RunOptions, StepInfo};
use crate::problem::{exp_clamped, ComponentFunction, ConstraintSet, PenaltySpec, SumProblem};
use crate::trace::{Trace, TraceKind, TraceRow};

use super::PositiveAlgorithm;

/// Default floor `δ` of the stepsize heuristic.
pub const DEFAULT_DELTA: f64 = 1e-3;
/// Iterations between refreshes of `x̄` in the heuristic.
pub const XBAR_REFRESH: usize = 100;
// A coordinate counts as heading to zero once it stays below this fraction
// of the largest coordinate for `ZERO_STREAK` iterations.
const ZERO_RATIO: f64 = 1e-6;
const ZERO_STREAK: usize = 50;

/// `α^j = α / max(x̄^j, δ)`.
pub fn heuristic_stepsizes(xbar: &Vector, alpha: f64, delta: f64) -> Result<Vector> {
    if !(alpha > 0.0 && delta > 0.0) {
        return Err(Error::Precondition(format!(
            "heuristic needs α > 0 and δ > 0, got α = {alpha}, δ = {delta}"
        )));
    }
    Ok(xbar.map(|x| alpha / x.max(delta)))
}

/// `x⁺_j = x_j exp(−α_j g_j)` with the exponent clamped to `±700`; the flag
/// reports clamping.
pub fn entropy_iag_step(x: &Vector, aggregate: &Vector, alphas: &Vector) -> (Vector, bool) {
    let mut clamped = false;
    let next = Vector::from_fn(x.len(), |j, _| {
        let (e, c) = exp_clamped(-alphas[j] * aggregate[j]);
        clamped |= c;
        x[j] * e
    });
    (next, clamped)
}

/// `[x − α∘g]⁺`.
pub fn projected_iag_step(x: &Vector, aggregate: &Vector, alphas: &Vector) -> Vector {
    ConstraintSet::NonnegativeOrthant.project(&(x - alphas.component_mul(aggregate)))
}

fn check_positive(x: &Vector) -> Result<()> {
    if x.iter().all(|v| *v > 0.0 && v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Precondition(format!(
            "iterate must be strictly positive: {:?}",
            x.as_slice()
        )))
    }
}

/// Left side of the optimality condition of the proximal step,
/// `∇f(x⁺) + s + (1/α_j) ∇ψ*(x⁺_j / x_j)`, in max norm.
pub fn optimality_residual(
    f: &ComponentFunction,
    x_next: &Vector,
    x: &Vector,
    s: &Vector,
    alphas: &Vector,
    penalty: PenaltySpec,
) -> Result<f64> {
    let g = f.gradient(x_next)? + s;
    let r = Vector::from_fn(x.len(), |j, _| {
        g[j] + penalty.conjugate_derivative(x_next[j] / x[j]) / alphas[j]
    });
    Ok(r.amax())
}

/// `x⁺ = argmin f(y) + s'(y − x) + Σ_j (x_j/α_j) ψ*(y_j/x_j)`.
///
/// The exponential penalty is solved by damped Newton in `z = ln y`, so trial
/// points stay positive; the quadratic penalty is solved in `y` directly.
/// Either way the stopping test is the optimality residual.
pub fn entropy_iap_step(
    f: &ComponentFunction,
    x: &Vector,
    s: &Vector,
    alphas: &Vector,
    penalty: PenaltySpec,
    inner: &InnerOptions,
) -> Result<Vector> {
    let n = x.len();
    check_dim("entropy step point", f.dim(), n)?;
    check_dim("entropy step aggregate", n, s.len())?;
    check_dim("entropy step stepsizes", n, alphas.len())?;
    check_positive(x)?;
    let nan = || Vector::from_element(n, f64::NAN);
    match penalty {
        PenaltySpec::Exponential => {
            let log_x = x.map(f64::ln);
            let residual = |z: &Vector| {
                let y = z.map(f64::exp);
                match f.gradient(&y) {
                    Ok(g) => (z - &log_x).component_div(alphas) + g + s,
                    Err(_) => nan(),
                }
            };
            let jacobian = |z: &Vector| {
                let y = z.map(f64::exp);
                let h = f.hessian(&y).unwrap_or_else(|_| Matrix::from_element(n, n, f64::NAN));
                Matrix::from_diagonal(&alphas.map(|a| 1.0 / a)) + h * Matrix::from_diagonal(&y)
            };
            let z = newton_root(residual, jacobian, &log_x, inner)?;
            Ok(z.map(f64::exp))
        }
        PenaltySpec::Quadratic => {
            let scale = x.component_mul(alphas);
            let residual = |y: &Vector| match f.gradient(y) {
                Ok(g) => (y - x).component_div(&scale) + g + s,
                Err(_) => nan(),
            };
            let jacobian = |y: &Vector| {
                let h = f.hessian(y).unwrap_or_else(|_| Matrix::from_element(n, n, f64::NAN));
                Matrix::from_diagonal(&scale.map(|a| 1.0 / a)) + h
            };
            newton_root(residual, jacobian, x, inner)
        }
    }
}

/// Max-norm gap between the quadratic-penalty proximal step with
/// `α_j = α / x_j` and the unconstrained IAP step with stepsize `α` from the
/// same point. With these stepsizes the two optimality conditions are the
/// same equation; with `α_j ≡ α` they agree only where `x_j = 1`.
pub fn quadratic_limit_deviation(
    f: &ComponentFunction,
    x: &Vector,
    s: &Vector,
    alpha: f64,
    inner: &InnerOptions,
) -> Result<f64> {
    let alphas = x.map(|v| alpha / v);
    let general = entropy_iap_step(f, x, s, &alphas, PenaltySpec::Quadratic, inner)?;
    let uniform = Vector::from_element(x.len(), alpha);
    let iap = iap_two_step(f, x, s, &uniform, &ConstraintSet::Free, inner)?;
    Ok((general - iap.next).amax())
}

/// How per-coordinate stepsizes are chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum CoordinateStepsizes {
    Fixed(Vector),
    /// `α^j = α / max(x̄^j, δ)` with `x̄` the iterate, refreshed every
    /// [`XBAR_REFRESH`] iterations.
    Heuristic {
        alpha: f64,
        delta: f64,
    },
}

impl CoordinateStepsizes {
    pub fn uniform(alpha: f64, n: usize) -> Self {
        Self::Fixed(Vector::from_element(n, alpha))
    }

    fn validate(&self, n: usize) -> Result<()> {
        match self {
            Self::Fixed(v) => {
                check_dim("coordinate stepsizes", n, v.len())?;
                if v.iter().all(|a| *a > 0.0 && a.is_finite()) {
                    Ok(())
                } else {
                    Err(Error::Config(format!("stepsize must be positive: {:?}", v.as_slice())))
                }
            }
            Self::Heuristic { alpha, delta } => {
                if *alpha > 0.0 && *delta > 0.0 && alpha.is_finite() {
                    Ok(())
                } else {
                    Err(Error::Config(format!(
                        "stepsize heuristic needs α > 0 and δ > 0, got {alpha}, {delta}"
                    )))
                }
            }
        }
    }
}

/// Iterate bundle of an orthant-constrained run.
#[derive(Debug, Clone)]
pub struct EntropyState {
    pub x: Vector,
    pub k: usize,
    pub alphas: Vector,
    engine: DelayEngine<Vector>,
    low_streak: Vec<usize>,
    clamped: usize,
    evaluations: usize,
}

impl EntropyState {
    /// Coordinates that have stayed below `10⁻⁶ · max_j x^j` for 50
    /// consecutive iterations. Diagnostic only.
    pub fn zero_set(&self) -> Vec<usize> {
        self.low_streak
            .iter()
            .enumerate()
            .filter(|(_, s)| **s >= ZERO_STREAK)
            .map(|(j, _)| j)
            .collect()
    }

    pub fn clamped_steps(&self) -> usize {
        self.clamped
    }

    pub fn engine(&self) -> &DelayEngine<Vector> {
        &self.engine
    }

    pub fn evaluations(&self) -> usize {
        self.evaluations + self.engine.evaluations()
    }
}

/// Entropy IAP, entropy IAG and projected IAG on a sum over the orthant.
#[derive(Debug, Clone)]
pub struct EntropySolver<'a> {
    problem: &'a SumProblem,
    algorithm: PositiveAlgorithm,
    schedule: DelaySchedule,
    stepsizes: CoordinateStepsizes,
    penalty: PenaltySpec,
    inner: InnerOptions,
}

impl<'a> EntropySolver<'a> {
    pub fn new(
        problem: &'a SumProblem,
        algorithm: PositiveAlgorithm,
        schedule: DelaySchedule,
        stepsizes: CoordinateStepsizes,
    ) -> Result<Self> {
        if algorithm.is_multiplier_method() {
            return Err(Error::Unsupported(format!("{algorithm} works on separable problems")));
        }
        if *problem.constraint() != ConstraintSet::NonnegativeOrthant {
            return Err(Error::Precondition(format!(
                "{algorithm} needs the nonnegative orthant"
            )));
        }
        stepsizes.validate(problem.dim())?;
        Ok(Self {
            problem,
            algorithm,
            schedule,
            stepsizes,
            penalty: PenaltySpec::Exponential,
            inner: InnerOptions::default(),
        })
    }

    /// Penalty of the entropy IAP step (exponential unless changed).
    pub fn with_penalty(mut self, penalty: PenaltySpec) -> Self {
        self.penalty = penalty;
        self
    }

    pub fn with_inner(mut self, inner: InnerOptions) -> Self {
        self.inner = inner;
        self
    }

    fn positive(&self) -> bool {
        self.algorithm != PositiveAlgorithm::ProjIag
    }

    fn stepsizes_at(&self, x: &Vector) -> Result<Vector> {
        match &self.stepsizes {
            CoordinateStepsizes::Fixed(v) => Ok(v.clone()),
            CoordinateStepsizes::Heuristic { alpha, delta } => heuristic_stepsizes(x, *alpha, *delta),
        }
    }

    pub fn start(&self, x0: &Vector) -> Result<EntropyState> {
        let p = self.problem;
        check_dim("start point", p.dim(), x0.len())?;
        if self.positive() {
            check_positive(x0)?;
        } else if x0.iter().any(|v| *v < 0.0) {
            return Err(Error::Precondition("start point must be nonnegative".into()));
        }
        let engine = DelayEngine::new(self.schedule, p.m(), x0, |i, x| p.component(i).gradient(x))?;
        Ok(EntropyState {
            x: x0.clone(),
            k: 0,
            alphas: self.stepsizes_at(x0)?,
            engine,
            low_streak: vec![0; p.dim()],
            clamped: 0,
            evaluations: 0,
        })
    }

    pub fn step(&self, state: &mut EntropyState) -> Result<StepInfo> {
        let p = self.problem;
        let k = state.k;
        if k > 0 && k.is_multiple_of(XBAR_REFRESH) && matches!(self.stepsizes, CoordinateStepsizes::Heuristic { .. }) {
            state.alphas = self.stepsizes_at(&state.x)?;
        }
        let grad = |i: usize, x: &Vector| p.component(i).gradient(x);
        let engine = &mut state.engine;
        let i = engine.select(k);
        let next = match self.algorithm {
            PositiveAlgorithm::EntropyIap => {
                engine.prepare(k, &state.x, i, false, grad)?;
                let s = engine.table().sum_except(i);
                let f = p.component(i);
                let next = entropy_iap_step(f, &state.x, &s, &state.alphas, self.penalty, &self.inner)?;
                state.evaluations += 1;
                engine.refresh(i, f.gradient(&next)?, k + 1);
                next
            }
            PositiveAlgorithm::EntropyIag | PositiveAlgorithm::ProjIag => {
                engine.prepare(k, &state.x, i, true, grad)?;
                if engine.table().stamps()[i] < k {
                    engine.refresh(i, grad(i, &state.x)?, k);
                    engine.count_evaluation();
                }
                let aggregate = engine.table().aggregate();
                if self.algorithm == PositiveAlgorithm::ProjIag {
                    projected_iag_step(&state.x, aggregate, &state.alphas)
                } else {
                    let (next, clamped) = entropy_iag_step(&state.x, aggregate, &state.alphas);
                    if clamped {
                        state.clamped += 1;
                        if state.clamped == 1 {
                            warn!("entropy step exponent clamped at k = {k}; the stepsize is likely too large");
                        }
                    }
                    next
                }
            }
            PositiveAlgorithm::ExpAl | PositiveAlgorithm::Iaali => unreachable!("rejected in new"),
        };
        let info = StepInfo {
            index: Some(i),
            alpha: state.alphas.max(),
            staleness: engine.staleness(k),
            stamps: engine.table().stamps().to_vec(),
        };
        // Underflow is the only way to reach zero.
        state.x = if self.positive() {
            next.map(|v| v.max(f64::MIN_POSITIVE))
        } else {
            next
        };
        let top = state.x.max();
        for (streak, v) in state.low_streak.iter_mut().zip(state.x.iter()) {
            *streak = if *v < ZERO_RATIO * top { *streak + 1 } else { 0 };
        }
        state.k += 1;
        Ok(info)
    }

    fn row(&self, state: &EntropyState, info: Option<&StepInfo>) -> Result<TraceRow> {
        Ok(TraceRow {
            k: state.k,
            index: info.and_then(|i| i.index),
            alpha: info.map(|i| i.alpha),
            err: self.problem.known_opt().map(|xs| (&state.x - xs).norm()),
            obj: self.problem.value(&state.x)?,
            staleness: info.map_or(0, |i| i.staleness),
            mu_min: None,
            x_min: Some(min_entry(&state.x)),
        })
    }

    pub fn run(&self, x0: &Vector, opts: &RunOptions) -> Result<Trace> {
        let mut state = self.start(x0)?;
        let mut trace = Trace::new(TraceKind::Positive);
        trace.rows.push(self.row(&state, None)?);
        if opts.record_iterates {
            trace.iterates.push(state.x.clone());
        }
        let converged = |row: &TraceRow| matches!((row.err, opts.tol), (Some(e), Some(t)) if e <= t);
        while state.k < opts.max_iter {
            let info = self.step(&mut state)?;
            let row = self.row(&state, Some(&info))?;
            let done = converged(&row);
            trace.rows.push(row);
            if opts.record_iterates {
                trace.iterates.push(state.x.clone());
                trace.stamps.push(info.stamps);
            }
            let norm = state.x.norm();
            if !norm.is_finite() || norm > opts.divergence {
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::strict_complementarity;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn v1(x: f64) -> Vector {
        Vector::from_element(1, x)
    }

    fn linear(c: f64) -> ComponentFunction {
        ComponentFunction::quadratic(Matrix::zeros(1, 1), v1(c), 0.0).unwrap()
    }

    #[test]
    fn heuristic_examples() {
        let a = heuristic_stepsizes(&Vector::from_column_slice(&[2.0, 0.001]), 0.1, 0.01).unwrap();
        assert_eq!(a[0], 0.05);
        assert_eq!(a[1], 0.1 / 0.01);
        assert_eq!(heuristic_stepsizes(&v1(0.01), 0.1, 0.01).unwrap()[0], 0.1 / 0.01);
        let u = heuristic_stepsizes(&Vector::from_element(3, 0.5), 0.1, 0.01).unwrap();
        assert!(u.iter().all(|a| *a == u[0]));
        assert!(heuristic_stepsizes(&v1(1.0), 0.0, 0.1).is_err());
    }

    #[test]
    fn entropy_iag_examples() {
        let (x, _) = entropy_iag_step(&v1(1.0), &v1(0.0), &v1(1.0));
        assert_eq!(x[0], 1.0);
        let (x, _) = entropy_iag_step(&v1(1.0), &v1(1.0), &v1(1.0));
        assert_abs_diff_eq!(x[0], (-1.0_f64).exp(), epsilon = 1e-15);
        let (x, clamped) = entropy_iag_step(&v1(1.0), &v1(1e4), &v1(1.0));
        assert!(clamped && x[0] > 0.0);
    }

    #[test]
    fn projected_iag_examples() {
        assert_eq!(projected_iag_step(&v1(0.1), &v1(1.0), &v1(1.0))[0], 0.0);
        assert_abs_diff_eq!(
            projected_iag_step(&v1(2.0), &v1(1.0), &v1(0.5))[0],
            1.5,
            epsilon = 1e-15
        );
    }

    #[test]
    fn entropy_iap_examples() {
        let inner = InnerOptions::default();
        // Zero gradient: no move.
        let x = entropy_iap_step(
            &linear(0.0),
            &v1(0.7),
            &v1(0.0),
            &v1(1.0),
            PenaltySpec::Exponential,
            &inner,
        )
        .unwrap();
        assert_abs_diff_eq!(x[0], 0.7, epsilon = 1e-15);
        // ln x + 1 = 0.
        let x = entropy_iap_step(
            &linear(1.0),
            &v1(1.0),
            &v1(0.0),
            &v1(1.0),
            PenaltySpec::Exponential,
            &inner,
        )
        .unwrap();
        assert_abs_diff_eq!(x[0], (-1.0_f64).exp(), epsilon = 1e-12);
        // ln x + (x − 1) = 0 at x = 1.
        let bowl = ComponentFunction::squared_distance(&v1(1.0));
        let x = entropy_iap_step(&bowl, &v1(1.0), &v1(0.0), &v1(1.0), PenaltySpec::Exponential, &inner).unwrap();
        assert_abs_diff_eq!(x[0], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn quadratic_penalty_at_unit_point_is_the_iap_step() {
        let f = ComponentFunction::squared_distance(&Vector::from_column_slice(&[0.3, 2.0]));
        let x = Vector::from_element(2, 1.0);
        let s = Vector::from_column_slice(&[0.5, -0.2]);
        let inner = InnerOptions::default();
        let alphas = Vector::from_element(2, 0.4);
        let general = entropy_iap_step(&f, &x, &s, &alphas, PenaltySpec::Quadratic, &inner).unwrap();
        let iap = iap_two_step(&f, &x, &s, &alphas, &ConstraintSet::Free, &inner).unwrap();
        assert!((general - iap.next).amax() <= 1e-12);
    }

    proptest! {
        #[test]
        fn quadratic_limit_matches_iap(
            seed in 0u64..1000,
            alpha in 0.05..2.0f64,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = 3;
            let b = Matrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
            let q = &b * b.transpose() + Matrix::identity(n, n) * 0.1;
            let c = Vector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
            let f = ComponentFunction::quadratic(q, c, 0.0).unwrap();
            let x = Vector::from_fn(n, |_, _| rng.gen_range(0.2..3.0));
            let s = Vector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
            let dev = quadratic_limit_deviation(&f, &x, &s, alpha, &InnerOptions::default()).unwrap();
            prop_assert!(dev <= 1e-8, "{dev:e}");
        }

        #[test]
        fn accepted_steps_satisfy_optimality(
            seed in 0u64..1000,
            alpha in 0.05..2.0f64,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = 3;
            let b = Matrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
            let q = &b * b.transpose();
            let c = Vector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
            let f = ComponentFunction::quadratic(q, c, 0.0).unwrap();
            let x = Vector::from_fn(n, |_, _| rng.gen_range(0.1..3.0));
            let s = Vector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
            let alphas = Vector::from_element(n, alpha);
            let next = entropy_iap_step(&f, &x, &s, &alphas, PenaltySpec::Exponential, &InnerOptions::default()).unwrap();
            prop_assert!(next.iter().all(|v| *v > 0.0));
            let r = optimality_residual(&f, &next, &x, &s, &alphas, PenaltySpec::Exponential).unwrap();
            prop_assert!(r <= 1e-10, "{r:e}");
        }
    }

    #[test]
    fn entropy_methods_stay_positive_and_converge() {
        let p = strict_complementarity().unwrap();
        let x0 = Vector::from_column_slice(&[0.1, 0.9]);
        for a in [PositiveAlgorithm::EntropyIap, PositiveAlgorithm::EntropyIag] {
            let solver = EntropySolver::new(
                &p,
                a,
                DelaySchedule::last_update(),
                CoordinateStepsizes::uniform(0.5, 2),
            )
            .unwrap();
            let opts = RunOptions {
                tol: None,
                ..RunOptions::iterations(400)
            };
            let trace = solver.run(&x0, &opts).unwrap();
            assert!(trace.rows.iter().all(|r| r.x_min.unwrap() > 0.0), "{a}");
            let mut state = solver.start(&x0).unwrap();
            for _ in 0..400 {
                solver.step(&mut state).unwrap();
            }
            assert!((state.x[1] - 1.0).abs() <= 1e-6, "{a}: {:?}", state.x);
            assert_eq!(state.zero_set(), vec![0], "{a}");
        }
    }

    #[test]
    fn projected_iag_hits_zero_then_matches_reduced_iag() {
        let p = strict_complementarity().unwrap();
        let solver = EntropySolver::new(
            &p,
            PositiveAlgorithm::ProjIag,
            DelaySchedule::last_update(),
            CoordinateStepsizes::uniform(0.5, 2),
        )
        .unwrap();
        let mut state = solver.start(&Vector::from_column_slice(&[0.1, 0.9])).unwrap();
        let mut hit = None;
        for k in 0..200 {
            solver.step(&mut state).unwrap();
            if hit.is_none() && state.x[0] == 0.0 {
                hit = Some(k);
            }
            if hit.is_some() {
                assert_eq!(state.x[0], 0.0);
            }
        }
        assert!(hit.unwrap() < 10);
        assert!((state.x[1] - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn heuristic_refreshes_every_hundred_iterations() {
        let p = strict_complementarity().unwrap();
        let solver = EntropySolver::new(
            &p,
            PositiveAlgorithm::EntropyIag,
            DelaySchedule::last_update(),
            CoordinateStepsizes::Heuristic {
                alpha: 0.1,
                delta: DEFAULT_DELTA,
            },
        )
        .unwrap();
        let x0 = Vector::from_column_slice(&[0.5, 2.0]);
        let mut state = solver.start(&x0).unwrap();
        assert_eq!(state.alphas, heuristic_stepsizes(&x0, 0.1, DEFAULT_DELTA).unwrap());
        for _ in 0..XBAR_REFRESH {
            solver.step(&mut state).unwrap();
        }
        assert_eq!(state.alphas, heuristic_stepsizes(&x0, 0.1, DEFAULT_DELTA).unwrap());
        let xbar = state.x.clone();
        solver.step(&mut state).unwrap();
        assert_eq!(state.alphas, heuristic_stepsizes(&xbar, 0.1, DEFAULT_DELTA).unwrap());
    }

    #[test]
    fn entropy_methods_need_positive_start_and_orthant() {
        let p = strict_complementarity().unwrap();
        let solver = EntropySolver::new(
            &p,
            PositiveAlgorithm::EntropyIag,
            DelaySchedule::last_update(),
            CoordinateStepsizes::uniform(0.5, 2),
        )
        .unwrap();
        assert!(solver.start(&Vector::from_column_slice(&[0.0, 1.0])).is_err());
        let free = crate::instances::two_quadratics().unwrap();
        assert!(EntropySolver::new(
            &free,
            PositiveAlgorithm::EntropyIap,
            DelaySchedule::last_update(),
            CoordinateStepsizes::uniform(0.5, 1)
        )
        .is_err());
    }
}
