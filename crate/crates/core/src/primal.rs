//! Incremental methods on a finite sum: incremental subgradient (IS),
//! incremental proximal (IP), aggregated subgradient (IAS), aggregated
//! gradient (IAG), aggregated proximal (IAP), plus full gradient descent as a
//! baseline.
//!
//! The step kernels ([`gradient_step`], [`iap_two_step`], [`iap_direct`]) are
//! pure functions of the current point and the table contents; the
//! [`PrimalSolver`] wires them to a [`DelayEngine`].

use std::fmt;
use std::str::FromStr;

use log::debug;

use crate::analysis::fit_rate;
use crate::delay::{DelayEngine, DelaySchedule};
use crate::error::{check_dim, Error, Result};
use crate::inner::InnerOptions;
use crate::linalg::Vector;
use crate::problem::{ComponentFunction, ConstraintSet, SumProblem};
use crate::trace::{Trace, TraceKind, TraceRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PrimalAlgorithm {
    Is,
    Ip,
    Ias,
    Iag,
    Iap,
    /// Full gradient descent, `m` gradients per iteration.
    FullGradient,
}

impl PrimalAlgorithm {
    pub const ALL: [Self; 6] = [Self::Is, Self::Ip, Self::Ias, Self::Iag, Self::Iap, Self::FullGradient];

    pub fn tag(self) -> &'static str {
        match self {
            Self::Is => "is",
            Self::Ip => "ip",
            Self::Ias => "ias",
            Self::Iag => "iag",
            Self::Iap => "iap",
            Self::FullGradient => "gd",
        }
    }

    fn uses_table(self) -> bool {
        matches!(self, Self::Ias | Self::Iag | Self::Iap)
    }
}

impl fmt::Display for PrimalAlgorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for PrimalAlgorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|a| a.tag() == s)
            .ok_or_else(|| Error::Config(format!("unknown primal algorithm `{s}`")))
    }
}

/// How the IAP step is computed; both give the same iterates for `X = ℝⁿ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IapForm {
    /// `z = x − α Σ_{i≠i_k} g_i`, then a prox step on `f_{i_k}` from `z`.
    #[default]
    TwoStep,
    /// Prox step on `f_{i_k} + (Σ_{i≠i_k} g_i)'x` from `x`.
    Direct,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StepRule {
    Constant(f64),
    /// `α_k = α_0 / (k + 1)`.
    Diminishing(f64),
    /// Constant per-coordinate stepsizes.
    Diagonal(Vector),
}

impl StepRule {
    pub fn validate(&self, n: usize) -> Result<()> {
        let ok = match self {
            Self::Constant(a) | Self::Diminishing(a) => *a > 0.0 && a.is_finite(),
            Self::Diagonal(v) => {
                check_dim("diagonal stepsize", n, v.len())?;
                v.iter().all(|a| *a > 0.0 && a.is_finite())
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("stepsize must be positive and finite: {self:?}")))
        }
    }

    /// Per-coordinate stepsizes at iteration `k`.
    pub fn at(&self, k: usize, n: usize) -> Vector {
        match self {
            Self::Constant(a) => Vector::from_element(n, *a),
            Self::Diminishing(a) => Vector::from_element(n, a / (k as f64 + 1.0)),
            Self::Diagonal(v) => v.clone(),
        }
    }

    /// Scalar recorded in traces (largest coordinate stepsize).
    pub fn scalar_at(&self, k: usize) -> f64 {
        match self {
            Self::Constant(a) => *a,
            Self::Diminishing(a) => a / (k as f64 + 1.0),
            Self::Diagonal(v) => v.max(),
        }
    }
}

/// `P_X(x − α∘g)`.
pub fn gradient_step(x: &Vector, g: &Vector, alphas: &Vector, set: &ConstraintSet) -> Vector {
    set.project(&(x - alphas.component_mul(g)))
}

/// Output of the two-step IAP kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct IapStep {
    pub z: Vector,
    pub next: Vector,
    /// Gradient of the selected component at `next`, used to refresh its slot.
    pub gradient: Vector,
}

/// `z = x − α∘others`, `x⁺ = prox(f, z)`. The returned gradient is
/// `(z − x⁺)/α` on a free set and the analytic gradient otherwise.
pub fn iap_two_step(
    f: &ComponentFunction,
    x: &Vector,
    others: &Vector,
    alphas: &Vector,
    set: &ConstraintSet,
    inner: &InnerOptions,
) -> Result<IapStep> {
    let z = x - alphas.component_mul(others);
    let next = f.prox_scaled(&z, alphas, set, inner)?;
    let gradient = if set.is_free() {
        (&z - &next).component_div(alphas)
    } else {
        f.gradient(&next)?
    };
    Ok(IapStep { z, next, gradient })
}

/// `argmin_{y∈X} f(y) + others'(y − x) + Σ_j (y_j − x_j)²/(2α_j)`.
pub fn iap_direct(
    f: &ComponentFunction,
    x: &Vector,
    others: &Vector,
    alphas: &Vector,
    set: &ConstraintSet,
    inner: &InnerOptions,
) -> Result<Vector> {
    f.tilted(others)?.prox_scaled(x, alphas, set, inner)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub max_iter: usize,
    /// Stop once `‖x_k − x*‖ ≤ tol` (needs a known optimum).
    pub tol: Option<f64>,
    pub record_iterates: bool,
    /// Iterate norm treated as divergence.
    pub divergence: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            max_iter: 20_000,
            tol: Some(1e-8),
            record_iterates: false,
            divergence: 1e12,
        }
    }
}

impl RunOptions {
    pub fn iterations(max_iter: usize) -> Self {
        Self {
            max_iter,
            tol: None,
            ..Self::default()
        }
    }
}

/// Iterate bundle of a primal run.
#[derive(Debug, Clone)]
pub struct PrimalState {
    pub x: Vector,
    pub k: usize,
    /// Last IAP intermediate point.
    pub z: Option<Vector>,
    engine: Option<DelayEngine<Vector>>,
    evaluations: usize,
}

impl PrimalState {
    pub fn engine(&self) -> Option<&DelayEngine<Vector>> {
        self.engine.as_ref()
    }

    pub fn evaluations(&self) -> usize {
        self.evaluations + self.engine.as_ref().map_or(0, DelayEngine::evaluations)
    }
}

/// What a single step did.
#[derive(Debug, Clone, PartialEq)]
pub struct StepInfo {
    pub index: Option<usize>,
    pub alpha: f64,
    pub staleness: usize,
    /// Table stamps read by the step.
    pub stamps: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct PrimalSolver<'a> {
    problem: &'a SumProblem,
    algorithm: PrimalAlgorithm,
    schedule: DelaySchedule,
    rule: StepRule,
    form: IapForm,
    inner: InnerOptions,
}

impl<'a> PrimalSolver<'a> {
    pub fn new(
        problem: &'a SumProblem,
        algorithm: PrimalAlgorithm,
        schedule: DelaySchedule,
        rule: StepRule,
    ) -> Result<Self> {
        rule.validate(problem.dim())?;
        Ok(Self {
            problem,
            algorithm,
            schedule,
            rule,
            form: IapForm::default(),
            inner: InnerOptions::default(),
        })
    }

    pub fn with_form(mut self, form: IapForm) -> Self {
        self.form = form;
        self
    }

    pub fn with_inner(mut self, inner: InnerOptions) -> Self {
        self.inner = inner;
        self
    }

    pub fn algorithm(&self) -> PrimalAlgorithm {
        self.algorithm
    }

    pub fn start(&self, x0: &Vector) -> Result<PrimalState> {
        check_dim("start point", self.problem.dim(), x0.len())?;
        let engine = if self.algorithm.uses_table() {
            let p = self.problem;
            Some(DelayEngine::new(self.schedule, p.m(), x0, |i, x| {
                p.component(i).gradient(x)
            })?)
        } else {
            None
        };
        Ok(PrimalState {
            x: x0.clone(),
            k: 0,
            z: None,
            engine,
            evaluations: 0,
        })
    }

    pub fn step(&self, state: &mut PrimalState) -> Result<StepInfo> {
        let p = self.problem;
        let set = p.constraint();
        let k = state.k;
        let n = p.dim();
        let alphas = self.rule.at(k, n);
        let alpha = self.rule.scalar_at(k);
        let grad = |i: usize, x: &Vector| p.component(i).gradient(x);
        let mut info = StepInfo {
            index: None,
            alpha,
            staleness: 0,
            stamps: Vec::new(),
        };
        let next = match self.algorithm {
            PrimalAlgorithm::Is => {
                let i = self.schedule.select(k, p.m());
                info.index = Some(i);
                state.evaluations += 1;
                gradient_step(&state.x, &grad(i, &state.x)?, &alphas, set)
            }
            PrimalAlgorithm::Ip => {
                let i = self.schedule.select(k, p.m());
                info.index = Some(i);
                state.evaluations += 1;
                p.component(i).prox_scaled(&state.x, &alphas, set, &self.inner)?
            }
            PrimalAlgorithm::FullGradient => {
                state.evaluations += p.m();
                gradient_step(&state.x, &p.gradient(&state.x)?, &alphas, set)
            }
            PrimalAlgorithm::Ias | PrimalAlgorithm::Iag => {
                let engine = state.engine.as_mut().expect("table methods own an engine");
                let i = engine.select(k);
                info.index = Some(i);
                engine.prepare(k, &state.x, i, true, grad)?;
                if self.algorithm == PrimalAlgorithm::Iag && engine.table().stamps()[i] < k {
                    engine.refresh(i, grad(i, &state.x)?, k);
                    engine.count_evaluation();
                }
                info.staleness = engine.staleness(k);
                info.stamps = engine.table().stamps().to_vec();
                let next = gradient_step(&state.x, engine.table().aggregate(), &alphas, set);
                if self.algorithm == PrimalAlgorithm::Ias && engine.table().stamps()[i] < k {
                    engine.refresh(i, grad(i, &state.x)?, k);
                    engine.count_evaluation();
                }
                next
            }
            PrimalAlgorithm::Iap => {
                let engine = state.engine.as_mut().expect("table methods own an engine");
                let i = engine.select(k);
                info.index = Some(i);
                engine.prepare(k, &state.x, i, false, grad)?;
                info.staleness = engine.staleness(k);
                info.stamps = engine.table().stamps().to_vec();
                let others = engine.table().sum_except(i);
                let f = p.component(i);
                let (next, g) = match self.form {
                    IapForm::TwoStep => {
                        let s = iap_two_step(f, &state.x, &others, &alphas, set, &self.inner)?;
                        state.z = Some(s.z);
                        (s.next, s.gradient)
                    }
                    IapForm::Direct => {
                        let next = iap_direct(f, &state.x, &others, &alphas, set, &self.inner)?;
                        let g = f.gradient(&next)?;
                        (next, g)
                    }
                };
                state.evaluations += 1;
                engine.refresh(i, g, k + 1);
                next
            }
        };
        state.x = next;
        state.k += 1;
        Ok(info)
    }

    fn row(&self, state: &PrimalState, info: Option<&StepInfo>) -> Result<TraceRow> {
        let err = self.problem.known_opt().map(|xs| (&state.x - xs).norm());
        let obj = self.problem.value(&state.x)?;
        Ok(match info {
            None => TraceRow::initial(err, obj),
            Some(info) => TraceRow {
                k: state.k,
                index: info.index,
                alpha: Some(info.alpha),
                err,
                obj,
                staleness: info.staleness,
                mu_min: None,
                x_min: None,
            },
        })
    }

    /// Iterate from `x0` until the error tolerance or the iteration cap.
    pub fn run(&self, x0: &Vector, opts: &RunOptions) -> Result<Trace> {
        let mut state = self.start(x0)?;
        let mut trace = Trace::new(TraceKind::Primal);
        trace.rows.push(self.row(&state, None)?);
        if opts.record_iterates {
            trace.iterates.push(state.x.clone());
        }
        let converged = |row: &TraceRow| matches!((row.err, opts.tol), (Some(e), Some(t)) if e <= t);
        if converged(&trace.rows[0]) {
            return Ok(trace);
        }
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

/// Result of the constant-stepsize search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tuning {
    pub alpha: f64,
    pub rho_hat: f64,
    /// Set when the accepted stepsize shows barely any contraction.
    pub flagged: bool,
}

/// Smallest stepsize the halving search will try.
pub const TUNING_FLOOR: f64 = 1e-10;
/// Iterations of each probe run.
pub const PROBE_ITERATIONS: usize = 500;
/// Errors below this are treated as exact convergence by the probe.
pub const PROBE_NOISE_FLOOR: f64 = 1e-13;

/// Halve `start` until `probe(α)` returns a contraction estimate; `probe`
/// returns `None` for a rejected stepsize.
pub fn halving_search<P>(start: f64, mut probe: P) -> Result<Tuning>
where
    P: FnMut(f64) -> Option<f64>,
{
    let mut alpha = start;
    while alpha >= TUNING_FLOOR {
        if let Some(rho_hat) = probe(alpha) {
            return Ok(Tuning {
                alpha,
                rho_hat,
                flagged: rho_hat >= 0.999,
            });
        }
        alpha *= 0.5;
    }
    Err(Error::TuningFailed { floor: TUNING_FLOOR })
}

/// Judge an error sequence from a probe run: it must end below where it
/// started and its fitted tail ratio must be below one.
pub fn probe_verdict(errors: &[f64], burn_in: usize) -> Option<f64> {
    let (first, last) = (*errors.first()?, *errors.last()?);
    if !(last < first) {
        return None;
    }
    let cut = errors
        .iter()
        .position(|e| !(*e > PROBE_NOISE_FLOOR))
        .unwrap_or(errors.len());
    if cut < errors.len() && cut <= 2 {
        // Reached the floor almost at once.
        return Some(0.0);
    }
    let usable = &errors[..cut];
    let burn = if usable.len() >= burn_in + 3 { burn_in } else { 0 };
    let fit = fit_rate(usable, burn).ok()?;
    (fit.rho_hat < 1.0 - 1e-6).then_some(fit.rho_hat)
}

/// Search for a constant stepsize: start at `1/L` and halve until a
/// 500-iteration probe from `x0` shows contraction.
pub fn tune_constant_stepsize(
    problem: &SumProblem,
    algorithm: PrimalAlgorithm,
    schedule: DelaySchedule,
    x0: &Vector,
) -> Result<Tuning> {
    let x_star = problem
        .known_opt()
        .ok_or_else(|| Error::OracleUnavailable("tuning needs a known optimum".into()))?;
    let lipschitz = problem.lipschitz();
    if !(lipschitz > 0.0 && lipschitz.is_finite()) {
        return Err(Error::Precondition(format!("tuning needs a finite L, got {lipschitz}")));
    }
    // A probe from the optimum itself says nothing.
    let start = if (x0 - x_star).norm() == 0.0 {
        x_star + Vector::from_element(x0.len(), 1.0)
    } else {
        x0.clone()
    };
    let burn_in = 2 * schedule.bound(problem.m()) + problem.m();
    halving_search(1.0 / lipschitz, |alpha| {
        let solver = PrimalSolver::new(problem, algorithm, schedule, StepRule::Constant(alpha)).ok()?;
        let opts = RunOptions {
            max_iter: PROBE_ITERATIONS,
            tol: Some(0.0),
            ..RunOptions::default()
        };
        let verdict = match solver.run(&start, &opts) {
            Ok(trace) => probe_verdict(&trace.errors(), burn_in),
            Err(_) => None,
        };
        debug!("probe {algorithm} alpha={alpha:e}: {verdict:?}");
        verdict
    })
}
