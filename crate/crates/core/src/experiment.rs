//! Turning a config into a run: instance construction, solver dispatch,
//! rate fitting and the summary written next to each trace.

use std::path::Path;
use std::time::{Duration, Instant};

use log::info;
use serde::Serialize;

use crate::analysis::{default_burn_in, error_audit, fit_trace, kkt_separable, kkt_sum, RateFit};
use crate::config::{
    load_problem_file, Algorithm, BuiltinInstance, ExperimentConfig, KindSpec, ProblemSpec, SetSpec, StepsizeSpec,
};
use crate::delay::DelaySchedule;
use crate::dual::{tune_dual_stepsize, AdmmSolver, AdmmVariant, DualAlgorithm, DualRunOptions, DualSolver};
use crate::error::{Error, Result};
use crate::inner::InnerOptions;
use crate::instances;
use crate::linalg::{Matrix, Vector};
use crate::nonquadratic::{CoordinateStepsizes, EntropySolver, MultiplierSolver, PositiveAlgorithm};
use crate::primal::{tune_constant_stepsize, PrimalAlgorithm, PrimalSolver, RunOptions, StepRule, Tuning};
use crate::problem::{Block, ComponentFunction, ConstraintKind, ConstraintSet, SeparableProblem, SumProblem};
use crate::trace::{Trace, TraceKind};

/// A built problem.
#[derive(Debug, Clone)]
pub enum Instance {
    Sum(SumProblem),
    Separable(SeparableProblem),
}

impl Instance {
    pub fn m(&self) -> usize {
        match self {
            Self::Sum(p) => p.m(),
            Self::Separable(p) => p.m(),
        }
    }

    /// `L/σ` of the sum, or of the dual for separable problems.
    pub fn condition_number(&self) -> Option<f64> {
        match self {
            Self::Sum(p) => p.condition_number(),
            Self::Separable(p) => match (p.dual_lipschitz(), p.dual_sigma()) {
                (Some(l), Some(s)) if s > 0.0 => Some(l / s),
                _ => None,
            },
        }
    }

    fn sum(&self, algorithm: Algorithm) -> Result<&SumProblem> {
        match self {
            Self::Sum(p) => Ok(p),
            Self::Separable(_) => Err(Error::Config(format!(
                "algorithm: {algorithm} needs a finite-sum problem"
            ))),
        }
    }

    fn separable(&self, algorithm: Algorithm) -> Result<&SeparableProblem> {
        match self {
            Self::Separable(p) => Ok(p),
            Self::Sum(_) => Err(Error::Config(format!(
                "algorithm: {algorithm} needs a separable problem"
            ))),
        }
    }
}

/// Replace a `file` reference by its contents and fill absent seeds with
/// `seed`, so two configs describe the same instance exactly when their
/// resolved specs are equal.
pub fn resolve_problem(spec: &ProblemSpec, base_dir: &Path, seed: u64) -> Result<ProblemSpec> {
    let spec = match spec {
        ProblemSpec::File { path } => load_problem_file(base_dir, path)?,
        other => other.clone(),
    };
    Ok(match spec {
        ProblemSpec::File { .. } => return Err(Error::Config("problem.path: nested file references".into())),
        ProblemSpec::SquaredDistanceSum { m, n, seed: s } => ProblemSpec::SquaredDistanceSum {
            m,
            n,
            seed: Some(s.unwrap_or(seed)),
        },
        ProblemSpec::RandomQuadraticSum { m, n, seed: s } => ProblemSpec::RandomQuadraticSum {
            m,
            n,
            seed: Some(s.unwrap_or(seed)),
        },
        ProblemSpec::DenseRows { m, n, r, seed: s } => ProblemSpec::DenseRows {
            m,
            n,
            r,
            seed: Some(s.unwrap_or(seed)),
        },
        other => other,
    })
}

fn matrix(rows: &[Vec<f64>], context: &str) -> Result<Matrix> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|row| row.len() != c) {
        return Err(Error::Config(format!("{context}: rows have different lengths")));
    }
    Ok(Matrix::from_fn(r, c, |i, j| rows[i][j]))
}

fn set(spec: SetSpec) -> ConstraintSet {
    match spec {
        SetSpec::Free => ConstraintSet::Free,
        SetSpec::Orthant => ConstraintSet::NonnegativeOrthant,
    }
}

/// Build the instance a resolved spec describes.
pub fn build_instance(spec: &ProblemSpec) -> Result<Instance> {
    let seed_of = |s: Option<u64>| s.ok_or_else(|| Error::Config("problem.seed: unresolved seed".into()));
    Ok(match spec {
        ProblemSpec::Builtin { name } => match name {
            BuiltinInstance::TwoQuadratics => Instance::Sum(instances::two_quadratics()?),
            BuiltinInstance::StrictComplementarity => Instance::Sum(instances::strict_complementarity()?),
            BuiltinInstance::SymmetricTwoBlock => Instance::Separable(instances::symmetric_two_block()?),
            BuiltinInstance::ScalarEquality => Instance::Separable(instances::scalar_equality()?),
            BuiltinInstance::SparseRows => Instance::Separable(instances::sparse_rows()?),
            BuiltinInstance::ExpAlWorked => Instance::Separable(instances::exp_al_worked()?),
            BuiltinInstance::TwoBlockInequality => Instance::Separable(instances::two_block_inequality()?),
        },
        ProblemSpec::SquaredDistanceSum { m, n, seed } => {
            Instance::Sum(instances::squared_distance_sum(*m, *n, seed_of(*seed)?)?)
        }
        ProblemSpec::RandomQuadraticSum { m, n, seed } => {
            Instance::Sum(instances::random_quadratic_sum(*m, *n, seed_of(*seed)?)?)
        }
        ProblemSpec::DenseRows { m, n, r, seed } => {
            Instance::Separable(instances::dense_rows(*m, *n, *r, seed_of(*seed)?)?)
        }
        ProblemSpec::SharedRow { m, curvature } => Instance::Separable(instances::shared_row(*m, *curvature)?),
        ProblemSpec::QuadraticSum {
            constraint,
            components,
            x_star,
        } => {
            let fs = components
                .iter()
                .map(|c| {
                    ComponentFunction::quadratic(
                        matrix(&c.q, "problem.components.q")?,
                        Vector::from_column_slice(&c.c),
                        c.d,
                    )
                })
                .collect::<Result<Vec<_>>>()?;
            let p = SumProblem::new(fs, set(*constraint))?;
            let x = match (x_star, constraint) {
                (Some(x), _) => Vector::from_column_slice(x),
                (None, SetSpec::Free) => kkt_sum(&p)?.y.remove(0),
                (None, SetSpec::Orthant) => {
                    return Err(Error::Config("problem.x_star is required over the orthant".into()))
                }
            };
            Instance::Sum(p.with_known_opt(x)?)
        }
        ProblemSpec::SeparableQuadratic { kind, blocks, solution } => {
            let bs = blocks
                .iter()
                .map(|b| {
                    Block::affine(
                        ComponentFunction::quadratic(
                            matrix(&b.q, "problem.blocks.q")?,
                            Vector::from_column_slice(&b.c),
                            b.d,
                        )?,
                        set(b.set),
                        matrix(&b.a, "problem.blocks.a")?,
                        Vector::from_column_slice(&b.b),
                    )
                })
                .collect::<Result<Vec<_>>>()?;
            let kind = match kind {
                KindSpec::Equality => ConstraintKind::Equality,
                KindSpec::Inequality => ConstraintKind::Inequality,
            };
            let p = SeparableProblem::new(bs, kind)?;
            let (y, lambda) = match (solution, kind) {
                (Some(s), _) => (
                    s.y.iter().map(|v| Vector::from_column_slice(v)).collect(),
                    Vector::from_column_slice(&s.lambda),
                ),
                (None, ConstraintKind::Equality) => {
                    let k = kkt_separable(&p)?;
                    (k.y, k.lambda)
                }
                (None, ConstraintKind::Inequality) => {
                    return Err(Error::Config("problem.solution is required for inequalities".into()))
                }
            };
            Instance::Separable(p.with_known_solution(y, lambda)?)
        }
        ProblemSpec::File { .. } => return Err(Error::Config("problem.path: unresolved file reference".into())),
    })
}

/// Command-line overrides applied on top of a config.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub max_iter: Option<usize>,
    pub tol: Option<f64>,
    pub prox_tol: Option<f64>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut ExperimentConfig) {
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(m) = self.max_iter {
            cfg.stop.max_iter = m;
        }
        if let Some(t) = self.tol {
            cfg.stop.tol = Some(t);
        }
        if let Some(t) = self.prox_tol {
            cfg.stop.prox_tol = Some(t);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Converged,
    MaxIter,
    Diverged,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PassFlags {
    pub converged: bool,
    /// Fitted `ρ̂ < 1`.
    pub rate_below_one: bool,
    /// `r² > 0.95`.
    pub fit_quality: bool,
    /// Staleness never exceeded the bound.
    pub delay_bound: bool,
    /// Every multiplier or iterate of an orthant method stayed positive.
    pub positivity: bool,
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub name: String,
    pub algorithm: String,
    pub status: RunStatus,
    pub alpha: Option<f64>,
    pub iterations: usize,
    pub evaluations: usize,
    pub final_error: Option<f64>,
    pub rho_hat: Option<f64>,
    pub gamma_hat: Option<f64>,
    pub r2: Option<f64>,
    pub burn_in: usize,
    #[serde(rename = "C_fit")]
    pub c_fit: Option<f64>,
    #[serde(rename = "L_over_sigma")]
    pub l_over_sigma: Option<f64>,
    pub delay_bound: usize,
    pub max_staleness: usize,
    pub pass_flags: PassFlags,
}

impl Summary {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("summary serializes");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub trace: Trace,
    pub summary: Summary,
}

impl RunOutcome {
    /// Write `trace.csv` and `summary.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        self.trace.write_csv(&dir.join("trace.csv"))?;
        std::fs::write(dir.join("summary.json"), self.summary.to_json())?;
        Ok(())
    }
}

fn inner_options(cfg: &ExperimentConfig) -> InnerOptions {
    let base = InnerOptions::default();
    cfg.stop.prox_tol.map_or(base, |t| base.with_tol(t))
}

fn start_vector(cfg: &ExperimentConfig, n: usize, default: f64) -> Vector {
    cfg.start
        .as_ref()
        .map_or_else(|| Vector::from_element(n, default), |v| Vector::from_column_slice(v))
}

fn scalar_rule(cfg: &ExperimentConfig, tuned: impl FnOnce() -> Result<Tuning>) -> Result<StepRule> {
    Ok(match &cfg.stepsize {
        StepsizeSpec::Constant { alpha } => StepRule::Constant(*alpha),
        StepsizeSpec::Diminishing { alpha } => StepRule::Diminishing(*alpha),
        StepsizeSpec::Diagonal { alphas } => StepRule::Diagonal(Vector::from_column_slice(alphas)),
        StepsizeSpec::Tuned { scale } => {
            let t = tuned()?;
            info!("tuned stepsize {:e} (probe ρ̂ = {:.6})", t.alpha, t.rho_hat);
            StepRule::Constant(t.alpha * scale)
        }
        StepsizeSpec::Heuristic { .. } => {
            return Err(Error::Config(format!(
                "stepsize.rule: heuristic does not apply to {}",
                cfg.algorithm
            )))
        }
    })
}

fn untunable(cfg: &ExperimentConfig) -> Error {
    Error::Config(format!("stepsize.rule: tuning is not available for {}", cfg.algorithm))
}

// Errors that end a run early but still leave a trace to report.
fn keep_diverged(result: Result<Trace>) -> Result<(Trace, bool)> {
    match result {
        Ok(t) => Ok((t, false)),
        Err(Error::Diverged { trace, .. }) => Ok((*trace, true)),
        Err(e) => Err(e),
    }
}

/// Run one experiment. Divergence is reported through the summary status
/// with the partial trace kept; tuning failures are errors.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    let spec = resolve_problem(&cfg.problem, &cfg.base_dir, cfg.seed)?;
    let instance = build_instance(&spec)?;
    let schedule = cfg.schedule.schedule(cfg.seed)?;
    let inner = inner_options(cfg);
    let l_over_sigma = instance.condition_number();
    if let Some(c) = l_over_sigma {
        info!("L/σ = {c:.6e}");
    }
    let tol = cfg.stop.tol;
    let dual_opts = DualRunOptions {
        max_iter: cfg.stop.max_iter,
        tol,
        ..DualRunOptions::default()
    };
    let mut c_fit = None;
    let (trace, diverged, alpha) = match cfg.algorithm {
        Algorithm::Primal(a) => {
            let p = instance.sum(cfg.algorithm)?;
            let x0 = start_vector(cfg, p.dim(), 0.0);
            let rule = scalar_rule(cfg, || tune_constant_stepsize(p, a, schedule, &x0))?;
            let solver = PrimalSolver::new(p, a, schedule, rule.clone())?.with_inner(inner);
            let audit = matches!(a, PrimalAlgorithm::Iap | PrimalAlgorithm::Iag | PrimalAlgorithm::Ip)
                && matches!(rule, StepRule::Constant(_))
                && p.constraint().is_free()
                && p.known_opt().is_some();
            let opts = RunOptions {
                max_iter: cfg.stop.max_iter,
                tol,
                record_iterates: audit,
                ..RunOptions::default()
            };
            let (mut trace, diverged) = keep_diverged(solver.run(&x0, &opts))?;
            if audit && !diverged {
                let bound = schedule.bound(p.m());
                c_fit = Some(error_audit(p, a, &trace, rule.scalar_at(0), bound)?.c_fit);
                trace.iterates.clear();
                trace.stamps.clear();
            }
            (trace, diverged, Some(rule.scalar_at(0)))
        }
        Algorithm::Dual(a @ (DualAlgorithm::Admm | DualAlgorithm::AdmmScaled)) => {
            let p = instance.separable(cfg.algorithm)?;
            let alpha = match cfg.stepsize {
                StepsizeSpec::Constant { alpha } => alpha,
                StepsizeSpec::Tuned { .. } => return Err(untunable(cfg)),
                _ => return Err(Error::Config(format!("stepsize.rule: {a} takes a constant stepsize"))),
            };
            let variant = if a == DualAlgorithm::Admm {
                AdmmVariant::Plain
            } else {
                AdmmVariant::Scaled
            };
            let solver = AdmmSolver::new(p, variant, alpha)?.with_inner(inner);
            let lambda0 = start_vector(cfg, p.rows(), 0.0);
            let (trace, diverged) = keep_diverged(solver.run(&lambda0, &dual_opts))?;
            (trace, diverged, Some(alpha))
        }
        Algorithm::Dual(a) => {
            let p = instance.separable(cfg.algorithm)?;
            let rule = scalar_rule(cfg, || tune_dual_stepsize(p, a, schedule))?;
            let solver = DualSolver::new(p, a, schedule, rule)?.with_inner(inner);
            let lambda0 = start_vector(cfg, p.rows(), 0.0);
            let (trace, diverged) = keep_diverged(solver.run(&lambda0, &dual_opts))?;
            (trace, diverged, Some(solver.rule().scalar_at(0)))
        }
        Algorithm::Positive(a) if a.is_multiplier_method() => {
            let p = instance.separable(cfg.algorithm)?;
            let alphas = match &cfg.stepsize {
                StepsizeSpec::Constant { alpha } => Vector::from_element(p.rows(), *alpha),
                StepsizeSpec::Diagonal { alphas } => Vector::from_column_slice(alphas),
                StepsizeSpec::Tuned { .. } => return Err(untunable(cfg)),
                _ => {
                    return Err(Error::Config(format!(
                        "stepsize.rule: {a} takes constant penalty parameters"
                    )))
                }
            };
            if a == PositiveAlgorithm::ExpAl && p.m() != 1 {
                return Err(Error::Config(
                    "algorithm: exp_al needs a single block; use iaali".into(),
                ));
            }
            let solver = MultiplierSolver::new(p, schedule, alphas.clone())?.with_inner(inner);
            let mu0 = start_vector(cfg, p.rows(), 1.0);
            let (trace, diverged) = keep_diverged(solver.run(&mu0, &dual_opts))?;
            (trace, diverged, Some(alphas.max()))
        }
        Algorithm::Positive(a) => {
            let p = instance.sum(cfg.algorithm)?;
            let stepsizes = match &cfg.stepsize {
                StepsizeSpec::Constant { alpha } => CoordinateStepsizes::uniform(*alpha, p.dim()),
                StepsizeSpec::Diagonal { alphas } => CoordinateStepsizes::Fixed(Vector::from_column_slice(alphas)),
                StepsizeSpec::Heuristic { alpha, delta } => CoordinateStepsizes::Heuristic {
                    alpha: *alpha,
                    delta: *delta,
                },
                _ => return Err(untunable(cfg)),
            };
            let solver = EntropySolver::new(p, a, schedule, stepsizes)?.with_inner(inner);
            let x0 = start_vector(cfg, p.dim(), 1.0);
            let opts = RunOptions {
                max_iter: cfg.stop.max_iter,
                tol,
                ..RunOptions::default()
            };
            let (trace, diverged) = keep_diverged(solver.run(&x0, &opts))?;
            let alpha = trace.rows.get(1).and_then(|r| r.alpha);
            (trace, diverged, alpha)
        }
    };
    let summary = summarize(cfg, &instance, &schedule, &trace, diverged, alpha, c_fit, l_over_sigma);
    Ok(RunOutcome { trace, summary })
}

#[allow(clippy::too_many_arguments)]
fn summarize(
    cfg: &ExperimentConfig,
    instance: &Instance,
    schedule: &DelaySchedule,
    trace: &Trace,
    diverged: bool,
    alpha: Option<f64>,
    c_fit: Option<f64>,
    l_over_sigma: Option<f64>,
) -> Summary {
    let m = instance.m();
    let burn_in = default_burn_in(schedule, m);
    let fit: Option<RateFit> = fit_trace(trace, burn_in).ok();
    let burn_in = fit.map_or(burn_in, |f| f.burn_in);
    let last = trace.last();
    let final_error = last.and_then(|r| r.err);
    let converged = !diverged
        && match (cfg.stop.tol, last) {
            (Some(t), Some(r)) => {
                let err_ok = r.err.is_some_and(|e| e <= t);
                match trace.kind {
                    TraceKind::Dual => r.obj <= t && r.err.is_none_or(|e| e <= t),
                    _ => err_ok,
                }
            }
            _ => false,
        };
    let status = if diverged {
        RunStatus::Diverged
    } else if converged {
        RunStatus::Converged
    } else {
        RunStatus::MaxIter
    };
    let delay_bound = match cfg.algorithm {
        // Blocks and multipliers of these methods are always current.
        Algorithm::Dual(
            DualAlgorithm::Ial | DualAlgorithm::IaalCycle | DualAlgorithm::Admm | DualAlgorithm::AdmmScaled,
        )
        | Algorithm::Primal(PrimalAlgorithm::Is | PrimalAlgorithm::Ip | PrimalAlgorithm::FullGradient) => 0,
        _ => schedule.bound(m),
    };
    let max_staleness = trace.max_staleness();
    let positivity = trace
        .rows
        .iter()
        .all(|r| r.mu_min.is_none_or(|v| v > 0.0) && r.x_min.is_none_or(|v| v > 0.0));
    Summary {
        name: cfg.prefix(),
        algorithm: cfg.algorithm.to_string(),
        status,
        alpha,
        iterations: trace.iterations(),
        evaluations: trace.evaluations,
        final_error,
        rho_hat: fit.map(|f| f.rho_hat),
        gamma_hat: fit.map(|f| f.gamma_hat),
        r2: fit.map(|f| f.r2),
        burn_in,
        c_fit,
        l_over_sigma,
        delay_bound,
        max_staleness,
        pass_flags: PassFlags {
            converged,
            rate_below_one: fit.is_some_and(|f| f.rho_hat < 1.0),
            fit_quality: fit.is_some_and(|f| f.r2 > 0.95),
            delay_bound: max_staleness <= delay_bound,
            positivity,
        },
    }
}

/// Stepsize search for a config's algorithm and instance.
pub fn tune_experiment(cfg: &ExperimentConfig) -> Result<Tuning> {
    let spec = resolve_problem(&cfg.problem, &cfg.base_dir, cfg.seed)?;
    let instance = build_instance(&spec)?;
    let schedule = cfg.schedule.schedule(cfg.seed)?;
    match cfg.algorithm {
        Algorithm::Primal(a) => {
            let p = instance.sum(cfg.algorithm)?;
            tune_constant_stepsize(p, a, schedule, &start_vector(cfg, p.dim(), 0.0))
        }
        Algorithm::Dual(
            a @ (DualAlgorithm::Iadg | DualAlgorithm::Ial | DualAlgorithm::Iaal | DualAlgorithm::IaalCycle),
        ) => tune_dual_stepsize(instance.separable(cfg.algorithm)?, a, schedule),
        _ => Err(untunable(cfg)),
    }
}

/// One row of a comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub name: String,
    pub algorithm: String,
    pub alpha: Option<f64>,
    pub status: RunStatus,
    pub iterations: usize,
    /// First iteration whose error is within the tolerance.
    pub iterations_to_tol: Option<usize>,
    pub rho_hat: Option<f64>,
    pub evaluations: usize,
    pub wall: Duration,
}

/// Run several configs over one instance concurrently; rows come back in
/// config order. Configs over different instances are rejected.
pub fn compare_experiments(configs: &[ExperimentConfig]) -> Result<Vec<CompareRow>> {
    if configs.len() < 2 {
        return Err(Error::Config("compare needs at least two configs".into()));
    }
    let specs = configs
        .iter()
        .map(|c| resolve_problem(&c.problem, &c.base_dir, c.seed))
        .collect::<Result<Vec<_>>>()?;
    if let Some(i) = specs.iter().position(|s| *s != specs[0]) {
        return Err(Error::Config(format!(
            "config {} uses a different instance than config 1",
            i + 1
        )));
    }
    let results: Vec<Result<CompareRow>> = std::thread::scope(|scope| {
        let handles: Vec<_> = configs
            .iter()
            .map(|cfg| {
                scope.spawn(move || {
                    let started = Instant::now();
                    let out = run_experiment(cfg)?;
                    Ok(compare_row(cfg, &out, started.elapsed()))
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| {
                h.join()
                    .unwrap_or_else(|_| Err(Error::Config("a comparison run panicked".into())))
            })
            .collect()
    });
    results.into_iter().collect()
}

fn compare_row(cfg: &ExperimentConfig, out: &RunOutcome, wall: Duration) -> CompareRow {
    let tol = cfg.stop.tol;
    let iterations_to_tol = tol.and_then(|t| {
        out.trace
            .rows
            .iter()
            .find(|r| r.err.is_some_and(|e| e <= t) && (out.trace.kind != TraceKind::Dual || r.obj <= t))
            .map(|r| r.k)
    });
    CompareRow {
        name: out.summary.name.clone(),
        algorithm: out.summary.algorithm.clone(),
        alpha: out.summary.alpha,
        status: out.summary.status,
        iterations: out.summary.iterations,
        iterations_to_tol,
        rho_hat: out.summary.rho_hat,
        evaluations: out.summary.evaluations,
        wall,
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Comparison rows as CSV; wall time is left out so the file is
/// reproducible.
pub fn compare_csv(rows: &[CompareRow]) -> String {
    let mut out = String::from("name,algorithm,alpha,status,iterations,iterations_to_tol,rho_hat,evaluations\n");
    for r in rows {
        let status = serde_json::to_value(r.status)
            .ok()
            .and_then(|v| v.as_str().map(String::from));
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.name,
            r.algorithm,
            opt(r.alpha.map(|a| format!("{a:.16e}"))),
            status.unwrap_or_default(),
            r.iterations,
            opt(r.iterations_to_tol),
            opt(r.rho_hat.map(|v| format!("{v:.16e}"))),
            r.evaluations
        ));
    }
    out
}

/// Human-readable comparison table with wall times.
pub fn compare_table(rows: &[CompareRow]) -> String {
    let mut out = format!(
        "{:<20} {:<12} {:>12} {:>10} {:>10} {:>12} {:>10}\n",
        "name", "algorithm", "alpha", "iters", "to_tol", "rho_hat", "wall_ms"
    );
    for r in rows {
        out.push_str(&format!(
            "{:<20} {:<12} {:>12} {:>10} {:>10} {:>12} {:>10.1}\n",
            r.name,
            r.algorithm,
            opt(r.alpha.map(|a| format!("{a:.4e}"))),
            r.iterations,
            r.iterations_to_tol.map_or_else(|| "-".to_string(), |k| k.to_string()),
            opt(r.rho_hat.map(|v| format!("{v:.6}"))),
            r.wall.as_secs_f64() * 1e3
        ));
    }
    out
}
