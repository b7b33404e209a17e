//! The deterministic check suite behind `iaprox check`: form equivalences,
//! oracle self-checks, rate and parity checks, the delay contract and the
//! positivity audit, all on built-in instances with fixed seeds.

use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::analysis::{
    default_burn_in, delayed_recursion_bound_check, equivalence_runner, error_audit, fit_rate, fit_trace, kkt_residual,
    kkt_separable, kkt_sum, EquivalenceCase,
};
use crate::delay::{DelayPolicy, DelaySchedule, Selection};
use crate::dual::{tune_dual_stepsize, AdmmSolver, AdmmVariant, DualAlgorithm, DualRunOptions, DualSolver};
use crate::error::{Error, Result};
use crate::inner::InnerOptions;
use crate::instances;
use crate::linalg::Vector;
use crate::nonquadratic::{
    exp_multiplier_duality_check, CoordinateStepsizes, EntropySolver, MultiplierSolver, PositiveAlgorithm,
    DEFAULT_DELTA,
};
use crate::primal::{tune_constant_stepsize, PrimalAlgorithm, PrimalSolver, RunOptions, StepRule};
use crate::problem::SumProblem;
use crate::trace::Trace;

/// Seed of every random instance in the suite.
pub const SUITE_SEED: u64 = 7;
/// Delay bounds of the linear-rate and parity checks.
pub const RATE_BOUNDS: [usize; 3] = [0, 1, 5];

/// Knobs of a suite run.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SuiteOptions {
    /// Inner solver settings for proximal and block subproblems.
    pub inner: InnerOptions,
}

/// One named check: it passes when `value ≤ limit`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub limit: f64,
    pub detail: String,
}

/// Per-run audit of the delay contract and positivity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub name: String,
    pub bound: usize,
    pub iterations: usize,
    pub max_staleness: usize,
    pub staleness_violations: usize,
    /// Whether iterates or multipliers must stay strictly positive.
    pub positive: bool,
    pub positivity_violations: usize,
    #[serde(skip)]
    pub csv: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub passed: bool,
    pub checks: Vec<Check>,
    pub runs: Vec<RunRecord>,
}

impl SuiteReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("name,passed,value,limit\n");
        for c in &self.checks {
            let _ = writeln!(out, "{},{},{:.16e},{:.16e}", c.name, c.passed, c.value, c.limit);
        }
        out
    }

    /// One line per check.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let verdict = if c.passed { "PASS" } else { "FAIL" };
            let _ = writeln!(
                out,
                "{verdict} {:<28} {:.3e} <= {:.1e}  {}",
                c.name, c.value, c.limit, c.detail
            );
        }
        out
    }

    /// Write `checks.csv`, `report.json` and one trace CSV per run under
    /// `dir/traces`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        let traces = dir.join("traces");
        std::fs::create_dir_all(&traces)?;
        std::fs::write(dir.join("checks.csv"), self.to_csv())?;
        std::fs::write(dir.join("report.json"), self.to_json())?;
        for r in &self.runs {
            std::fs::write(traces.join(format!("{}.csv", r.name)), &r.csv)?;
        }
        Ok(())
    }
}

#[derive(Default)]
struct Recorder {
    checks: Vec<Check>,
    runs: Vec<RunRecord>,
}

impl Recorder {
    fn check(&mut self, name: &str, limit: f64, outcome: Result<(f64, String)>) {
        let check = match outcome {
            Ok((value, detail)) => Check {
                name: name.into(),
                passed: value <= limit,
                value,
                limit,
                detail,
            },
            Err(e) => Check {
                name: name.into(),
                passed: false,
                value: f64::INFINITY,
                limit,
                detail: format!("error: {e}"),
            },
        };
        self.checks.push(check);
    }

    fn record(&mut self, name: &str, trace: &Trace, bound: usize, positive: bool) {
        let staleness_violations = trace.rows.iter().filter(|r| r.staleness > bound).count();
        let positivity_violations = if positive {
            trace
                .rows
                .iter()
                .filter(|r| r.mu_min.is_some_and(|v| !(v > 0.0)) || r.x_min.is_some_and(|v| !(v > 0.0)))
                .count()
        } else {
            0
        };
        self.runs.push(RunRecord {
            name: name.into(),
            bound,
            iterations: trace.iterations(),
            max_staleness: trace.max_staleness(),
            staleness_violations,
            positive,
            positivity_violations,
            csv: trace.to_csv(),
        });
    }
}

fn fixed_delay(b: usize) -> DelaySchedule {
    if b == 0 {
        DelaySchedule::zero_delay()
    } else {
        DelaySchedule::new(DelayPolicy::FixedDelay(b), Selection::Cyclic)
    }
}

fn max_or_zero(values: impl Iterator<Item = f64>) -> f64 {
    values.fold(0.0, f64::max)
}

/// The instance of the rate checks: ten `½‖x − c_i‖²` in `ℝ⁵`.
pub fn rate_instance() -> Result<SumProblem> {
    instances::squared_distance_sum(10, 5, SUITE_SEED)
}

/// Outcome of one linear-rate run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateRun {
    pub alpha: f64,
    pub rho_hat: f64,
    pub r2: f64,
    /// First iteration with `‖x_k − x*‖ ≤ 1e-8`.
    pub hit_1e8: Option<usize>,
    pub iterations: usize,
}

/// IAP with the tuned constant stepsize and fixed delay `b`, run to `1e-12`
/// so the regression spans enough decades to average out the periodic
/// ripple of cyclic order.
pub fn iap_rate_run(problem: &SumProblem, b: usize) -> Result<(RateRun, Trace)> {
    let schedule = fixed_delay(b);
    let x0 = Vector::zeros(problem.dim());
    let tuning = tune_constant_stepsize(problem, PrimalAlgorithm::Iap, schedule, &x0)?;
    let solver = PrimalSolver::new(
        problem,
        PrimalAlgorithm::Iap,
        schedule,
        StepRule::Constant(tuning.alpha),
    )?;
    let opts = RunOptions {
        max_iter: 20_000,
        tol: Some(1e-12),
        ..RunOptions::default()
    };
    let trace = solver.run(&x0, &opts)?;
    let fit = fit_trace(&trace, default_burn_in(&schedule, problem.m()))?;
    let hit_1e8 = trace
        .rows
        .iter()
        .find(|r| r.err.is_some_and(|e| e <= 1e-8))
        .map(|r| r.k);
    let run = RateRun {
        alpha: tuning.alpha,
        rho_hat: fit.rho_hat,
        r2: fit.r2,
        hit_1e8,
        iterations: trace.iterations(),
    };
    Ok((run, trace))
}

/// `ρ̂` of IAP, IAG and full gradient at `α = ᾱ/10`, with `ᾱ` the tuned IAP
/// stepsize for fixed delay `b`.
pub fn rate_parity(problem: &SumProblem, b: usize) -> Result<([f64; 3], Vec<Trace>)> {
    let schedule = fixed_delay(b);
    let x0 = Vector::zeros(problem.dim());
    let alpha = tune_constant_stepsize(problem, PrimalAlgorithm::Iap, schedule, &x0)?.alpha / 10.0;
    let opts = RunOptions {
        max_iter: 20_000,
        tol: Some(1e-12),
        ..RunOptions::default()
    };
    let mut rhos = [0.0; 3];
    let mut traces = Vec::with_capacity(3);
    for (slot, a) in [
        PrimalAlgorithm::Iap,
        PrimalAlgorithm::Iag,
        PrimalAlgorithm::FullGradient,
    ]
    .into_iter()
    .enumerate()
    {
        let trace = PrimalSolver::new(problem, a, schedule, StepRule::Constant(alpha))?.run(&x0, &opts)?;
        rhos[slot] = fit_trace(&trace, default_burn_in(&schedule, problem.m()))?.rho_hat;
        traces.push(trace);
    }
    Ok((rhos, traces))
}

/// Largest relative gap `|ρ_a − ρ_b| / max(ρ_a, ρ_b)` among three rates.
pub fn relative_spread(rhos: &[f64; 3]) -> f64 {
    let hi = rhos.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = rhos.iter().copied().fold(f64::INFINITY, f64::min);
    (hi - lo) / hi
}

/// Outcome of the strict-complementarity run of entropy IAG.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayRun {
    pub alpha: f64,
    /// `max_k |(x¹_{k+1}/x¹_k) / e^{−α} − 1|` after burn-in.
    pub ratio_gap: f64,
    pub x2_error: f64,
    pub min_x1: f64,
}

/// Entropy IAG on `x¹ + ½(x² − 1)²` over `x ≥ 0` from `(0.1, 0.9)`, stopped
/// well before `x¹` underflows.
pub fn strict_complementarity_decay(alpha: f64, steps: usize, burn_in: usize) -> Result<(DecayRun, Trace)> {
    let p = instances::strict_complementarity()?;
    let solver = EntropySolver::new(
        &p,
        PositiveAlgorithm::EntropyIag,
        DelaySchedule::last_update(),
        CoordinateStepsizes::uniform(alpha, 2),
    )?;
    let x0 = Vector::from_column_slice(&[0.1, 0.9]);
    let opts = RunOptions {
        tol: None,
        record_iterates: true,
        ..RunOptions::iterations(steps)
    };
    let trace = solver.run(&x0, &opts)?;
    let target = (-alpha).exp();
    let xs = &trace.iterates;
    let ratio_gap = max_or_zero(
        xs.windows(2)
            .skip(burn_in)
            .map(|w| ((w[1][0] / w[0][0]) / target - 1.0).abs()),
    );
    let last = xs.last().ok_or_else(|| Error::Precondition("empty run".into()))?;
    let run = DecayRun {
        alpha,
        ratio_gap,
        x2_error: (last[1] - 1.0).abs(),
        min_x1: xs.iter().map(|x| x[0]).fold(f64::INFINITY, f64::min),
    };
    let mut trace = trace;
    trace.iterates.clear();
    Ok((run, trace))
}

/// Run every check. Failures are reported, never raised.
pub fn run_check_suite(opts: &SuiteOptions) -> SuiteReport {
    let mut rec = Recorder::default();
    let inner = opts.inner;

    rec.check("kkt_oracle", 1e-10, kkt_oracle_check());
    rec.check("fit_rate_geometric", 1e-12, fit_rate_check());
    rec.check("recursion_bound", 0.0, recursion_bound_check());
    rec.check("iap_forms_quadratic", 1e-10, iap_forms_quadratic(&inner));
    rec.check("iap_forms_smooth", 1e-10, iap_forms_smooth(&inner));
    rec.check("ial_dual_prox", 1e-9, ial_dual_prox());
    rec.check("admm_scaled_dense", 1e-10, admm_scaled_dense());
    rec.check("ip_implicit_identity", 1e-10, ip_identity(&inner));
    let linear = linear_rate(&mut rec);
    rec.check("iap_linear_rate", 0.0, linear);
    let parity = parity_check(&mut rec);
    rec.check("rate_parity", 0.05, parity);
    let audit = error_audit_check(&mut rec);
    rec.check("error_audit_identity", 1e-10, audit);
    let dual = dual_runs(&mut rec, &inner);
    rec.check("dual_convergence", 0.0, dual);
    rec.check("exp_entropy_duality", 1e-8, exp_duality(&inner));
    let multipliers = multiplier_runs(&mut rec, &inner);
    rec.check("exp_multiplier_convergence", 1e-6, multipliers);
    let entropy = entropy_runs(&mut rec, &inner);
    rec.check("entropy_convergence", 1e-6, entropy);
    let decay = decay_check(&mut rec);
    rec.check("strict_complementarity_decay", 0.1, decay);

    let violations: usize = rec.runs.iter().map(|r| r.staleness_violations).sum();
    let detail = format!("{} runs", rec.runs.len());
    rec.check("delay_contract", 0.0, Ok((violations as f64, detail)));
    let positive: Vec<_> = rec.runs.iter().filter(|r| r.positive).collect();
    let violations: usize = positive.iter().map(|r| r.positivity_violations).sum();
    let detail = format!("{} runs", positive.len());
    rec.check("positivity", 0.0, Ok((violations as f64, detail)));

    SuiteReport {
        passed: rec.checks.iter().all(|c| c.passed),
        checks: rec.checks,
        runs: rec.runs,
    }
}

fn kkt_oracle_check() -> Result<(f64, String)> {
    let sym = instances::symmetric_two_block()?;
    let k = kkt_separable(&sym)?;
    let known = sym
        .known()
        .ok_or_else(|| Error::OracleUnavailable("symmetric instance".into()))?;
    let mut worst = (&k.lambda - &known.lambda).amax();
    for (a, b) in k.y.iter().zip(&known.y) {
        worst = worst.max((a - b).amax());
    }
    let two = instances::two_quadratics()?;
    worst = worst.max((kkt_sum(&two)?.y[0][0] - 1.0).abs());
    let dense = instances::dense_rows(5, 3, 2, SUITE_SEED)?;
    let k = kkt_separable(&dense)?;
    worst = worst.max(k.residual).max(kkt_residual(&dense, &k.y, &k.lambda)?);
    Ok((worst, "symmetric, two quadratics, random 5-block".into()))
}

fn fit_rate_check() -> Result<(f64, String)> {
    let rho = 0.93;
    let errors: Vec<f64> = (0..200).map(|k| 2.0 * rho_pow(rho, k)).collect();
    let fit = fit_rate(&errors, 10)?;
    Ok(((fit.rho_hat - rho).abs(), format!("rho_hat = {:.15}", fit.rho_hat)))
}

fn rho_pow(rho: f64, k: usize) -> f64 {
    (k as f64 * rho.ln()).exp()
}

fn recursion_bound_check() -> Result<(f64, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(SUITE_SEED);
    let mut failures = 0;
    for _ in 0..200 {
        let total: f64 = rng.gen_range(0.01..0.99);
        let p = total * rng.gen_range(0.0..1.0);
        let q = total - p;
        let d = rng.gen_range(1..=10);
        let beta0 = rng.gen_range(0.1..10.0);
        if !delayed_recursion_bound_check(p, q, d, beta0, 1000)?.passed {
            failures += 1;
        }
    }
    Ok((failures as f64, "200 random (p, q, d), horizon 1000".into()))
}

fn iap_forms_quadratic(inner: &InnerOptions) -> Result<(f64, String)> {
    let p = rate_instance()?;
    let mut worst: f64 = 0.0;
    for b in RATE_BOUNDS {
        let case = EquivalenceCase::IapForms {
            problem: &p,
            schedule: fixed_delay(b),
            alpha: 0.05,
            x0: Vector::zeros(5),
        };
        worst = worst.max(equivalence_runner(&case, 100, inner)?);
    }
    Ok((worst, "100 lockstep steps, b in {0, 1, 5}".into()))
}

fn iap_forms_smooth(inner: &InnerOptions) -> Result<(f64, String)> {
    let p = instances::smooth_logistic_sum(5, 3, SUITE_SEED)?;
    let case = EquivalenceCase::IapForms {
        problem: &p,
        schedule: DelaySchedule::last_update(),
        alpha: 0.1,
        x0: Vector::from_element(3, 0.5),
    };
    let worst = equivalence_runner(&case, 100, inner)?;
    Ok((worst, format!("logistic sum, prox tol {:e}", inner.tol)))
}

fn ial_dual_prox() -> Result<(f64, String)> {
    let p = instances::scalar_equality()?;
    let case = EquivalenceCase::IalDualProx {
        problem: &p,
        lambda0: Vector::zeros(1),
        alpha: 1.0,
    };
    Ok((
        equivalence_runner(&case, 10, &InnerOptions::default())?,
        "10 steps, m = 1".into(),
    ))
}

fn admm_scaled_dense() -> Result<(f64, String)> {
    let p = instances::dense_rows(4, 3, 2, SUITE_SEED)?;
    let case = EquivalenceCase::AdmmScaled {
        problem: &p,
        alpha: 1.0,
    };
    Ok((
        equivalence_runner(&case, 100, &InnerOptions::default())?,
        "100 steps, 4 blocks".into(),
    ))
}

fn ip_identity(inner: &InnerOptions) -> Result<(f64, String)> {
    let p = instances::random_quadratic_sum(5, 3, SUITE_SEED)?;
    let alpha = 0.1;
    let schedule = DelaySchedule::new(DelayPolicy::ZeroDelay, Selection::Random { seed: SUITE_SEED });
    let solver = PrimalSolver::new(&p, PrimalAlgorithm::Ip, schedule, StepRule::Constant(alpha))?.with_inner(*inner);
    let mut state = solver.start(&Vector::from_element(3, 1.0))?;
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let x = state.x.clone();
        let info = solver.step(&mut state)?;
        let i = info
            .index
            .ok_or_else(|| Error::Precondition("IP step without an index".into()))?;
        let g = p.component(i).gradient(&state.x)?;
        worst = worst.max((&state.x - &x + g * alpha).amax());
    }
    Ok((worst, "1000 random IP steps".into()))
}

fn linear_rate(rec: &mut Recorder) -> Result<(f64, String)> {
    let p = rate_instance()?;
    let mut failures = 0;
    let mut detail = Vec::new();
    for b in RATE_BOUNDS {
        let (run, trace) = iap_rate_run(&p, b)?;
        rec.record(&format!("iap_rate_b{b}"), &trace, b, false);
        let ok = run.rho_hat < 0.999 && run.r2 > 0.95 && run.hit_1e8.is_some();
        failures += usize::from(!ok);
        detail.push(format!("b={b}: rho {:.4} r2 {:.4}", run.rho_hat, run.r2));
    }
    Ok((failures as f64, detail.join("; ")))
}

fn parity_check(rec: &mut Recorder) -> Result<(f64, String)> {
    let p = rate_instance()?;
    let mut worst: f64 = 0.0;
    for b in RATE_BOUNDS {
        let (rhos, traces) = rate_parity(&p, b)?;
        for (trace, tag) in traces.iter().zip(["iap", "iag", "gd"]) {
            let bound = if tag == "gd" { 0 } else { b };
            rec.record(&format!("parity_{tag}_b{b}"), trace, bound, false);
        }
        worst = worst.max(relative_spread(&rhos));
    }
    Ok((worst, "IAP, IAG, full gradient at alpha/10".into()))
}

fn error_audit_check(rec: &mut Recorder) -> Result<(f64, String)> {
    let p = rate_instance()?;
    let schedule = fixed_delay(5);
    let alpha = 0.05;
    let solver = PrimalSolver::new(&p, PrimalAlgorithm::Iap, schedule, StepRule::Constant(alpha))?;
    let opts = RunOptions {
        record_iterates: true,
        ..RunOptions::iterations(300)
    };
    let trace = solver.run(&Vector::zeros(5), &opts)?;
    rec.record("audit_iap_b5", &trace, 5, false);
    let audit = error_audit(&p, PrimalAlgorithm::Iap, &trace, alpha, 5)?;
    if !audit.c_fit.is_finite() {
        return Err(Error::Precondition("fitted C is not finite".into()));
    }
    Ok((
        audit.identity_gap.max(audit.big_e_gap),
        format!("C_fit = {:.4}", audit.c_fit),
    ))
}

fn dual_runs(rec: &mut Recorder, inner: &InnerOptions) -> Result<(f64, String)> {
    let sym = instances::symmetric_two_block()?;
    let sparse = instances::sparse_rows()?;
    let opts = DualRunOptions::default();
    let lambda0 = Vector::zeros(1);
    let mut failures = 0;
    let mut note = |rec: &mut Recorder, name: String, trace: Trace, bound: usize| {
        let last = trace.last().cloned();
        let ok = last.is_some_and(|r| r.obj <= 1e-6 && r.err.is_some_and(|e| e <= 1e-6));
        failures += usize::from(!ok);
        rec.record(&name, &trace, bound, false);
    };
    for alpha in [0.1, 1.0, 10.0] {
        let trace = AdmmSolver::new(&sym, AdmmVariant::Plain, alpha)?
            .with_inner(*inner)
            .run(&lambda0, &opts)?;
        note(rec, format!("admm_symmetric_a{alpha}"), trace, 0);
    }
    let trace = AdmmSolver::new(&sparse, AdmmVariant::Scaled, 1.0)?
        .with_inner(*inner)
        .run(&Vector::zeros(2), &opts)?;
    note(rec, "admm_scaled_sparse".into(), trace, 0);
    let schedule = DelaySchedule::last_update();
    for a in [DualAlgorithm::Iadg, DualAlgorithm::Iaal] {
        let alpha = tune_dual_stepsize(&sym, a, schedule)?.alpha;
        let trace = DualSolver::new(&sym, a, schedule, StepRule::Constant(alpha))?
            .with_inner(*inner)
            .run(&lambda0, &opts)?;
        note(rec, format!("{a}_symmetric"), trace, schedule.bound(2));
    }
    for a in [DualAlgorithm::Ial, DualAlgorithm::IaalCycle] {
        let trace = DualSolver::new(&sym, a, schedule, StepRule::Constant(0.5))?
            .with_inner(*inner)
            .run(&lambda0, &opts)?;
        note(rec, format!("{a}_symmetric"), trace, 0);
    }
    Ok((
        failures as f64,
        "ADMM at 0.1, 1, 10; scaled ADMM; IADG; IAAL; IAL; IAAL cycle".into(),
    ))
}

fn exp_duality(inner: &InnerOptions) -> Result<(f64, String)> {
    let p = instances::exp_al_worked()?;
    let worst = exp_multiplier_duality_check(&p, 1.0, 1.0, 10, inner)?
        .max(exp_multiplier_duality_check(&p, 1.0, 0.3, 10, inner)?);
    Ok((worst, "10 steps at alpha 1 and 0.3".into()))
}

fn multiplier_runs(rec: &mut Recorder, inner: &InnerOptions) -> Result<(f64, String)> {
    let opts = DualRunOptions {
        max_iter: 5000,
        tol: Some(1e-7),
        ..DualRunOptions::default()
    };
    let schedule = DelaySchedule::last_update();
    let worked = instances::exp_al_worked()?;
    let trace = MultiplierSolver::new(&worked, schedule, Vector::from_element(1, 1.0))?
        .with_inner(*inner)
        .run(&Vector::from_element(1, 1.0), &opts)?;
    let worked_err = trace.last().and_then(|r| r.err).unwrap_or(f64::INFINITY);
    rec.record("exp_al_worked", &trace, 0, true);
    let two = instances::two_block_inequality()?;
    let trace = MultiplierSolver::new(&two, schedule, Vector::from_element(1, 0.2))?
        .with_inner(*inner)
        .run(&Vector::from_element(1, 1.0), &opts)?;
    let two_err = trace.last().and_then(|r| r.err).unwrap_or(f64::INFINITY);
    rec.record("iaali_two_block", &trace, schedule.bound(2), true);
    Ok((
        worked_err.max(two_err),
        format!("worked {worked_err:.2e}, two-block {two_err:.2e}"),
    ))
}

fn entropy_runs(rec: &mut Recorder, inner: &InnerOptions) -> Result<(f64, String)> {
    let p = instances::strict_complementarity()?;
    let schedule = DelaySchedule::last_update();
    let x0 = Vector::from_column_slice(&[0.1, 0.9]);
    let opts = RunOptions {
        tol: None,
        ..RunOptions::iterations(400)
    };
    let mut worst: f64 = 0.0;
    let runs = [
        (
            "entropy_iap",
            PositiveAlgorithm::EntropyIap,
            CoordinateStepsizes::uniform(0.5, 2),
        ),
        (
            "entropy_iag",
            PositiveAlgorithm::EntropyIag,
            CoordinateStepsizes::uniform(0.5, 2),
        ),
        (
            "entropy_iag_heuristic",
            PositiveAlgorithm::EntropyIag,
            CoordinateStepsizes::Heuristic {
                alpha: 0.5,
                delta: DEFAULT_DELTA,
            },
        ),
        (
            "proj_iag",
            PositiveAlgorithm::ProjIag,
            CoordinateStepsizes::uniform(0.5, 2),
        ),
    ];
    for (name, a, steps) in runs {
        let solver = EntropySolver::new(&p, a, schedule, steps)?.with_inner(*inner);
        let trace = solver.run(&x0, &opts)?;
        let mut state = solver.start(&x0)?;
        for _ in 0..opts.max_iter {
            solver.step(&mut state)?;
        }
        worst = worst.max((state.x[1] - 1.0).abs());
        rec.record(name, &trace, schedule.bound(2), a != PositiveAlgorithm::ProjIag);
    }
    Ok((worst, "max |x2 - 1| after 400 steps".into()))
}

fn decay_check(rec: &mut Recorder) -> Result<(f64, String)> {
    let (run, trace) = strict_complementarity_decay(0.5, 400, 20)?;
    rec.record("strict_complementarity", &trace, 1, true);
    if run.x2_error > 1e-6 {
        return Ok((f64::INFINITY, format!("x2 error {:.2e}", run.x2_error)));
    }
    Ok((
        run.ratio_gap,
        format!("x2 error {:.2e}, min x1 {:.2e}", run.x2_error, run.min_x1),
    ))
}
