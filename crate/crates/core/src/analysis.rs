//! Oracles and audits: direct KKT solves for quadratic instances, linear-rate
//! fits, the delayed-recursion bound, the error decomposition of aggregated
//! methods, and lockstep equivalence runs.

use crate::delay::DelaySchedule;
use crate::dual::admm::admm_scaled_deviation;
use crate::dual::prox_al_equivalence_check;
use crate::error::{Error, Result};
use crate::inner::InnerOptions;
use crate::linalg::{Matrix, Vector};
use crate::primal::{IapForm, PrimalAlgorithm, PrimalSolver, StepRule};
use crate::problem::{ConstraintKind, SeparableProblem, SumProblem};
use crate::trace::Trace;

/// Least-squares fit of `ln e_k ≈ ln γ + k ln ρ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub rho_hat: f64,
    pub gamma_hat: f64,
    pub burn_in: usize,
    pub r2: f64,
    /// Largest `e_{k+1}/e_k` inside the fitted window.
    pub max_ratio: f64,
    /// Number of points used.
    pub points: usize,
}

/// Fit a geometric rate to `errors[burn_in..]`. The window stops at the
/// first zero or non-finite entry.
pub fn fit_rate(errors: &[f64], burn_in: usize) -> Result<RateFit> {
    let cut = errors
        .iter()
        .position(|e| !(e.is_finite() && *e > 0.0))
        .unwrap_or(errors.len());
    if cut < burn_in + 2 {
        return Err(Error::Precondition(format!(
            "rate fit needs two positive errors after burn-in {burn_in}, have {} usable",
            cut.saturating_sub(burn_in)
        )));
    }
    let window = &errors[burn_in..cut];
    let n = window.len() as f64;
    let ks: Vec<f64> = (burn_in..cut).map(|k| k as f64).collect();
    let ys: Vec<f64> = window.iter().map(|e| e.ln()).collect();
    let k_mean = ks.iter().sum::<f64>() / n;
    let y_mean = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut ss_tot) = (0.0, 0.0, 0.0);
    for (k, y) in ks.iter().zip(&ys) {
        sxy += (k - k_mean) * (y - y_mean);
        sxx += (k - k_mean).powi(2);
        ss_tot += (y - y_mean).powi(2);
    }
    let slope = sxy / sxx;
    let intercept = y_mean - slope * k_mean;
    let ss_res: f64 = ks
        .iter()
        .zip(&ys)
        .map(|(k, y)| (y - intercept - slope * k).powi(2))
        .sum();
    // Constant logs leave only rounding noise in ss_tot.
    let r2 = if ss_tot <= 1e-28 * n * (1.0 + y_mean * y_mean) {
        1.0
    } else {
        1.0 - ss_res / ss_tot
    };
    let max_ratio = window.windows(2).map(|w| w[1] / w[0]).fold(f64::NEG_INFINITY, f64::max);
    Ok(RateFit {
        rho_hat: slope.exp(),
        gamma_hat: intercept.exp(),
        burn_in,
        r2,
        max_ratio,
        points: window.len(),
    })
}

/// [`fit_rate`] on the error column of a trace. Runs that reach the
/// tolerance within a few passes would leave nothing after the full burn-in,
/// so it is capped at half of the usable prefix; the fit reports the burn-in
/// it used.
pub fn fit_trace(trace: &Trace, burn_in: usize) -> Result<RateFit> {
    let errors = trace.errors();
    let usable = errors
        .iter()
        .position(|e| !(e.is_finite() && *e > 0.0))
        .unwrap_or(errors.len());
    fit_rate(&errors, burn_in.min(usable / 2))
}

/// Default burn-in `2b + m`.
pub fn default_burn_in(schedule: &DelaySchedule, m: usize) -> usize {
    2 * schedule.bound(m) + m
}

/// Primal-dual solution from a direct linear solve.
#[derive(Debug, Clone, PartialEq)]
pub struct KktSolution {
    pub y: Vec<Vector>,
    pub lambda: Vector,
    /// Largest stationarity or feasibility violation.
    pub residual: f64,
}

/// Solve `[blockdiag(Q_i) A'; A 0] [y; λ] = [−c; b]` for a quadratic
/// equality-constrained problem over free blocks.
pub fn kkt_separable(problem: &SeparableProblem) -> Result<KktSolution> {
    if problem.kind() != ConstraintKind::Equality {
        return Err(Error::OracleUnavailable("KKT oracle needs equality constraints".into()));
    }
    let r = problem.rows();
    let dims: Vec<usize> = problem.blocks().iter().map(|b| b.dim()).collect();
    let n: usize = dims.iter().sum();
    let mut kkt = Matrix::zeros(n + r, n + r);
    let mut rhs = Vector::zeros(n + r);
    let mut offset = 0;
    for blk in problem.blocks() {
        let (q, c, _) = blk
            .objective
            .as_quadratic()
            .filter(|_| blk.set.is_free())
            .ok_or_else(|| Error::OracleUnavailable("KKT oracle needs quadratic blocks over free sets".into()))?;
        let d = blk.dim();
        kkt.view_mut((offset, offset), (d, d)).copy_from(q);
        kkt.view_mut((offset, n), (d, r)).copy_from(&blk.a.transpose());
        kkt.view_mut((n, offset), (r, d)).copy_from(&blk.a);
        rhs.rows_mut(offset, d).copy_from(&(-c));
        offset += d;
    }
    rhs.rows_mut(n, r).copy_from(&problem.b_total());
    let sol = kkt
        .clone()
        .lu()
        .solve(&rhs)
        .filter(|s| s.iter().all(|v| v.is_finite()))
        .ok_or_else(|| Error::OracleUnavailable("KKT system is singular".into()))?;
    let residual = (&kkt * &sol - &rhs).amax();
    let scale = 1.0 + rhs.amax() + kkt.amax() * sol.amax();
    if residual > 1e-8 * scale {
        return Err(Error::OracleUnavailable(format!(
            "KKT system is singular (residual {residual:e})"
        )));
    }
    let mut y = Vec::with_capacity(dims.len());
    let mut offset = 0;
    for d in dims {
        y.push(sol.rows(offset, d).into_owned());
        offset += d;
    }
    let lambda = sol.rows(n, r).into_owned();
    let residual = kkt_residual(problem, &y, &lambda)?;
    Ok(KktSolution { y, lambda, residual })
}

/// Largest entry of the stationarity and feasibility residuals of `(y, λ)`.
pub fn kkt_residual(problem: &SeparableProblem, y: &[Vector], lambda: &Vector) -> Result<f64> {
    let mut worst = problem.residual(y).amax();
    for (blk, yi) in problem.blocks().iter().zip(y) {
        let g = blk.objective.gradient(yi)? + blk.a.transpose() * lambda;
        worst = worst.max(g.amax());
    }
    Ok(worst)
}

/// Solve `(Σ Q_i) x = −Σ c_i` for an unconstrained quadratic sum. The
/// solution is returned as the single block of a [`KktSolution`] with no
/// multipliers.
pub fn kkt_sum(problem: &SumProblem) -> Result<KktSolution> {
    if !problem.constraint().is_free() {
        return Err(Error::OracleUnavailable("KKT oracle needs an unconstrained sum".into()));
    }
    let (q, c) = problem
        .quadratic_total()
        .ok_or_else(|| Error::OracleUnavailable("KKT oracle needs quadratic components".into()))?;
    let x = q
        .clone()
        .cholesky()
        .map(|ch| ch.solve(&(-&c)))
        .ok_or_else(|| Error::OracleUnavailable("sum of curvatures is singular".into()))?;
    let residual = problem.gradient(&x)?.amax();
    Ok(KktSolution {
        y: vec![x],
        lambda: Vector::zeros(0),
        residual,
    })
}

/// Result of simulating `β_{k+1} = p β_k + q max_{k−d≤ℓ≤k} β_ℓ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecursionBound {
    pub passed: bool,
    /// `min_k (ln(ρ^k β_0) − ln β_k)`; nonnegative when the bound holds.
    pub margin: f64,
    pub rho: f64,
}

/// Check `β_k ≤ ρ^k β_0` with `ρ = (p + q)^{1/(1+d)}` along the recursion
/// taken with equality. Works in log space so long horizons do not underflow.
pub fn delayed_recursion_bound_check(p: f64, q: f64, d: usize, beta0: f64, horizon: usize) -> Result<RecursionBound> {
    if !(p >= 0.0 && q >= 0.0 && p + q < 1.0) {
        return Err(Error::Precondition(format!(
            "need p, q ≥ 0 and p + q < 1, got p = {p}, q = {q}"
        )));
    }
    if d == 0 {
        return Err(Error::Precondition("delay d must be at least 1".into()));
    }
    if !(beta0 >= 0.0) {
        return Err(Error::Precondition(format!("β_0 must be nonnegative, got {beta0}")));
    }
    let rho = (p + q).powf(1.0 / (1.0 + d as f64));
    if beta0 == 0.0 {
        return Ok(RecursionBound {
            passed: true,
            margin: 0.0,
            rho,
        });
    }
    let (ln_p, ln_q, ln_rho) = (p.ln(), q.ln(), rho.ln());
    let mut logs = vec![beta0.ln()];
    let mut margin = f64::INFINITY;
    for k in 0..horizon {
        let window_max = logs[k.saturating_sub(d)..=k]
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let next = log_sum_exp(ln_p + logs[k], ln_q + window_max);
        logs.push(next);
        let bound = (k + 1) as f64 * ln_rho + logs[0];
        margin = margin.min(bound - next);
    }
    if horizon == 0 {
        margin = 0.0;
    }
    Ok(RecursionBound {
        passed: margin >= -1e-10,
        margin,
        rho,
    })
}

fn log_sum_exp(a: f64, b: f64) -> f64 {
    let hi = a.max(b);
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + ((a - hi).exp() + (b - hi).exp()).ln()
}

/// Per-iteration view of an aggregated method as gradient descent with
/// errors: `x_{k+1} = x_k − α(∇F(x_k) + e_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorDecomposition {
    /// `e_k` from the iterate identity.
    pub e: Vec<Vector>,
    /// `e_k` summed term by term from the stored gradients.
    pub e_direct: Vec<Vector>,
    /// `E_k = α²‖e_k‖² − 2α(x_k − α∇F(x_k) − x*)'e_k`.
    pub big_e: Vec<f64>,
    /// `max_{k−2b≤ℓ≤k} ‖x_ℓ − x*‖`.
    pub window_max: Vec<f64>,
    /// `max_k ‖e_k − e_direct_k‖∞`.
    pub identity_gap: f64,
    /// `max_k |‖x_{k+1} − x*‖² − ‖x_k − α∇F(x_k) − x*‖² − E_k|`, relative to
    /// `max(1, ‖x_0 − x*‖²)`.
    pub big_e_gap: f64,
    /// `max_k ‖e_k‖ / (α · window_max_k)` over iterations above the noise floor.
    pub c_fit: f64,
    /// The same maximum over the first and the second half of the run.
    pub c_first_half: f64,
    pub c_second_half: f64,
    /// `max_k (‖∇f_{i_k}(x_{k+1}) − ∇f_{i_k}(x_k)‖ − L_{i_k}‖x_{k+1} − x_k‖)`.
    pub implicit_excess: f64,
}

/// Rebuild the error terms of an IAP, IAG or IP run with constant stepsize
/// `alpha`. The trace must carry iterates and stamps.
pub fn error_audit(
    problem: &SumProblem,
    algorithm: PrimalAlgorithm,
    trace: &Trace,
    alpha: f64,
    bound: usize,
) -> Result<ErrorDecomposition> {
    if !problem.constraint().is_free() {
        return Err(Error::Precondition("error audit needs an unconstrained problem".into()));
    }
    if !matches!(
        algorithm,
        PrimalAlgorithm::Iap | PrimalAlgorithm::Iag | PrimalAlgorithm::Ip
    ) {
        return Err(Error::Unsupported(format!(
            "error audit covers iap, iag and ip, not {algorithm}"
        )));
    }
    let x_star = problem
        .known_opt()
        .ok_or_else(|| Error::OracleUnavailable("error audit needs a known optimum".into()))?;
    let xs = &trace.iterates;
    let steps = xs.len().saturating_sub(1);
    if steps == 0 || trace.rows.len() < xs.len() {
        return Err(Error::Precondition("error audit needs recorded iterates".into()));
    }
    let table = algorithm != PrimalAlgorithm::Ip;
    if table && trace.stamps.len() < steps {
        return Err(Error::Precondition("error audit needs recorded stamps".into()));
    }
    let grad = |i: usize, x: &Vector| problem.component(i).gradient(x);
    let dists: Vec<f64> = xs.iter().map(|x| (x - x_star).norm()).collect();
    let floor = 1e-9 * dists[0].max(1.0);
    let scale = dists[0].powi(2).max(1.0);

    let mut out = ErrorDecomposition {
        e: Vec::with_capacity(steps),
        e_direct: Vec::with_capacity(steps),
        big_e: Vec::with_capacity(steps),
        window_max: Vec::with_capacity(steps),
        identity_gap: 0.0,
        big_e_gap: 0.0,
        c_fit: 0.0,
        c_first_half: 0.0,
        c_second_half: 0.0,
        implicit_excess: f64::NEG_INFINITY,
    };
    for k in 0..steps {
        let (x, x_next) = (&xs[k], &xs[k + 1]);
        let full = problem.gradient(x)?;
        let e = (x - x_next) / alpha - &full;
        let i = trace.rows[k + 1]
            .index
            .ok_or_else(|| Error::Precondition("error audit needs selected indexes".into()))?;

        let mut direct = Vector::zeros(x.len());
        for j in 0..problem.m() {
            let at = if j == i && algorithm != PrimalAlgorithm::Iag {
                x_next
            } else if table {
                &xs[trace.stamps[k][j]]
            } else {
                // IP with a single component has no other terms.
                continue;
            };
            direct += grad(j, at)? - grad(j, x)?;
        }
        let fi = problem.component(i);
        let excess = (grad(i, x_next)? - grad(i, x)?).norm() - fi.lipschitz() * (x_next - x).norm();
        out.implicit_excess = out.implicit_excess.max(excess);

        let base = x - &full * alpha - x_star;
        let big_e = alpha * alpha * e.norm_squared() - 2.0 * alpha * base.dot(&e);
        let gap = ((x_next - x_star).norm_squared() - base.norm_squared() - big_e).abs() / scale;
        let window_max = dists[k.saturating_sub(2 * bound)..=k]
            .iter()
            .copied()
            .fold(0.0, f64::max);

        out.identity_gap = out.identity_gap.max((&e - &direct).amax());
        out.big_e_gap = out.big_e_gap.max(gap);
        if window_max > floor {
            let c = e.norm() / (alpha * window_max);
            out.c_fit = out.c_fit.max(c);
            if 2 * k < steps {
                out.c_first_half = out.c_first_half.max(c);
            } else {
                out.c_second_half = out.c_second_half.max(c);
            }
        }
        out.e.push(e);
        out.e_direct.push(direct);
        out.big_e.push(big_e);
        out.window_max.push(window_max);
    }
    Ok(out)
}

/// A pair of iterations that should produce the same sequence.
#[derive(Debug, Clone)]
pub enum EquivalenceCase<'a> {
    /// IAP through the direct linearized prox versus the two-step form.
    IapForms {
        problem: &'a SumProblem,
        schedule: DelaySchedule,
        alpha: f64,
        x0: Vector,
    },
    /// Augmented Lagrangian two-step versus the proximal recursion on the dual.
    IalDualProx {
        problem: &'a SeparableProblem,
        lambda0: Vector,
        alpha: f64,
    },
    /// Plain versus diagonally scaled ADMM.
    AdmmScaled { problem: &'a SeparableProblem, alpha: f64 },
}

/// Run both sides of `case` in lockstep for `steps` iterations and return the
/// largest max-norm deviation. `inner` controls the prox subproblems of the
/// IAP pair.
pub fn equivalence_runner(case: &EquivalenceCase<'_>, steps: usize, inner: &InnerOptions) -> Result<f64> {
    match case {
        EquivalenceCase::IapForms {
            problem,
            schedule,
            alpha,
            x0,
        } => {
            let make = |form| {
                PrimalSolver::new(problem, PrimalAlgorithm::Iap, *schedule, StepRule::Constant(*alpha))
                    .map(|s| s.with_form(form).with_inner(*inner))
            };
            let (two, direct) = (make(IapForm::TwoStep)?, make(IapForm::Direct)?);
            let (mut a, mut b) = (two.start(x0)?, direct.start(x0)?);
            let mut worst: f64 = 0.0;
            for _ in 0..steps {
                two.step(&mut a)?;
                direct.step(&mut b)?;
                worst = worst.max((&a.x - &b.x).amax());
            }
            Ok(worst)
        }
        EquivalenceCase::IalDualProx {
            problem,
            lambda0,
            alpha,
        } => Ok(prox_al_equivalence_check(problem, lambda0, *alpha, steps)?.max_deviation),
        EquivalenceCase::AdmmScaled { problem, alpha } => admm_scaled_deviation(problem, *alpha, steps),
    }
}
