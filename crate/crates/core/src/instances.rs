//! Built-in problem instances used by the check suite, the CLI and the tests.
//! Random instances are drawn from a seeded ChaCha8 stream so they are
//! identical on every platform.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analysis::{kkt_separable, kkt_sum};
use crate::error::Result;
use crate::linalg::{Matrix, Vector};
use crate::problem::{
    Block, ComponentFunction, ConstraintKind, ConstraintSet, GradientFn, SeparableProblem, SumProblem, ValueFn,
};

/// `m` points in `[−1, 1]ⁿ`.
pub fn centers(m: usize, n: usize, seed: u64) -> Vec<Vector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..m)
        .map(|_| Vector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0)))
        .collect()
}

/// `F(x) = Σ_i ½‖x − c_i‖²` with random centers; `x*` is their mean.
pub fn squared_distance_sum(m: usize, n: usize, seed: u64) -> Result<SumProblem> {
    let cs = centers(m, n, seed);
    let components = cs.iter().map(ComponentFunction::squared_distance).collect();
    with_oracle(SumProblem::new(components, ConstraintSet::Free)?)
}

/// Sum of random strictly convex quadratics `½x'Q_i x + c_i'x`.
pub fn random_quadratic_sum(m: usize, n: usize, seed: u64) -> Result<SumProblem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut components = Vec::with_capacity(m);
    for _ in 0..m {
        let b = Matrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let q = &b * b.transpose() / n as f64 + Matrix::identity(n, n) * 0.1;
        let c = Vector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        components.push(ComponentFunction::quadratic(q, c, 0.0)?);
    }
    with_oracle(SumProblem::new(components, ConstraintSet::Free)?)
}

/// `½x² + ½(x − 2)²`, minimized at 1.
pub fn two_quadratics() -> Result<SumProblem> {
    let components = vec![
        ComponentFunction::squared_distance(&Vector::from_element(1, 0.0)),
        ComponentFunction::squared_distance(&Vector::from_element(1, 2.0)),
    ];
    SumProblem::new(components, ConstraintSet::Free)?.with_known_opt(Vector::from_element(1, 1.0))
}

/// `x¹ + ½(x² − 1)²` over `x ≥ 0`, split into its two terms. The optimum
/// `(0, 1)` has `∂F/∂x¹ = 1 > 0` on the active coordinate.
pub fn strict_complementarity() -> Result<SumProblem> {
    let linear = ComponentFunction::quadratic(Matrix::zeros(2, 2), Vector::from_column_slice(&[1.0, 0.0]), 0.0)?;
    let bowl = ComponentFunction::quadratic(
        Matrix::from_diagonal(&Vector::from_column_slice(&[0.0, 1.0])),
        Vector::from_column_slice(&[0.0, -1.0]),
        0.5,
    )?;
    SumProblem::new(vec![linear, bowl], ConstraintSet::NonnegativeOrthant)?
        .with_known_opt(Vector::from_column_slice(&[0.0, 1.0]))
}

fn with_oracle(problem: SumProblem) -> Result<SumProblem> {
    let x = kkt_sum(&problem)?.y.remove(0);
    problem.with_known_opt(x)
}

fn scalar_block(q: f64, c: f64, a: &[f64], b: &[f64]) -> Result<Block> {
    Block::affine(
        ComponentFunction::quadratic(Matrix::from_element(1, 1, q), Vector::from_element(1, c), 0.0)?,
        ConstraintSet::Free,
        Matrix::from_column_slice(a.len(), 1, a),
        Vector::from_column_slice(b),
    )
}

/// `min y1² + y2²` subject to `y1 + y2 = 2`; `y* = (1, 1)`, `λ* = −2`.
pub fn symmetric_two_block() -> Result<SeparableProblem> {
    let blocks = vec![
        scalar_block(2.0, 0.0, &[1.0], &[1.0])?,
        scalar_block(2.0, 0.0, &[1.0], &[1.0])?,
    ];
    SeparableProblem::new(blocks, ConstraintKind::Equality)?
        .with_known_solution(vec![Vector::from_element(1, 1.0); 2], Vector::from_element(1, -2.0))
}

/// `min ½y²` subject to `y = 1`; `λ* = −1`.
pub fn scalar_equality() -> Result<SeparableProblem> {
    SeparableProblem::new(vec![scalar_block(1.0, 0.0, &[1.0], &[1.0])?], ConstraintKind::Equality)?
        .with_known_solution(vec![Vector::from_element(1, 1.0)], Vector::from_element(1, -1.0))
}

/// Random strictly convex quadratic blocks over free sets with dense
/// constraint matrices, so every row count `m_j` equals `m`.
pub fn dense_rows(m: usize, n: usize, r: usize, seed: u64) -> Result<SeparableProblem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut blocks = Vec::with_capacity(m);
    for _ in 0..m {
        let g = Matrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let q = &g * g.transpose() / n as f64 + Matrix::identity(n, n) * 0.5;
        let c = Vector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        // Entries bounded away from zero keep every row nonzero.
        let a = Matrix::from_fn(r, n, |_, _| {
            let v: f64 = rng.gen_range(0.2..1.0);
            if rng.gen_bool(0.5) {
                v
            } else {
                -v
            }
        });
        let b = Vector::from_fn(r, |_, _| rng.gen_range(-1.0..1.0));
        blocks.push(Block::affine(
            ComponentFunction::quadratic(q, c, 0.0)?,
            ConstraintSet::Free,
            a,
            b,
        )?);
    }
    with_kkt(SeparableProblem::new(blocks, ConstraintKind::Equality)?)
}

/// Two scalar blocks with `A_1 = (1, 0)'` and `A_2 = (1, 1)'`, so
/// `m = (2, 1)`.
pub fn sparse_rows() -> Result<SeparableProblem> {
    let blocks = vec![
        scalar_block(1.0, -1.0, &[1.0, 0.0], &[0.5, 0.0])?,
        scalar_block(2.0, 0.5, &[1.0, 1.0], &[0.5, 1.0])?,
    ];
    let problem = SeparableProblem::new(blocks, ConstraintKind::Equality)?;
    let kkt = kkt_separable(&problem)?;
    problem.with_known_solution(kkt.y, kkt.lambda)
}

fn with_kkt(problem: SeparableProblem) -> Result<SeparableProblem> {
    let kkt = kkt_separable(&problem)?;
    problem.with_known_solution(kkt.y, kkt.lambda)
}

/// `min ½(y − 2)²` subject to `y ≤ 0`; `y* = 0`, `μ* = 2`.
pub fn exp_al_worked() -> Result<SeparableProblem> {
    let blk = Block::affine(
        ComponentFunction::quadratic(Matrix::from_element(1, 1, 1.0), Vector::from_element(1, -2.0), 2.0)?,
        ConstraintSet::Free,
        Matrix::from_element(1, 1, 1.0),
        Vector::zeros(1),
    )?;
    SeparableProblem::new(vec![blk], ConstraintKind::Inequality)?
        .with_known_solution(vec![Vector::zeros(1)], Vector::from_element(1, 2.0))
}

/// `min ½(y1 − 1)² + ½(y2 − 1)²` subject to `y1 + y2 ≤ 1`, written as
/// `(y1 − ½) + (y2 − ½) ≤ 0`; `y* = (½, ½)`, `μ* = ½`.
pub fn two_block_inequality() -> Result<SeparableProblem> {
    let blk = || {
        Block::affine(
            ComponentFunction::quadratic(Matrix::from_element(1, 1, 1.0), Vector::from_element(1, -1.0), 0.5)?,
            ConstraintSet::Free,
            Matrix::from_element(1, 1, 1.0),
            Vector::from_element(1, 0.5),
        )
    };
    SeparableProblem::new(vec![blk()?, blk()?], ConstraintKind::Inequality)?
        .with_known_solution(vec![Vector::from_element(1, 0.5); 2], Vector::from_element(1, 0.5))
}

/// `m` scalar blocks `(curvature/2) y_i²` coupled by `Σ y_i = m` (each
/// `b_i = 1`); `y* = 1`, `λ* = −curvature`. With many blocks and a large
/// stepsize IAAL oscillates with growing amplitude.
pub fn shared_row(m: usize, curvature: f64) -> Result<SeparableProblem> {
    let blocks = (0..m)
        .map(|_| scalar_block(curvature, 0.0, &[1.0], &[1.0]))
        .collect::<Result<Vec<_>>>()?;
    SeparableProblem::new(blocks, ConstraintKind::Equality)?.with_known_solution(
        vec![Vector::from_element(1, 1.0); m],
        Vector::from_element(1, -curvature),
    )
}

/// `Σ_i ln(1 + exp(a_i'x)) + ½‖x − c_i‖²` as gradient callbacks, so its
/// proximal steps go through the iterative inner solver. No known optimum.
pub fn smooth_logistic_sum(m: usize, n: usize, seed: u64) -> Result<SumProblem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut components = Vec::with_capacity(m);
    for _ in 0..m {
        let a = Vector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        let c = Vector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        let lipschitz = 0.25 * a.norm_squared() + 1.0;
        let (a1, c1) = (a.clone(), c.clone());
        let value: ValueFn = Arc::new(move |x: &Vector| softplus(a1.dot(x)) + 0.5 * (x - &c1).norm_squared());
        let gradient: GradientFn = Arc::new(move |x: &Vector| &a * logistic(a.dot(x)) + x - &c);
        components.push(ComponentFunction::callback(n, value, Some(gradient)).with_lipschitz(lipschitz));
    }
    SumProblem::new(components, ConstraintSet::Free)
}

fn softplus(t: f64) -> f64 {
    t.max(0.0) + (-t.abs()).exp().ln_1p()
}

fn logistic(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}
