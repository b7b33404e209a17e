use std::fmt;
use std::sync::Arc;

use crate::error::{check_dim, Error, Result};
use crate::inner::fd_hessian;
use crate::linalg::{eigen_extremes, Matrix, Vector};
use crate::problem::{ComponentFunction, ConstraintSet};

pub type MapFn = Arc<dyn Fn(&Vector) -> Vector + Send + Sync>;
pub type JacobianFn = Arc<dyn Fn(&Vector) -> Matrix + Send + Sync>;

/// A convex vector-valued constraint map `y ↦ (g_1(y), …, g_r(y))` with its
/// Jacobian (rows are gradients).
#[derive(Clone)]
pub struct ConstraintMap {
    rows: usize,
    value: MapFn,
    jacobian: JacobianFn,
}

impl ConstraintMap {
    pub fn new(rows: usize, value: MapFn, jacobian: JacobianFn) -> Self {
        Self { rows, value, jacobian }
    }
}

impl fmt::Debug for ConstraintMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConstraintMap").field("rows", &self.rows).finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintKind {
    /// `Σ_i (A_i y^i − b_i) = 0`.
    Equality,
    /// `Σ_i g_i(y^i) ≤ 0` componentwise.
    Inequality,
}

/// One block `(h_i, Y_i, A_i, b_i)`, optionally with a nonlinear constraint map
/// replacing `A_i y − b_i` in inequality problems.
#[derive(Debug, Clone)]
pub struct Block {
    pub objective: ComponentFunction,
    pub set: ConstraintSet,
    pub a: Matrix,
    pub b: Vector,
    pub map: Option<ConstraintMap>,
}

impl Block {
    pub fn affine(objective: ComponentFunction, set: ConstraintSet, a: Matrix, b: Vector) -> Result<Self> {
        let n = objective.dim();
        check_dim("block matrix columns", n, a.ncols())?;
        check_dim("block right-hand side", a.nrows(), b.len())?;
        set.check_dimension(n)?;
        Ok(Self {
            objective,
            set,
            a,
            b,
            map: None,
        })
    }

    pub fn nonlinear(objective: ComponentFunction, set: ConstraintSet, map: ConstraintMap) -> Result<Self> {
        let n = objective.dim();
        set.check_dimension(n)?;
        let rows = map.rows;
        Ok(Self {
            objective,
            set,
            a: Matrix::zeros(rows, n),
            b: Vector::zeros(rows),
            map: Some(map),
        })
    }

    pub fn dim(&self) -> usize {
        self.objective.dim()
    }

    pub fn rows(&self) -> usize {
        self.a.nrows()
    }

    pub fn is_affine(&self) -> bool {
        self.map.is_none()
    }

    /// Block constraint value `A_i y − b_i` or `g_i(y)`.
    pub fn constraint_value(&self, y: &Vector) -> Vector {
        match &self.map {
            Some(m) => (m.value)(y),
            None => &self.a * y - &self.b,
        }
    }

    pub fn constraint_jacobian(&self, y: &Vector) -> Matrix {
        match &self.map {
            Some(m) => (m.jacobian)(y),
            None => self.a.clone(),
        }
    }

    /// Hessian of constraint row `j`; zero for affine blocks.
    pub fn constraint_hessian(&self, y: &Vector, j: usize) -> Matrix {
        match &self.map {
            Some(m) => {
                let jac = m.jacobian.clone();
                fd_hessian(move |x| jac(x).row(j).transpose(), y)
            }
            None => Matrix::zeros(self.dim(), self.dim()),
        }
    }

    /// Unconstrained minimizer of a strictly convex quadratic objective, or
    /// zero, projected onto the block set.
    pub fn default_start(&self) -> Vector {
        let start = self
            .objective
            .as_quadratic()
            .and_then(|(q, c, _)| q.clone().cholesky().map(|ch| ch.solve(&(-c))))
            .unwrap_or_else(|| Vector::zeros(self.dim()));
        self.set.project(&start)
    }
}

/// Primal-dual pair used as a reference solution.
#[derive(Debug, Clone, PartialEq)]
pub struct KnownSolution {
    pub y: Vec<Vector>,
    pub lambda: Vector,
}

/// `min Σ h_i(y^i)` over `y^i ∈ Y_i` subject to coupling constraints.
#[derive(Debug, Clone)]
pub struct SeparableProblem {
    blocks: Vec<Block>,
    kind: ConstraintKind,
    known: Option<KnownSolution>,
}

impl SeparableProblem {
    pub fn new(blocks: Vec<Block>, kind: ConstraintKind) -> Result<Self> {
        let first = blocks
            .first()
            .ok_or_else(|| Error::Instance("a separable problem needs at least one block".into()))?;
        let r = first.rows();
        for blk in &blocks {
            check_dim("constraint rows", r, blk.rows())?;
        }
        if kind == ConstraintKind::Equality && blocks.iter().any(|b| !b.is_affine()) {
            return Err(Error::Instance(
                "equality-constrained problems need affine blocks".into(),
            ));
        }
        Ok(Self {
            blocks,
            kind,
            known: None,
        })
    }

    pub fn with_known_solution(mut self, y: Vec<Vector>, lambda: Vector) -> Result<Self> {
        check_dim("known block count", self.m(), y.len())?;
        for (blk, yi) in self.blocks.iter().zip(&y) {
            check_dim("known block", blk.dim(), yi.len())?;
        }
        check_dim("known multiplier", self.rows(), lambda.len())?;
        self.known = Some(KnownSolution { y, lambda });
        Ok(self)
    }

    pub fn m(&self) -> usize {
        self.blocks.len()
    }

    pub fn rows(&self) -> usize {
        self.blocks[0].rows()
    }

    pub fn kind(&self) -> ConstraintKind {
        self.kind
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn block(&self, i: usize) -> &Block {
        &self.blocks[i]
    }

    pub fn known(&self) -> Option<&KnownSolution> {
        self.known.as_ref()
    }

    /// `b = Σ b_i`.
    pub fn b_total(&self) -> Vector {
        self.blocks
            .iter()
            .fold(Vector::zeros(self.rows()), |acc, blk| acc + &blk.b)
    }

    /// `Σ_i (A_i y^i − b_i)` (or `Σ g_i(y^i)`).
    pub fn residual(&self, ys: &[Vector]) -> Vector {
        self.blocks
            .iter()
            .zip(ys)
            .fold(Vector::zeros(self.rows()), |acc, (blk, y)| {
                acc + blk.constraint_value(y)
            })
    }

    pub fn objective(&self, ys: &[Vector]) -> Result<f64> {
        self.blocks
            .iter()
            .zip(ys)
            .map(|(blk, y)| blk.objective.evaluate(y))
            .sum()
    }

    pub fn initial_blocks(&self) -> Vec<Vector> {
        self.blocks.iter().map(Block::default_start).collect()
    }

    /// `m_j`: number of blocks whose constraint matrix has a nonzero row `j`.
    pub fn nonzero_row_counts(&self) -> Vec<usize> {
        (0..self.rows())
            .map(|j| {
                self.blocks
                    .iter()
                    .filter(|blk| blk.a.row(j).iter().any(|&v| v != 0.0))
                    .count()
            })
            .collect()
    }

    // Per-block curvature matrices A_i Q_i⁻¹ A_i' when every block is a
    // strictly convex quadratic over a free set.
    fn dual_curvatures(&self) -> Option<Vec<Matrix>> {
        self.blocks
            .iter()
            .map(|blk| {
                if !blk.set.is_free() || !blk.is_affine() {
                    return None;
                }
                let (q, _, _) = blk.objective.as_quadratic()?;
                let chol = q.clone().cholesky()?;
                let qinv_at = chol.solve(&blk.a.transpose());
                Some(&blk.a * qinv_at)
            })
            .collect()
    }

    /// Whether the dual function is differentiable with a Lipschitz gradient
    /// and strongly concave.
    pub fn strongly_concave_dual(&self) -> bool {
        match self.dual_curvatures() {
            Some(parts) => {
                let total = parts
                    .iter()
                    .fold(Matrix::zeros(self.rows(), self.rows()), |acc, p| acc + p);
                eigen_extremes(&total).0 > 1e-10
            }
            None => false,
        }
    }

    /// `Σ_i λ_max(A_i Q_i⁻¹ A_i')`, the gradient Lipschitz constant of the dual.
    pub fn dual_lipschitz(&self) -> Option<f64> {
        self.dual_curvatures()
            .map(|parts| parts.iter().map(|p| eigen_extremes(p).1.max(0.0)).sum())
    }

    /// Strong concavity modulus of the dual when available.
    pub fn dual_sigma(&self) -> Option<f64> {
        self.dual_curvatures().map(|parts| {
            let total = parts
                .iter()
                .fold(Matrix::zeros(self.rows(), self.rows()), |acc, p| acc + p);
            eigen_extremes(&total).0.max(0.0)
        })
    }
}
