use crate::error::{check_dim, Error, Result};
use crate::linalg::Vector;

/// Closed convex sets with a closed-form Euclidean projection.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum ConstraintSet {
    #[default]
    Free,
    NonnegativeOrthant,
    Box {
        lo: Vector,
        hi: Vector,
    },
}

impl ConstraintSet {
    /// Box with `lo ≤ hi` checked componentwise.
    pub fn boxed(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        check_dim("box bounds", lo.len(), hi.len())?;
        if let Some(j) = (0..lo.len()).find(|&j| !(lo[j] <= hi[j])) {
            return Err(Error::Instance(format!(
                "box bound {j}: lo = {} exceeds hi = {}",
                lo[j], hi[j]
            )));
        }
        Ok(Self::Box {
            lo: Vector::from_vec(lo),
            hi: Vector::from_vec(hi),
        })
    }

    pub fn is_free(&self) -> bool {
        matches!(self, Self::Free)
    }

    /// Bounds of coordinate `j`.
    pub fn bounds(&self, j: usize) -> (f64, f64) {
        match self {
            Self::Free => (f64::NEG_INFINITY, f64::INFINITY),
            Self::NonnegativeOrthant => (0.0, f64::INFINITY),
            Self::Box { lo, hi } => (lo[j], hi[j]),
        }
    }

    /// Check the set can hold vectors of dimension `n`.
    pub fn check_dimension(&self, n: usize) -> Result<()> {
        match self {
            Self::Box { lo, .. } => check_dim("box bounds", n, lo.len()),
            _ => Ok(()),
        }
    }

    pub fn project(&self, x: &Vector) -> Vector {
        match self {
            Self::Free => x.clone(),
            Self::NonnegativeOrthant => x.map(|v| v.max(0.0)),
            Self::Box { lo, hi } => Vector::from_fn(x.len(), |j, _| x[j].max(lo[j]).min(hi[j])),
        }
    }

    pub fn contains(&self, x: &Vector, tol: f64) -> bool {
        (0..x.len()).all(|j| {
            let (lo, hi) = self.bounds(j);
            x[j] >= lo - tol && x[j] <= hi + tol
        })
    }
}
