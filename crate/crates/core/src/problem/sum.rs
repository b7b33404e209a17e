use crate::error::{check_dim, Error, Result};
use crate::linalg::{eigen_extremes, Matrix, Vector};
use crate::problem::{ComponentFunction, ConstraintSet};

/// `F(x) = Σ_i f_i(x)` over a constraint set.
#[derive(Debug, Clone)]
pub struct SumProblem {
    components: Vec<ComponentFunction>,
    constraint: ConstraintSet,
    sigma: Option<f64>,
    lipschitz_sum: f64,
    known_opt: Option<Vector>,
}

impl SumProblem {
    /// When every component is quadratic the strong convexity modulus is set
    /// to the smallest eigenvalue of `Σ Q_i`.
    pub fn new(components: Vec<ComponentFunction>, constraint: ConstraintSet) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::Instance("a sum needs at least one component".into()))?;
        let n = first.dim();
        for f in &components {
            check_dim("component dimension", n, f.dim())?;
        }
        constraint.check_dimension(n)?;
        let lipschitz_sum = components.iter().map(ComponentFunction::lipschitz).sum();
        let mut problem = Self {
            components,
            constraint,
            sigma: None,
            lipschitz_sum,
            known_opt: None,
        };
        if let Some((q, _)) = problem.quadratic_total() {
            problem.sigma = Some(eigen_extremes(&q).0.max(0.0));
        }
        Ok(problem)
    }

    pub fn with_sigma(mut self, sigma: f64) -> Result<Self> {
        if sigma < 0.0 {
            return Err(Error::Instance(format!("negative strong convexity modulus {sigma}")));
        }
        if let Some((q, _)) = self.quadratic_total() {
            let min = eigen_extremes(&q).0;
            if sigma > min + 1e-8 {
                return Err(Error::Instance(format!(
                    "strong convexity modulus {sigma} exceeds the smallest Hessian eigenvalue {min}"
                )));
            }
        }
        self.sigma = Some(sigma);
        Ok(self)
    }

    pub fn with_known_opt(mut self, x: Vector) -> Result<Self> {
        check_dim("known optimum", self.dim(), x.len())?;
        self.known_opt = Some(x);
        Ok(self)
    }

    pub fn m(&self) -> usize {
        self.components.len()
    }

    pub fn dim(&self) -> usize {
        self.components[0].dim()
    }

    pub fn components(&self) -> &[ComponentFunction] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &ComponentFunction {
        &self.components[i]
    }

    pub fn constraint(&self) -> &ConstraintSet {
        &self.constraint
    }

    pub fn sigma(&self) -> Option<f64> {
        self.sigma
    }

    /// `L = Σ L_i`.
    pub fn lipschitz(&self) -> f64 {
        self.lipschitz_sum
    }

    pub fn known_opt(&self) -> Option<&Vector> {
        self.known_opt.as_ref()
    }

    /// `L/σ` when the modulus is known and positive.
    pub fn condition_number(&self) -> Option<f64> {
        self.sigma.filter(|&s| s > 0.0).map(|s| self.lipschitz_sum / s)
    }

    pub fn value(&self, x: &Vector) -> Result<f64> {
        self.components.iter().map(|f| f.evaluate(x)).sum()
    }

    pub fn gradient(&self, x: &Vector) -> Result<Vector> {
        let mut g = Vector::zeros(self.dim());
        for f in &self.components {
            g += f.gradient(x)?;
        }
        Ok(g)
    }

    /// `(Σ Q_i, Σ c_i)` when every component is quadratic.
    pub fn quadratic_total(&self) -> Option<(Matrix, Vector)> {
        let n = self.dim();
        let mut q = Matrix::zeros(n, n);
        let mut c = Vector::zeros(n);
        for f in &self.components {
            let (qi, ci, _) = f.as_quadratic()?;
            q += qi;
            c += ci;
        }
        Some((q, c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(q: f64, c: f64) -> ComponentFunction {
        ComponentFunction::quadratic(Matrix::from_element(1, 1, q), Vector::from_element(1, c), 0.0).unwrap()
    }

    #[test]
    fn lipschitz_is_exact_sum() {
        let p = SumProblem::new(vec![scalar(1.0, 0.0), scalar(3.0, 1.0)], ConstraintSet::Free).unwrap();
        assert_eq!(p.lipschitz(), 4.0);
        assert_eq!(p.sigma(), Some(4.0));
        assert_eq!(p.condition_number(), Some(1.0));
    }

    #[test]
    fn sigma_above_curvature_is_rejected() {
        let p = SumProblem::new(vec![scalar(1.0, 0.0)], ConstraintSet::Free).unwrap();
        assert!(p.clone().with_sigma(1.0).is_ok());
        assert!(p.with_sigma(1.1).is_err());
    }

    #[test]
    fn empty_or_ragged_sums_are_rejected() {
        assert!(SumProblem::new(vec![], ConstraintSet::Free).is_err());
        let two = ComponentFunction::squared_distance(&Vector::zeros(2));
        assert!(SumProblem::new(vec![scalar(1.0, 0.0), two], ConstraintSet::Free).is_err());
    }
}
