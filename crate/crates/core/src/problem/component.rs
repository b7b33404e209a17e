use std::fmt;
use std::sync::Arc;

use crate::error::{check_dim, Error, Result};
use crate::inner::{fd_hessian, minimize_smooth, quadratic_argmin, InnerOptions};
use crate::linalg::{eigen_extremes, is_symmetric, Matrix, Vector};
use crate::problem::ConstraintSet;

pub type ValueFn = Arc<dyn Fn(&Vector) -> f64 + Send + Sync>;
pub type GradientFn = Arc<dyn Fn(&Vector) -> Vector + Send + Sync>;

/// Power-iteration steps used to estimate a callback's Lipschitz constant.
const POWER_STEPS: usize = 50;

#[derive(Clone)]
pub enum ComponentKind {
    /// `½ x'Qx + c'x + d` with `Q` symmetric positive semidefinite.
    Quadratic { q: Matrix, c: Vector, d: f64 },
    Callback {
        dim: usize,
        value: ValueFn,
        gradient: Option<GradientFn>,
    },
}

/// A convex component `f_i` of a sum, or a block objective `h_i`.
#[derive(Clone)]
pub struct ComponentFunction {
    kind: ComponentKind,
    lipschitz: f64,
}

impl fmt::Debug for ComponentFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ComponentKind::Quadratic { q, c, d } => f
                .debug_struct("Quadratic")
                .field("q", q)
                .field("c", c)
                .field("d", d)
                .field("lipschitz", &self.lipschitz)
                .finish(),
            ComponentKind::Callback { dim, gradient, .. } => f
                .debug_struct("Callback")
                .field("dim", dim)
                .field("has_gradient", &gradient.is_some())
                .field("lipschitz", &self.lipschitz)
                .finish(),
        }
    }
}

impl ComponentFunction {
    pub fn quadratic(q: Matrix, c: Vector, d: f64) -> Result<Self> {
        let n = c.len();
        check_dim("quadratic rows", n, q.nrows())?;
        check_dim("quadratic columns", n, q.ncols())?;
        if !is_symmetric(&q, 1e-10) {
            return Err(Error::Instance("quadratic matrix is not symmetric".into()));
        }
        let (min, max) = eigen_extremes(&q);
        if min < -1e-10 * max.abs().max(1.0) {
            return Err(Error::Instance(format!(
                "quadratic matrix is not positive semidefinite (eigenvalue {min:e})"
            )));
        }
        Ok(Self {
            kind: ComponentKind::Quadratic { q, c, d },
            lipschitz: max.max(0.0),
        })
    }

    /// `½‖x − center‖²`.
    pub fn squared_distance(center: &Vector) -> Self {
        let n = center.len();
        Self {
            kind: ComponentKind::Quadratic {
                q: Matrix::identity(n, n),
                c: -center,
                d: 0.5 * center.norm_squared(),
            },
            lipschitz: 1.0,
        }
    }

    /// Function given by closures. The gradient Lipschitz constant is
    /// estimated by power iteration on a finite-difference Hessian at the
    /// origin; override it with [`Self::with_lipschitz`] when known.
    pub fn callback(dim: usize, value: ValueFn, gradient: Option<GradientFn>) -> Self {
        let lipschitz = match &gradient {
            Some(g) => power_iteration(&fd_hessian(|x| g(x), &Vector::zeros(dim))),
            None => f64::INFINITY,
        };
        Self {
            kind: ComponentKind::Callback { dim, value, gradient },
            lipschitz,
        }
    }

    pub fn with_lipschitz(mut self, lipschitz: f64) -> Self {
        self.lipschitz = lipschitz;
        self
    }

    pub fn kind(&self) -> &ComponentKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            ComponentKind::Quadratic { c, .. } => c.len(),
            ComponentKind::Callback { dim, .. } => *dim,
        }
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn is_quadratic(&self) -> bool {
        matches!(self.kind, ComponentKind::Quadratic { .. })
    }

    pub fn as_quadratic(&self) -> Option<(&Matrix, &Vector, f64)> {
        match &self.kind {
            ComponentKind::Quadratic { q, c, d } => Some((q, c, *d)),
            ComponentKind::Callback { .. } => None,
        }
    }

    pub fn has_gradient(&self) -> bool {
        match &self.kind {
            ComponentKind::Quadratic { .. } => true,
            ComponentKind::Callback { gradient, .. } => gradient.is_some(),
        }
    }

    pub fn evaluate(&self, x: &Vector) -> Result<f64> {
        check_dim("component argument", self.dim(), x.len())?;
        Ok(match &self.kind {
            ComponentKind::Quadratic { q, c, d } => 0.5 * x.dot(&(q * x)) + c.dot(x) + d,
            ComponentKind::Callback { value, .. } => value(x),
        })
    }

    pub fn gradient(&self, x: &Vector) -> Result<Vector> {
        check_dim("component argument", self.dim(), x.len())?;
        match &self.kind {
            ComponentKind::Quadratic { q, c, .. } => Ok(q * x + c),
            ComponentKind::Callback { gradient, .. } => gradient
                .as_ref()
                .map(|g| g(x))
                .ok_or_else(|| Error::Unsupported("callback component has no gradient".into())),
        }
    }

    /// Exact for quadratics, central differences of the gradient otherwise.
    pub fn hessian(&self, x: &Vector) -> Result<Matrix> {
        check_dim("component argument", self.dim(), x.len())?;
        match &self.kind {
            ComponentKind::Quadratic { q, .. } => Ok(q.clone()),
            ComponentKind::Callback { gradient, .. } => {
                let g = gradient
                    .as_ref()
                    .ok_or_else(|| Error::Unsupported("callback component has no gradient".into()))?;
                Ok(fd_hessian(|y| g(y), x))
            }
        }
    }

    /// `f(x) + s'x`.
    pub fn tilted(&self, s: &Vector) -> Result<Self> {
        check_dim("tilt vector", self.dim(), s.len())?;
        let kind = match &self.kind {
            ComponentKind::Quadratic { q, c, d } => ComponentKind::Quadratic {
                q: q.clone(),
                c: c + s,
                d: *d,
            },
            ComponentKind::Callback { dim, value, gradient } => {
                let (v, s1) = (value.clone(), s.clone());
                let value: ValueFn = Arc::new(move |x| v(x) + s1.dot(x));
                let gradient = gradient.clone().map(|g| {
                    let s2 = s.clone();
                    Arc::new(move |x: &Vector| g(x) + &s2) as GradientFn
                });
                ComponentKind::Callback {
                    dim: *dim,
                    value,
                    gradient,
                }
            }
        };
        Ok(Self {
            kind,
            lipschitz: self.lipschitz,
        })
    }

    /// `argmin_{x∈X} f(x) + ‖x − z‖²/(2α)`.
    pub fn prox(&self, z: &Vector, alpha: f64, set: &ConstraintSet, opts: &InnerOptions) -> Result<Vector> {
        if !(alpha > 0.0) {
            return Err(Error::Precondition(format!(
                "prox stepsize must be positive, got {alpha}"
            )));
        }
        self.prox_scaled(z, &Vector::from_element(z.len(), alpha), set, opts)
    }

    /// Prox with a per-coordinate stepsize: `argmin f(x) + Σ_j (x_j − z_j)²/(2α_j)`.
    pub fn prox_scaled(&self, z: &Vector, alphas: &Vector, set: &ConstraintSet, opts: &InnerOptions) -> Result<Vector> {
        let n = self.dim();
        check_dim("prox center", n, z.len())?;
        check_dim("prox stepsizes", n, alphas.len())?;
        if alphas.iter().any(|&a| !(a > 0.0)) {
            return Err(Error::Precondition("prox stepsizes must be positive".into()));
        }
        let inv = alphas.map(|a| 1.0 / a);
        match &self.kind {
            ComponentKind::Quadratic { q, c, .. } => {
                let p = q + Matrix::from_diagonal(&inv);
                let r = c - z.component_mul(&inv);
                let start = set.project(z);
                // Strong convexity of the proximal objective rules out
                // unboundedness; any error here is an inner-solver failure.
                quadratic_argmin(&p, &r, set, Some(&start), opts)
            }
            ComponentKind::Callback { gradient, .. } => {
                let g = gradient
                    .as_ref()
                    .ok_or_else(|| Error::Unsupported("prox of a callback component needs its gradient".into()))?;
                minimize_smooth(|x| g(x) + (x - z).component_mul(&inv), z, set, opts)
            }
        }
    }
}

fn power_iteration(h: &Matrix) -> f64 {
    let n = h.nrows();
    if n == 0 {
        return 0.0;
    }
    let mut v = Vector::from_element(n, 1.0 / (n as f64).sqrt());
    let mut est = 0.0;
    for _ in 0..POWER_STEPS {
        let w = h * &v;
        est = w.norm();
        if est == 0.0 {
            return 0.0;
        }
        v = w / est;
    }
    est
}
