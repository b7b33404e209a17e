//! Inner solvers for the subproblems the outer iterations assume solvable:
//! proximal minimizations, block augmented-Lagrangian minimizations and the
//! nonquadratic penalty minimizations.
//!
//! Three routes are provided:
//!
//! * [`quadratic_argmin`] for `min ½ y'Py + r'y` over a free, orthant or box
//!   set. Free sets use a direct factorization, diagonal `P` over boxes is
//!   solved coordinatewise, everything else falls back to projected gradient.
//! * [`minimize_smooth`], projected gradient with backtracking for any smooth
//!   convex objective given by closures.
//! * [`damped_newton`], Newton with step halving for unconstrained smooth
//!   objectives with a Hessian.

use nalgebra::SymmetricEigen;

use crate::error::{Error, Result};
use crate::linalg::{is_diagonal, Matrix, Vector};
use crate::problem::ConstraintSet;

/// Tolerances shared by every inner solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerOptions {
    /// First-order residual (projected gradient, or gradient norm for Newton).
    pub tol: f64,
    /// Projected-gradient iteration cap.
    pub max_iter: usize,
    /// Newton iteration cap.
    pub newton_max_iter: usize,
    /// Step halvings per Newton line search.
    pub max_halvings: usize,
}

impl Default for InnerOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 10_000,
            newton_max_iter: 200,
            max_halvings: 60,
        }
    }
}

impl InnerOptions {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }
}

/// Minimize `½ y'Py + r'y` over `set` for symmetric positive semidefinite `P`.
pub fn quadratic_argmin(
    p: &Matrix,
    r: &Vector,
    set: &ConstraintSet,
    x0: Option<&Vector>,
    opts: &InnerOptions,
) -> Result<Vector> {
    let n = r.len();
    if set.is_free() {
        if let Some(chol) = p.clone().cholesky() {
            return Ok(chol.solve(&(-r)));
        }
        return singular_free_argmin(p, r);
    }
    if is_diagonal(p) {
        let mut x = Vector::zeros(n);
        for j in 0..n {
            let (lo, hi) = set.bounds(j);
            let curv = p[(j, j)];
            x[j] = if curv > 0.0 {
                (-r[j] / curv).clamp(lo, hi)
            } else if r[j] > 0.0 {
                if lo == f64::NEG_INFINITY {
                    return Err(unit_direction(n, j, -1.0));
                }
                lo
            } else if r[j] < 0.0 {
                if hi == f64::INFINITY {
                    return Err(unit_direction(n, j, 1.0));
                }
                hi
            } else {
                0.0_f64.clamp(lo, hi)
            };
        }
        return Ok(x);
    }
    let start = x0.cloned().unwrap_or_else(|| Vector::zeros(n));
    let p = p.clone();
    let r = r.clone();
    minimize_smooth(|y: &Vector| &p * y + &r, &start, set, opts)
}

fn unit_direction(n: usize, j: usize, sign: f64) -> Error {
    let mut direction = vec![0.0; n];
    direction[j] = sign;
    Error::Unbounded { direction }
}

// Minimum-norm minimizer for singular PSD `p`, or an unboundedness certificate.
fn singular_free_argmin(p: &Matrix, r: &Vector) -> Result<Vector> {
    let eig = SymmetricEigen::new(p.clone());
    let lmax = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    let zero = 1e-12 * lmax.max(1.0);
    let rtol = 1e-12 * (1.0 + r.norm());
    let mut x = Vector::zeros(r.len());
    for (k, &lam) in eig.eigenvalues.iter().enumerate() {
        let v = eig.eigenvectors.column(k);
        let proj = v.dot(r);
        if lam <= zero {
            if proj.abs() > rtol {
                let dir = v * (-proj.signum());
                return Err(Error::Unbounded {
                    direction: dir.iter().copied().collect(),
                });
            }
        } else {
            x -= v * (proj / lam);
        }
    }
    Ok(x)
}

/// Projected gradient with backtracking on a local Lipschitz estimate of
/// the gradient. Stops when the natural residual `‖y − P(y − ∇f(y))‖∞` drops
/// below `tol · max(1, ‖∇f(y0)‖∞)`.
///
/// The acceptance test compares gradients instead of function values, so it
/// keeps working once objective differences fall below rounding.
pub fn minimize_smooth<G>(grad: G, x0: &Vector, set: &ConstraintSet, opts: &InnerOptions) -> Result<Vector>
where
    G: Fn(&Vector) -> Vector,
{
    let mut x = set.project(x0);
    let mut g = grad(&x);
    let scale = g.amax().max(1.0);
    let mut t = 1.0;
    let mut residual = f64::INFINITY;
    for it in 0..opts.max_iter {
        residual = (&x - set.project(&(&x - &g))).amax();
        if residual <= opts.tol * scale {
            return Ok(x);
        }
        let (xn, gn) = loop {
            let xn = set.project(&(&x - &g * t));
            let d = &xn - &x;
            let gn = grad(&xn);
            let dn = d.norm();
            if dn == 0.0 || (t * (&gn - &g).norm() <= dn && gn.iter().all(|v| v.is_finite())) {
                break (xn, gn);
            }
            t *= 0.5;
            if t < 1e-30 {
                return Err(Error::InnerSolver {
                    iterations: it,
                    residual,
                });
            }
        };
        x = xn;
        g = gn;
        t *= 2.0;
    }
    Err(Error::InnerSolver {
        iterations: opts.max_iter,
        residual,
    })
}

/// Damped Newton for unconstrained smooth convex minimization. The Hessian is
/// regularized until a Cholesky factorization exists.
pub fn damped_newton<F, G, H>(f: F, grad: G, hess: H, x0: &Vector, opts: &InnerOptions) -> Result<Vector>
where
    F: Fn(&Vector) -> f64,
    G: Fn(&Vector) -> Vector,
    H: Fn(&Vector) -> Matrix,
{
    let mut x = x0.clone();
    let mut g = grad(&x);
    for _ in 0..opts.newton_max_iter {
        let gnorm = g.amax();
        if gnorm <= opts.tol {
            return Ok(x);
        }
        let d = newton_direction(&hess(&x), &g);
        let fx = f(&x);
        let slope = g.dot(&d);
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let xn = &x + &d * t;
            let fxn = f(&xn);
            if fxn.is_finite() {
                if fxn <= fx + 1e-4 * t * slope {
                    accepted = Some(xn);
                    break;
                }
                // Near the optimum the decrease falls below rounding in f;
                // accept a full step that still shrinks the gradient.
                if t == 1.0 && fxn <= fx + 1e-12 * (1.0 + fx.abs()) {
                    let gn = grad(&xn);
                    if gn.amax() < 0.5 * gnorm {
                        accepted = Some(xn);
                        break;
                    }
                }
            }
            t *= 0.5;
        }
        match accepted {
            Some(xn) => {
                x = xn;
                g = grad(&x);
            }
            None => {
                return Err(Error::InnerSolver {
                    iterations: opts.newton_max_iter,
                    residual: gnorm,
                })
            }
        }
    }
    let residual = g.amax();
    if residual <= opts.tol {
        Ok(x)
    } else {
        Err(Error::InnerSolver {
            iterations: opts.newton_max_iter,
            residual,
        })
    }
}

/// Newton's method for a square system `R(z) = 0` whose Jacobian is
/// nonsingular, damped by step halving on `½‖R‖²`. Stops when
/// `‖R(z)‖∞ ≤ tol`.
pub fn newton_root<R, J>(residual: R, jacobian: J, z0: &Vector, opts: &InnerOptions) -> Result<Vector>
where
    R: Fn(&Vector) -> Vector,
    J: Fn(&Vector) -> Matrix,
{
    let mut z = z0.clone();
    let mut r = residual(&z);
    for _ in 0..opts.newton_max_iter {
        let rnorm = r.amax();
        if rnorm <= opts.tol {
            return Ok(z);
        }
        let jac = jacobian(&z);
        let d = jac
            .clone()
            .lu()
            .solve(&(-&r))
            .filter(|d| d.iter().all(|v| v.is_finite()))
            .ok_or(Error::InnerSolver {
                iterations: 0,
                residual: rnorm,
            })?;
        let merit = 0.5 * r.norm_squared();
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let zn = &z + &d * t;
            let rn = residual(&zn);
            let mn = 0.5 * rn.norm_squared();
            if mn.is_finite() && mn <= (1.0 - 1e-4 * t) * merit {
                accepted = Some((zn, rn));
                break;
            }
            t *= 0.5;
        }
        match accepted {
            Some((zn, rn)) => {
                z = zn;
                r = rn;
            }
            None => {
                return Err(Error::InnerSolver {
                    iterations: opts.newton_max_iter,
                    residual: rnorm,
                })
            }
        }
    }
    let residual = r.amax();
    if residual <= opts.tol {
        Ok(z)
    } else {
        Err(Error::InnerSolver {
            iterations: opts.newton_max_iter,
            residual,
        })
    }
}

pub(crate) fn newton_direction(h: &Matrix, g: &Vector) -> Vector {
    let n = g.len();
    let mut tau = 0.0;
    let base = 1e-10 * h.amax().max(1.0);
    for _ in 0..40 {
        let reg = h + Matrix::identity(n, n) * tau;
        if let Some(chol) = reg.cholesky() {
            let d = chol.solve(&(-g));
            if g.dot(&d) < 0.0 {
                return d;
            }
        }
        tau = if tau == 0.0 { base } else { tau * 10.0 };
    }
    -g
}

/// Central finite-difference Jacobian of a vector field, symmetrized.
pub(crate) fn fd_hessian<G: Fn(&Vector) -> Vector>(grad: G, x: &Vector) -> Matrix {
    let n = x.len();
    let mut h = Matrix::zeros(n, n);
    for j in 0..n {
        let step = 1e-5 * x[j].abs().max(1.0);
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[j] += step;
        xm[j] -= step;
        let col = (grad(&xp) - grad(&xm)) / (2.0 * step);
        h.set_column(j, &col);
    }
    (&h + h.transpose()) * 0.5
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn diag(v: &[f64]) -> Matrix {
        Matrix::from_diagonal(&Vector::from_column_slice(v))
    }

    #[test]
    fn free_quadratic_uses_direct_solve() {
        let p = diag(&[2.0, 4.0]);
        let r = Vector::from_vec(vec![-2.0, -8.0]);
        let x = quadratic_argmin(&p, &r, &ConstraintSet::Free, None, &InnerOptions::default()).unwrap();
        assert_abs_diff_eq!(x, Vector::from_vec(vec![1.0, 2.0]), epsilon = 1e-14);
    }

    #[test]
    fn singular_free_quadratic_reports_recession_direction() {
        let p = diag(&[1.0, 0.0]);
        let r = Vector::from_vec(vec![0.0, 1.0]);
        let err = quadratic_argmin(&p, &r, &ConstraintSet::Free, None, &InnerOptions::default()).unwrap_err();
        match err {
            Error::Unbounded { direction } => {
                assert!(direction[1] < 0.0);
                assert_abs_diff_eq!(direction[0], 0.0, epsilon = 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn singular_but_bounded_gives_minimum_norm_point() {
        let p = diag(&[2.0, 0.0]);
        let r = Vector::from_vec(vec![-2.0, 0.0]);
        let x = quadratic_argmin(&p, &r, &ConstraintSet::Free, None, &InnerOptions::default()).unwrap();
        assert_abs_diff_eq!(x, Vector::from_vec(vec![1.0, 0.0]), epsilon = 1e-12);
    }

    #[test]
    fn diagonal_box_is_clamped() {
        let p = diag(&[1.0, 1.0, 0.0]);
        let r = Vector::from_vec(vec![3.0, -0.5, -1.0]);
        let set = ConstraintSet::boxed(vec![0.0, 0.0, -1.0], vec![1.0, 1.0, 2.0]).unwrap();
        let x = quadratic_argmin(&p, &r, &set, None, &InnerOptions::default()).unwrap();
        assert_eq!(x.as_slice(), &[0.0, 0.5, 2.0]);
    }

    #[test]
    fn projected_gradient_matches_active_set_solution() {
        // min ½ y'Py + r'y over y ≥ 0 with P = [[2,1],[1,2]], r = (1,-4).
        // Active set {y1 = 0}: 2 y2 = 4 → y2 = 2; multiplier for y1 is 1 + 2 > 0.
        let p = Matrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let r = Vector::from_vec(vec![1.0, -4.0]);
        let x = quadratic_argmin(
            &p,
            &r,
            &ConstraintSet::NonnegativeOrthant,
            None,
            &InnerOptions::default(),
        )
        .unwrap();
        let g = &p * &x + &r;
        let set = ConstraintSet::NonnegativeOrthant;
        assert!((&x - set.project(&(&x - &g))).amax() <= 1e-10 * 4.0);
        assert_abs_diff_eq!(x, Vector::from_vec(vec![0.0, 2.0]), epsilon = 1e-9);
    }

    #[test]
    fn newton_solves_exponential_equation() {
        // ½(y−2)² + e^y − 1 has stationarity y − 2 + e^y = 0.
        let f = |y: &Vector| 0.5 * (y[0] - 2.0).powi(2) + y[0].exp() - 1.0;
        let g = |y: &Vector| Vector::from_element(1, y[0] - 2.0 + y[0].exp());
        let h = |y: &Vector| Matrix::from_element(1, 1, 1.0 + y[0].exp());
        let y = damped_newton(f, g, h, &Vector::zeros(1), &InnerOptions::default()).unwrap();
        assert!((y[0] - 2.0 + y[0].exp()).abs() <= 1e-10);
    }

    #[test]
    fn newton_root_solves_log_equation() {
        // ln x + 1 = 0 in z = ln x: z + 1 = 0 is linear, so try x-space instead.
        let r = |x: &Vector| Vector::from_element(1, x[0].ln() + x[0] - 1.0 + 1.0);
        let j = |x: &Vector| Matrix::from_element(1, 1, 1.0 / x[0] + 1.0);
        let x = newton_root(r, j, &Vector::from_element(1, 1.0), &InnerOptions::default()).unwrap();
        assert!((x[0].ln() + x[0]).abs() <= 1e-10);
    }

    #[test]
    fn fd_hessian_of_quadratic_gradient_is_exact_enough() {
        let q = Matrix::from_row_slice(2, 2, &[3.0, 1.0, 1.0, 2.0]);
        let h = fd_hessian(|x: &Vector| &q * x, &Vector::from_vec(vec![0.3, -0.7]));
        assert_abs_diff_eq!(h, q, epsilon = 1e-8);
    }
}
