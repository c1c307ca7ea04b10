//! Underdetermined least squares: the minimum-norm solution and the limit
//! of gradient descent started from an arbitrary point.
//!
//! For `A ∈ R^{m×n}` with full row rank, let `W` be the row space of `A`.
//! Gradient descent on `ℒ(θ) = ‖y - Aθ‖²` only ever moves inside `W`, so
//! the component of `θ` in `W⊥` is frozen at its initial value and the
//! iterates converge to `θ* + P_{W⊥} θ⁰`, with `θ*` the minimum-norm
//! solution.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::net_core::linalg::{inverse, matmul, matvec, rank, transpose, Matrix};
use crate::net_core::{NetError, Scalar};

/// `Aθ = y` together with a starting point `θ⁰`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionInstance<T> {
    pub a: Matrix<T>,
    pub y: Vec<T>,
    pub theta0: Vec<T>,
}

impl<T: Scalar> RegressionInstance<T> {
    pub fn new(a: Matrix<T>, y: Vec<T>, theta0: Vec<T>) -> Result<Self, NetError> {
        let n = a.first().map_or(0, |r| r.len());
        if a.is_empty() || n == 0 || a.iter().any(|r| r.len() != n) {
            return Err(NetError::Shape("A must be a nonempty rectangular matrix".into()));
        }
        if y.len() != a.len() {
            return Err(NetError::Dimension { expected: a.len(), got: y.len() });
        }
        if theta0.len() != n {
            return Err(NetError::Dimension { expected: n, got: theta0.len() });
        }
        Ok(RegressionInstance { a, y, theta0 })
    }

    pub fn rows(&self) -> usize {
        self.a.len()
    }

    pub fn cols(&self) -> usize {
        self.a[0].len()
    }
}

/// `(A Aᵀ)^{-1}` for a full-row-rank `A`.
fn gram_inverse<T: Scalar>(a: &Matrix<T>) -> Result<Matrix<T>, NetError> {
    if rank(a) < a.len() {
        return Err(NetError::Contract("A must have full row rank".into()));
    }
    inverse(&matmul(a, &transpose(a))).ok_or_else(|| NetError::Contract("A Aᵀ is singular".into()))
}

/// `θ* = Aᵀ (A Aᵀ)^{-1} y`, the solution of `Aθ = y` with least Euclidean
/// norm.  Exact in rational mode.
pub fn min_norm_solution<T: Scalar>(a: &Matrix<T>, y: &[T]) -> Result<Vec<T>, NetError> {
    if y.len() != a.len() {
        return Err(NetError::Dimension { expected: a.len(), got: y.len() });
    }
    let g = gram_inverse(a)?;
    Ok(matvec(&transpose(a), &matvec(&g, y)))
}

/// `P_{W⊥} θ = θ - Aᵀ (A Aᵀ)^{-1} A θ`.
pub fn null_projection<T: Scalar>(a: &Matrix<T>, theta: &[T]) -> Result<Vec<T>, NetError> {
    let g = gram_inverse(a)?;
    let p = matvec(&transpose(a), &matvec(&g, &matvec(a, theta)));
    Ok(theta.iter().zip(p).map(|(t, v)| t.clone() - v).collect())
}

/// Options for [`gd_linear_regression`].
#[derive(Debug, Clone, PartialEq)]
pub struct GdOptions {
    /// Step size; defaults to `1/λ_max(∇²ℒ) = 1/(2 λ_max(AᵀA))`.
    pub eta: Option<f64>,
    pub max_steps: usize,
    /// Stop once `‖θ - limit‖_∞ ≤ tol`.
    pub tol: f64,
    /// Record the loss every this many steps.
    pub record_every: usize,
}

impl Default for GdOptions {
    fn default() -> Self {
        GdOptions { eta: None, max_steps: 100_000, tol: 1e-9, record_every: 100 }
    }
}

/// Outcome of [`gd_linear_regression`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GdReport {
    pub theta: Vec<f64>,
    /// `θ* + P_{W⊥} θ⁰`.
    pub limit: Vec<f64>,
    pub eta: f64,
    pub steps: usize,
    /// `‖θ̂ - limit‖_∞`.
    pub limit_error: f64,
    /// `max_k ‖P_{W⊥} θ^k - P_{W⊥} θ⁰‖_∞` over the whole trajectory.
    pub null_drift: f64,
    pub converged: bool,
    pub diverged: bool,
    /// `(step, loss)` samples.
    pub loss_curve: Vec<(usize, f64)>,
}

fn to_dmatrix(a: &Matrix<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(a.len(), a[0].len(), |i, j| a[i][j])
}

/// Largest eigenvalue of `AᵀA` (equal to that of `A Aᵀ`).
pub fn lambda_max(a: &Matrix<f64>) -> f64 {
    let m = to_dmatrix(a);
    let g = &m * m.transpose();
    SymmetricEigen::new(g).eigenvalues.iter().copied().fold(0.0, f64::max)
}

/// Full-batch gradient descent `θ ← θ - η ∇ℒ(θ)`, `∇ℒ = -2Aᵀ(y - Aθ)`,
/// checked against the closed-form limit.  The step size must satisfy
/// `η < 2/λ_max(∇²ℒ) = 1/λ_max(AᵀA)`.  A loss that grows over a window of
/// `record_every` steps is reported as divergence.
pub fn gd_linear_regression(inst: &RegressionInstance<f64>, opts: &GdOptions) -> Result<GdReport, NetError> {
    let lmax = lambda_max(&inst.a);
    if lmax <= 0.0 {
        return Err(NetError::Contract("A must be nonzero".into()));
    }
    let eta = opts.eta.unwrap_or(1.0 / (2.0 * lmax));
    if !(eta > 0.0 && eta < 1.0 / lmax) {
        return Err(NetError::Contract(format!("step size {eta} must lie in (0, 1/λ_max(AᵀA)) = (0, {})", 1.0 / lmax)));
    }
    let theta_star = min_norm_solution(&inst.a, &inst.y)?;
    let null0 = null_projection(&inst.a, &inst.theta0)?;
    let limit: Vec<f64> = theta_star.iter().zip(&null0).map(|(a, b)| a + b).collect();
    let a = to_dmatrix(&inst.a);
    let at = a.transpose();
    let y = DVector::from_column_slice(&inst.y);
    // P_W = Aᵀ (A Aᵀ)^{-1} A, for the drift check.
    let gram_inv = (&a * &at).try_inverse().ok_or_else(|| NetError::Contract("A Aᵀ is singular".into()))?;
    let p_w = &at * gram_inv * &a;
    let n0 = DVector::from_column_slice(&null0);
    let mut theta = DVector::from_column_slice(&inst.theta0);
    let lim = DVector::from_column_slice(&limit);
    let every = opts.record_every.max(1);
    let mut curve = Vec::new();
    let mut drift: f64 = 0.0;
    let mut last_loss = f64::INFINITY;
    let mut diverged = false;
    let mut steps = 0;
    loop {
        let r = &y - &a * &theta;
        let loss = r.norm_squared();
        if steps % every == 0 {
            curve.push((steps, loss));
            if !loss.is_finite() || loss > last_loss * (1.0 + 1e-12) + 1e-300 {
                diverged = true;
                break;
            }
            last_loss = loss;
        }
        let null = &theta - &p_w * &theta;
        drift = drift.max((null - &n0).amax());
        if (&theta - &lim).amax() <= opts.tol || steps >= opts.max_steps {
            break;
        }
        theta += (&at * r) * (2.0 * eta);
        steps += 1;
    }
    let limit_error = (&theta - &lim).amax();
    Ok(GdReport {
        theta: theta.iter().copied().collect(),
        limit,
        eta,
        steps,
        limit_error,
        null_drift: drift,
        converged: !diverged && limit_error <= opts.tol,
        diverged,
        loss_curve: curve,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net_core::{q, qi, Q};

    #[test]
    fn min_norm_examples() {
        assert_eq!(min_norm_solution(&vec![vec![qi(1), qi(1)]], &[qi(1)]).unwrap(), vec![q(1, 2), q(1, 2)]);
        let id = vec![vec![qi(1), qi(0)], vec![qi(0), qi(1)]];
        assert_eq!(min_norm_solution(&id, &[q(3, 7), qi(-2)]).unwrap(), vec![q(3, 7), qi(-2)]);
        let zero_row: Matrix<Q> = vec![vec![qi(1), qi(2)], vec![qi(0), qi(0)]];
        assert!(min_norm_solution(&zero_row, &[qi(1), qi(0)]).is_err());
    }

    #[test]
    fn exact_solution_solves_the_system() {
        let a = vec![vec![qi(1), qi(2), qi(3)], vec![qi(-1), qi(0), q(1, 2)]];
        let y = vec![q(5, 3), qi(2)];
        let t = min_norm_solution(&a, &y).unwrap();
        assert_eq!(matvec(&a, &t), y);
        // θ* ⟂ W⊥: its null component vanishes.
        assert!(null_projection(&a, &t).unwrap().iter().all(|v| *v == qi(0)));
    }

    #[test]
    fn gd_limit_by_hand() {
        let inst = RegressionInstance::new(vec![vec![1.0, 1.0]], vec![1.0], vec![1.0, -1.0]).unwrap();
        let r = gd_linear_regression(&inst, &GdOptions::default()).unwrap();
        assert!(r.converged);
        assert!((r.theta[0] - 1.5).abs() < 1e-9 && (r.theta[1] + 0.5).abs() < 1e-9);
        assert!(r.null_drift < 1e-12);
        let zero = RegressionInstance::new(vec![vec![1.0, 1.0]], vec![1.0], vec![0.0, 0.0]).unwrap();
        let r = gd_linear_regression(&zero, &GdOptions::default()).unwrap();
        assert!((r.theta[0] - 0.5).abs() < 1e-9 && (r.theta[1] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn oversized_step_is_rejected() {
        let inst = RegressionInstance::new(vec![vec![1.0, 1.0]], vec![1.0], vec![0.0, 0.0]).unwrap();
        let opts = GdOptions { eta: Some(0.6), ..GdOptions::default() };
        assert!(gd_linear_regression(&inst, &opts).is_err());
    }
}
