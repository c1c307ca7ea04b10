//! Optimal recovery from linear measurements with a linear model space.
//!
//! The ambient space is `R^N` with the weighted inner product
//! `⟨u, v⟩ = Σ_i q_i u_i v_i` (a discrete `L₂` on a sampling grid).  The
//! data are `w_j = ⟨f, ω_j⟩` for an orthonormal system `ω_1…ω_m` spanning
//! `W`; the model is that `f` lies within `ε` of the subspace `Σ`.
//!
//! `v*` is the element of `Σ` whose measurements best fit the data,
//! `u* = P_W^{-1}(w) + P_{W⊥} v*` matches the data exactly, and
//! `μ(Σ, W) = 1/β` with `β = min_{v ∈ Σ} ‖P_W v‖/‖v‖` the cosine of the
//! largest principal angle between `Σ` and `W`.  Then
//! `‖f - u*‖ ≤ μ dist(f, Σ)` for every `f`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::net_core::NetError;

/// Below this relative size a singular value counts as zero.
const RANK_TOL: f64 = 1e-12;

/// Measurement system and model space.
#[derive(Debug, Clone, PartialEq)]
pub struct RecoverySetup {
    /// Quadrature weights `q_i > 0`.
    pub weights: Vec<f64>,
    /// A basis of `Σ` (each of length `N`).
    pub sigma: Vec<Vec<f64>>,
    /// Orthonormal measurement functionals `ω_j`.
    pub omega: Vec<Vec<f64>>,
    /// Model accuracy `ε` with `dist(f, Σ) ≤ ε`.
    pub eps: f64,
}

/// Output of [`optimal_recovery_linear`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecoveryResult {
    pub v_star: Vec<f64>,
    pub u_star: Vec<f64>,
    /// Cosine of the largest principal angle between `Σ` and `W`.
    pub beta: f64,
    /// `1/β`; infinite when `Σ` has a direction orthogonal to `W`.
    pub mu: f64,
    pub mu_infinite: bool,
    /// `μ (ε² - ‖u* - v*‖²)_+^{1/2}`.
    pub r_hat: f64,
}

impl RecoverySetup {
    pub fn new(weights: Vec<f64>, sigma: Vec<Vec<f64>>, omega: Vec<Vec<f64>>, eps: f64) -> Result<Self, NetError> {
        let n = weights.len();
        if n == 0 || weights.iter().any(|q| !(*q > 0.0)) {
            return Err(NetError::Contract("quadrature weights must be positive".into()));
        }
        for v in sigma.iter().chain(&omega) {
            if v.len() != n {
                return Err(NetError::Dimension { expected: n, got: v.len() });
            }
        }
        if sigma.is_empty() || omega.is_empty() {
            return Err(NetError::Contract("need a nonempty model basis and measurement system".into()));
        }
        let s = RecoverySetup { weights, sigma, omega, eps };
        let om = s.euclid(&s.omega);
        let gram = om.transpose() * &om;
        if (gram - DMatrix::identity(s.omega.len(), s.omega.len())).amax() > 1e-10 {
            return Err(NetError::Contract("measurement functionals must be orthonormal".into()));
        }
        Ok(s)
    }

    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        self.weights.iter().zip(u).zip(v).map(|((q, a), b)| q * a * b).sum()
    }

    pub fn norm(&self, u: &[f64]) -> f64 {
        self.inner(u, u).sqrt()
    }

    /// Measurements `w_j = ⟨f, ω_j⟩`.
    pub fn measure(&self, f: &[f64]) -> Vec<f64> {
        self.omega.iter().map(|o| self.inner(f, o)).collect()
    }

    /// Columns `√q ⊙ v`: coordinates in which the inner product is Euclidean.
    fn euclid(&self, vs: &[Vec<f64>]) -> DMatrix<f64> {
        DMatrix::from_fn(self.weights.len(), vs.len(), |i, j| self.weights[i].sqrt() * vs[j][i])
    }

    fn from_euclid(&self, v: &DVector<f64>) -> Vec<f64> {
        v.iter().zip(&self.weights).map(|(a, q)| a / q.sqrt()).collect()
    }

    /// Orthonormal basis of `Σ` (Euclidean coordinates).
    fn sigma_basis(&self) -> Result<DMatrix<f64>, NetError> {
        let v = self.euclid(&self.sigma);
        let sv = v.clone().svd(false, false).singular_values;
        let smax = sv.max();
        if sv.min() <= RANK_TOL * smax.max(f64::MIN_POSITIVE) || self.sigma.len() > self.weights.len() {
            return Err(NetError::Contract("model basis is linearly dependent".into()));
        }
        Ok(v.qr().q())
    }

    /// `dist(f, Σ)`.
    pub fn dist_to_sigma(&self, f: &[f64]) -> Result<f64, NetError> {
        let qv = self.sigma_basis()?;
        let fe = DVector::from_iterator(f.len(), f.iter().zip(&self.weights).map(|(a, q)| a * q.sqrt()));
        let proj = &qv * (qv.transpose() * &fe);
        Ok((fe - proj).norm())
    }
}

/// Recover from data `w`.
pub fn optimal_recovery_linear(setup: &RecoverySetup, w: &[f64]) -> Result<RecoveryResult, NetError> {
    let m = setup.omega.len();
    if w.len() != m {
        return Err(NetError::Dimension { expected: m, got: w.len() });
    }
    let qv = setup.sigma_basis()?;
    let om = setup.euclid(&setup.omega);
    let wv = DVector::from_column_slice(w);
    // Cross-Gram between the orthonormal bases of W and Σ.
    let g = om.transpose() * &qv;
    let svd = g.clone().svd(true, true);
    let n = qv.ncols();
    let beta = if n > m { 0.0 } else { svd.singular_values.min() };
    let mu_infinite = beta <= RANK_TOL;
    let mu = if mu_infinite { f64::INFINITY } else { 1.0 / beta };
    // v* = Q_V c with c the minimum-norm least-squares fit of G c ≈ w.
    let c = svd.solve(&wv, RANK_TOL).map_err(|e| NetError::Contract(e.into()))?;
    let v = &qv * c;
    let pw_v = &om * (om.transpose() * &v);
    let u = &om * &wv + (&v - pw_v);
    let gap = (&u - &v).norm();
    let r_hat = if mu_infinite { f64::INFINITY } else { mu * (setup.eps * setup.eps - gap * gap).max(0.0).sqrt() };
    Ok(RecoveryResult { v_star: setup.from_euclid(&v), u_star: setup.from_euclid(&u), beta, mu, mu_infinite, r_hat })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit(n: usize, i: usize) -> Vec<f64> {
        (0..n).map(|k| if k == i { 1.0 } else { 0.0 }).collect()
    }

    #[test]
    fn sigma_inside_w_gives_mu_one() {
        let n = 5;
        let omega = vec![unit(n, 0), unit(n, 1), unit(n, 2)];
        let sigma = vec![vec![1.0, 1.0, 0.0, 0.0, 0.0]];
        let s = RecoverySetup::new(vec![1.0; n], sigma, omega, 0.1).unwrap();
        let r = optimal_recovery_linear(&s, &[0.5, 0.5, 0.2]).unwrap();
        assert!((r.mu - 1.0).abs() < 1e-12);
        assert!(r.u_star.iter().zip(&r.v_star).take(2).all(|(a, b)| (a - b).abs() < 1e-12));
    }

    #[test]
    fn sigma_meeting_w_perp_is_flagged() {
        let n = 4;
        let s = RecoverySetup::new(vec![1.0; n], vec![unit(n, 0), unit(n, 3)], vec![unit(n, 0), unit(n, 1)], 0.1).unwrap();
        let r = optimal_recovery_linear(&s, &[1.0, 2.0]).unwrap();
        assert!(r.mu_infinite && r.mu.is_infinite());
    }

    #[test]
    fn data_fit_and_error_bound_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 12;
        let weights: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..1.5)).collect();
        // Weighted-orthonormal ω_j: e_j / √q_j.
        let omega: Vec<Vec<f64>> = (0..4).map(|j| unit(n, j).iter().map(|v| v / weights[j].sqrt()).collect()).collect();
        let sigma: Vec<Vec<f64>> = (0..2).map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let s = RecoverySetup::new(weights, sigma, omega, 1.0).unwrap();
        for _ in 0..10 {
            let f: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let w = s.measure(&f);
            let r = optimal_recovery_linear(&s, &w).unwrap();
            let back = s.measure(&r.u_star);
            assert!(back.iter().zip(&w).all(|(a, b)| (a - b).abs() < 1e-12));
            let err: Vec<f64> = f.iter().zip(&r.u_star).map(|(a, b)| a - b).collect();
            assert!(s.norm(&err) <= r.mu * s.dist_to_sigma(&f).unwrap() * (1.0 + 1e-10) + 1e-12);
        }
    }

    #[test]
    fn rejects_degenerate_inputs() {
        let n = 3;
        assert!(RecoverySetup::new(vec![1.0; n], vec![unit(n, 0)], vec![vec![2.0, 0.0, 0.0]], 0.1).is_err());
        let s = RecoverySetup::new(vec![1.0; n], vec![unit(n, 0), unit(n, 0)], vec![unit(n, 1)], 0.1).unwrap();
        assert!(optimal_recovery_linear(&s, &[1.0]).is_err());
    }
}
