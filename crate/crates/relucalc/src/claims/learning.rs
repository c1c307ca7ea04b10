//! Learning claims: gradient-descent limits, optimal recovery, tangent
//! kernels and greedy approximation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde_json::json;

use super::{ClaimError, ClaimOptions, Outcome};
use crate::net_core::NetError;
use crate::recovery_learning::{
    empirical_ntk, gd_linear_regression, greedy_hull_approx, init_net, loglog_slope, min_eigenvalue,
    ntk_init_variance, optimal_recovery_linear, GdOptions, InitScheme, RecoverySetup, RegressionInstance,
};

/// Gradient descent on 50 random underdetermined systems converges to
/// `θ* + P_{W⊥} θ⁰` and never moves the null-space component.
pub(super) fn gd_limit(opts: &ClaimOptions) -> Result<Outcome, ClaimError> {
    let count = opts.grid.unwrap_or(50);
    let normal = Normal::new(0.0, 1.0).expect("valid normal");
    let results: Vec<(usize, usize, f64, f64, usize)> = (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_mul(7919).wrapping_add(i));
            let n = rng.random_range(2..=20usize);
            let m = rng.random_range(1..n);
            let mut g = || normal.sample(&mut rng);
            let a: Vec<Vec<f64>> = (0..m).map(|_| (0..n).map(|_| g()).collect()).collect();
            let y: Vec<f64> = (0..m).map(|_| g()).collect();
            let theta0: Vec<f64> = (0..n).map(|_| g()).collect();
            let inst = RegressionInstance::new(a, y, theta0)?;
            let r = gd_linear_regression(&inst, &GdOptions { max_steps: 2_000_000, tol: 1e-9, ..GdOptions::default() })?;
            Ok((m, n, r.limit_error, r.null_drift, r.steps))
        })
        .collect::<Result<_, NetError>>()?;
    let worst_limit = results.iter().map(|r| r.2).fold(0.0, f64::max);
    let worst_drift = results.iter().map(|r| r.3).fold(0.0, f64::max);
    let max_steps = results.iter().map(|r| r.4).max().unwrap_or(0);
    Ok(Outcome {
        contract: format!("{count} random systems (m < n ≤ 20): ‖θ̂ - θ* - P_W⊥ θ⁰‖∞ ≤ 1e-6, null component drift ≤ 1e-12"),
        measured: json!({"instances": count, "max_limit_error": worst_limit, "max_null_drift": worst_drift, "max_steps": max_steps}),
        pass: worst_limit <= 1e-6 + opts.tolerance && worst_drift <= 1e-12 + opts.tolerance,
    })
}

/// Instance with known principal angles: `W = span(ω_1..ω_m)` with
/// `ω_j = e_j/√q_j` and `Σ` spanned by `cos θ_i ω_i + sin θ_i ω_{m+i}`
/// (weighted with `√q`), so `β = min_i cos θ_i`.
pub fn principal_angle_instance(
    weights: &[f64],
    m: usize,
    angles: &[f64],
) -> Result<RecoverySetup, NetError> {
    let n = weights.len();
    let unit = |i: usize| -> Vec<f64> { (0..n).map(|k| if k == i { 1.0 / weights[i].sqrt() } else { 0.0 }).collect() };
    let omega: Vec<Vec<f64>> = (0..m).map(unit).collect();
    let sigma: Vec<Vec<f64>> = angles
        .iter()
        .enumerate()
        .map(|(i, t)| unit(i).iter().zip(unit(m + i)).map(|(a, b)| t.cos() * a + t.sin() * b).collect())
        .collect();
    RecoverySetup::new(weights.to_vec(), sigma, omega, 1.0)
}

/// Data consistency, the principal-angle value of `μ`, and the infinite
/// case.
pub(super) fn optimal_recovery(opts: &ClaimOptions) -> Result<Outcome, ClaimError> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut rows = Vec::new();
    let mut pass = true;
    for _ in 0..10 {
        let m = rng.random_range(2..=5usize);
        let k = rng.random_range(1..=m);
        let n = m + k + rng.random_range(0..=4usize);
        let weights: Vec<f64> = (0..n).map(|_| rng.random_range(0.25..2.0)).collect();
        let angles: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..1.4)).collect();
        let s = principal_angle_instance(&weights, m, &angles)?;
        let expected = 1.0 / angles.iter().map(|t| t.cos()).fold(f64::INFINITY, f64::min);
        let f: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let w = s.measure(&f);
        let r = optimal_recovery_linear(&s, &w)?;
        let fit = s.measure(&r.u_star).iter().zip(&w).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let mu_err = (r.mu - expected).abs() / expected;
        let ok = fit <= 1e-12 + opts.tolerance && mu_err <= 1e-9 && !r.mu_infinite;
        pass &= ok;
        rows.push(json!({"m": m, "dim_sigma": k, "N": n, "mu": r.mu, "mu_closed_form": expected, "data_residual": fit, "pass": ok}));
    }
    let weights = vec![1.0; 6];
    let ortho = principal_angle_instance(&weights, 2, &[0.3, std::f64::consts::FRAC_PI_2])?;
    let flagged = optimal_recovery_linear(&ortho, &[0.5, -0.25])?;
    pass &= flagged.mu_infinite && flagged.mu.is_infinite();
    Ok(Outcome {
        contract: "P_W u* = w to 1e-12; μ = 1/min cos θ_i on 10 constructed instances; μ = ∞ flagged when Σ meets W⊥".into(),
        measured: json!({"instances": rows, "orthogonal_direction_flagged": flagged.mu_infinite}),
        pass,
    })
}

/// Symmetric positive semidefinite kernels on 20 random configurations and
/// shrinking initialization variance with width.
pub(super) fn ntk(opts: &ClaimOptions) -> Result<Outcome, ClaimError> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut worst_asym: f64 = 0.0;
    let mut worst_eig = f64::INFINITY;
    for i in 0..20u64 {
        let d = rng.random_range(1..=3usize);
        let depth = rng.random_range(1..=3usize);
        let w = rng.random_range(4..=24usize);
        let mut widths = vec![d];
        widths.extend(std::iter::repeat_n(w, depth));
        widths.push(1);
        let scheme = if i % 2 == 0 { InitScheme::NeuralTangent } else { InitScheme::He };
        let net = init_net(&widths, scheme, opts.seed.wrapping_add(i))?;
        let pts: Vec<Vec<f64>> = (0..8).map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let k = empirical_ntk(&net, &pts, scheme)?;
        for a in 0..k.len() {
            for b in 0..k.len() {
                worst_asym = worst_asym.max((k[a][b] - k[b][a]).abs());
            }
        }
        worst_eig = worst_eig.min(min_eigenvalue(&k));
    }
    let rows = ntk_init_variance(&[8, 32, 128], &[0.3], &[0.8], 200, opts.seed)?;
    let decreasing = rows.windows(2).all(|w| w[1].variance < w[0].variance);
    Ok(Outcome {
        contract: "20 random kernels symmetric with eigenvalues ≥ -1e-10; Var K(x,x') at init decreases over W ∈ {8, 32, 128}".into(),
        measured: json!({"max_asymmetry": worst_asym, "min_eigenvalue": worst_eig, "variance": rows}),
        pass: worst_asym == 0.0 && worst_eig >= -1e-10 && decreasing,
    })
}

/// Orthogonal greedy approximation of a convex combination of a
/// 10-element ReLU ridge dictionary decays at log-log slope `≤ -0.4`.
pub(super) fn greedy_rate(opts: &ClaimOptions) -> Result<Outcome, ClaimError> {
    let grid = opts.grid.unwrap_or(400);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let xs: Vec<f64> = (0..grid).map(|i| (i as f64 + 0.5) / grid as f64).collect();
    let weights = vec![1.0 / grid as f64; grid];
    let dictionary: Vec<Vec<f64>> = (0..10)
        .map(|_| {
            let (w, b) = (rng.random_range(-3.0..3.0), rng.random_range(-1.0..1.0));
            let g: Vec<f64> = xs.iter().map(|x| f64::max(w * x + b, 0.0) + 0.1 * x).collect();
            let nrm = g.iter().map(|v| v * v).sum::<f64>().sqrt() / (grid as f64).sqrt();
            g.into_iter().map(|v| v / nrm).collect()
        })
        .collect();
    let mut c: Vec<f64> = (0..10).map(|_| rng.random::<f64>()).collect();
    let total: f64 = c.iter().sum();
    c.iter_mut().for_each(|v| *v /= total);
    let f: Vec<f64> = (0..grid).map(|i| dictionary.iter().zip(&c).map(|(g, a)| a * g[i]).sum()).collect();
    let r = greedy_hull_approx(&dictionary, &weights, &f, 64)?;
    let floor = 1e-15;
    let slope = loglog_slope(&r.errors, 4, 64, floor);
    let monotone = r.errors.windows(2).all(|w| w[1] <= w[0] + 1e-15);
    Ok(Outcome {
        contract: "least-squares slope of log error vs log n over n ∈ [4, 64] ≤ -0.4 (errors floored at 1e-15); errors nonincreasing".into(),
        measured: json!({"slope": slope, "errors": r.errors, "selected": r.selected}),
        pass: slope <= -0.4 && monotone,
    })
}
