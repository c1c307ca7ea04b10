//! Empirical neural tangent kernel
//! `K_θ(x, x') = 2 Σ_l ∂S(x;θ)/∂θ_l · ∂S(x';θ)/∂θ_l`.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;

use super::train::{init_net, param_gradient, InitScheme};
use crate::net_core::{NetError, ReluNet};

/// Parameter gradient with respect to the raw parameters of `scheme`: the
/// weight entries of a layer with fan-in `k` are scaled by the scheme's
/// multiplier (chain rule), biases are unchanged.
fn raw_gradient(net: &ReluNet<f64>, x: &[f64], scheme: InitScheme) -> Result<Vec<f64>, NetError> {
    let (_, mut g) = param_gradient(net, x)?;
    let mut off = 0;
    for l in net.layers() {
        let m = scheme.weight_multiplier(l.fan_in());
        for v in &mut g[off..off + l.fan_out() * l.fan_in()] {
            *v *= m;
        }
        off += l.fan_out() * (l.fan_in() + 1);
    }
    Ok(g)
}

/// Kernel matrix on `points`: twice the Gram matrix of the parameter
/// gradients, so symmetric positive semidefinite by construction.
pub fn empirical_ntk(net: &ReluNet<f64>, points: &[Vec<f64>], scheme: InitScheme) -> Result<Vec<Vec<f64>>, NetError> {
    let grads: Vec<Vec<f64>> =
        points.par_iter().map(|x| raw_gradient(net, x, scheme)).collect::<Result<_, NetError>>()?;
    Ok(grads
        .iter()
        .map(|gi| grads.iter().map(|gj| 2.0 * gi.iter().zip(gj).map(|(a, b)| a * b).sum::<f64>()).collect())
        .collect())
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(k: &[Vec<f64>]) -> f64 {
    let n = k.len();
    if n == 0 {
        return 0.0;
    }
    let m = DMatrix::from_fn(n, n, |i, j| k[i][j]);
    SymmetricEigen::new(m).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

/// One row of [`ntk_init_variance`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NtkVarianceRow {
    pub width: usize,
    pub mean: f64,
    pub variance: f64,
}

/// Monte-Carlo mean and (unbiased) variance of `K_{θ⁰}(x, x')` over
/// `inits` random initializations of a one-hidden-layer network of each
/// width, in the neural-tangent scaling.  Seeds are `seed, seed+1, …`
/// for every width.
pub fn ntk_init_variance(
    widths: &[usize],
    x: &[f64],
    x2: &[f64],
    inits: usize,
    seed: u64,
) -> Result<Vec<NtkVarianceRow>, NetError> {
    if inits < 2 {
        return Err(NetError::Contract("need at least two initializations".into()));
    }
    let d = x.len();
    widths
        .iter()
        .map(|&w| {
            let vals: Vec<f64> = (0..inits as u64)
                .into_par_iter()
                .map(|s| {
                    let net = init_net(&[d, w, 1], InitScheme::NeuralTangent, seed + s)?;
                    let k = empirical_ntk(&net, &[x.to_vec(), x2.to_vec()], InitScheme::NeuralTangent)?;
                    Ok(k[0][1])
                })
                .collect::<Result<_, NetError>>()?;
            let mean = vals.iter().sum::<f64>() / inits as f64;
            let variance = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (inits as f64 - 1.0);
            Ok(NtkVarianceRow { width: w, mean, variance })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_is_a_gram_matrix() {
        let net = init_net(&[2, 16, 16, 1], InitScheme::NeuralTangent, 4).unwrap();
        let pts: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64 / 5.0, 1.0 - i as f64 / 7.0]).collect();
        let k = empirical_ntk(&net, &pts, InitScheme::NeuralTangent).unwrap();
        for i in 0..pts.len() {
            let (_, g) = param_gradient(&net, &pts[i]).unwrap();
            assert!(k[i][i] >= 0.0 && !g.is_empty());
            for j in 0..pts.len() {
                assert!((k[i][j] - k[j][i]).abs() <= 1e-12);
            }
        }
        assert!(min_eigenvalue(&k) >= -1e-10);
    }

    #[test]
    fn variance_shrinks_with_width() {
        let rows = ntk_init_variance(&[8, 32, 128], &[0.3], &[0.8], 50, 100).unwrap();
        assert!(rows.windows(2).all(|w| w[1].variance < w[0].variance), "{rows:?}");
    }
}
