//! Empirical Lipschitz constant of the parameter-to-function map of a fixed
//! architecture, in the uniform norm on `[0,1]^d`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::net_core::{param_count, BoxDomain, Layer, NetError, ReluNet};

/// Constant-width architecture `Υ^{W,L}` with `d` inputs and one output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Architecture {
    pub d: usize,
    pub width: usize,
    pub depth: usize,
}

impl Architecture {
    pub fn param_count(&self) -> usize {
        param_count(self.d, 1, self.width, self.depth)
    }

    /// The network with parameter vector `y`, read layer by layer, each layer
    /// row-major weights followed by its biases.
    pub fn realize(&self, y: &[f64]) -> Result<ReluNet<f64>, NetError> {
        if y.len() != self.param_count() {
            return Err(NetError::Dimension { expected: self.param_count(), got: y.len() });
        }
        let mut it = y.iter().copied();
        let mut fan_in = self.d;
        let mut layers = Vec::with_capacity(self.depth + 1);
        for li in 0..=self.depth {
            let fan_out = if li == self.depth { 1 } else { self.width };
            let w = (0..fan_out).map(|_| it.by_ref().take(fan_in).collect()).collect();
            let b = it.by_ref().take(fan_out).collect();
            layers.push(Layer::new(w, b)?);
            fan_in = fan_out;
        }
        ReluNet::new(self.d, 1, layers)
    }
}

/// `‖M(y) - M(y')‖_C / ‖y - y'‖_∞`, with the uniform norm taken over a grid
/// of `[0,1]^d` (`per_axis` points per axis); zero when `y = y'`.
pub fn realization_ratio(arch: &Architecture, y: &[f64], y2: &[f64], per_axis: usize) -> Result<f64, NetError> {
    let dy = y.iter().zip(y2).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    if dy == 0.0 {
        return Ok(0.0);
    }
    let (n1, n2) = (arch.realize(y)?, arch.realize(y2)?);
    let mut m: f64 = 0.0;
    for x in BoxDomain::<f64>::unit(arch.d).grid(per_axis)? {
        m = m.max((n1.eval1(&x)? - n2.eval1(&x)?).abs());
    }
    Ok(m / dy)
}

/// One row of a [`lipschitz_probe`] report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LipschitzRow {
    pub radius: f64,
    /// Pairs sampled in balls of radius at most `radius`.
    pub pairs: usize,
    /// Largest ratio among those pairs.
    pub max_ratio: f64,
}

/// Sample `pairs` parameter pairs uniformly in the `∞`-ball of each radius
/// and record the largest ratio.  The balls are nested, so each row also
/// counts the pairs drawn for the smaller radii: the report is a lower
/// bound on the Lipschitz constant over that ball and is nondecreasing in
/// the radius by construction.
pub fn lipschitz_probe(
    arch: &Architecture,
    radii: &[f64],
    pairs: usize,
    per_axis: usize,
    seed: u64,
) -> Result<Vec<LipschitzRow>, NetError> {
    let mut radii = radii.to_vec();
    if radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
        return Err(NetError::Contract("radii must be positive and finite".into()));
    }
    radii.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let p = arch.param_count();
    let mut rows = Vec::with_capacity(radii.len());
    let mut best: f64 = 0.0;
    for (ri, &r) in radii.iter().enumerate() {
        let ratios: Vec<f64> = (0..pairs)
            .into_par_iter()
            .map(|k| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((ri as u64) << 40) ^ k as u64);
                let y: Vec<f64> = (0..p).map(|_| rng.random_range(-r..=r)).collect();
                let y2: Vec<f64> = (0..p).map(|_| rng.random_range(-r..=r)).collect();
                realization_ratio(arch, &y, &y2, per_axis)
            })
            .collect::<Result<_, NetError>>()?;
        best = ratios.into_iter().fold(best, f64::max);
        rows.push(LipschitzRow { radius: r, pairs: pairs * (ri + 1), max_ratio: best });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parameter_vector_roundtrip() {
        let arch = Architecture { d: 2, width: 3, depth: 2 };
        let y: Vec<f64> = (0..arch.param_count()).map(|i| i as f64).collect();
        let net = arch.realize(&y).unwrap();
        assert_eq!(net.stats().param_count, arch.param_count());
        assert_eq!(net.layers()[0].w[0], vec![0.0, 1.0]);
        assert_eq!(net.layers()[0].b, vec![6.0, 7.0, 8.0]);
        assert!(arch.realize(&y[1..]).is_err());
    }

    #[test]
    fn equal_parameters_contribute_nothing() {
        let arch = Architecture { d: 1, width: 3, depth: 3 };
        let y = vec![0.3; arch.param_count()];
        assert_eq!(realization_ratio(&arch, &y, &y, 11).unwrap(), 0.0);
    }

    #[test]
    fn probe_is_finite_and_monotone() {
        let arch = Architecture { d: 1, width: 3, depth: 3 };
        let rows = lipschitz_probe(&arch, &[2.0, 1.0], 100, 33, 5).unwrap();
        assert_eq!(rows[0].radius, 1.0);
        assert!(rows.iter().all(|r| r.max_ratio.is_finite() && r.max_ratio > 0.0));
        assert!(rows[1].max_ratio >= rows[0].max_ratio);
    }
}
