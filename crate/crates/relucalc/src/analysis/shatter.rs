//! Shattering checks for univariate network families: can the family
//! realize a prescribed sign pattern on a point set?

use rayon::prelude::*;

use super::polyhedra::{feasible_point, LinearForm};
use super::sampled::eval_sorted1;
use crate::constructions_1d::{bit_extract_net, shallow_interpolant, BitExtractPlan};
use num::Zero;
use crate::net_core::{Layer, NetError, ReluNet, Scalar, Q};

/// A family of univariate networks together with its realization strategy.
#[derive(Debug, Clone, PartialEq)]
pub enum ShatterBuilder {
    /// One hidden layer of at most `width` neurons; a pattern on `D ≤ W + 1`
    /// points is realized by interpolating the signs.
    ShallowInterpolant { width: usize },
    /// `c + a (w t + b)_+`: the inner parameters `(w, b)` range over the grid
    /// `step·Z ∩ [-bound, bound]`; for each of them the outer parameters
    /// `(a, c)` are solved for exactly, so `false` means that no grid point
    /// admits any outer parameters at all.
    SingleNeuron { step: Q, bound: Q },
    /// Bit extraction with parameter `n`, on the sites of
    /// [`bit_extract_sites`].
    BitExtract { n: usize },
}

/// Result of [`shatter_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct ShatterOutcome {
    pub realized: bool,
    /// A network with `ε_i S(x_i) > 0` for all `i`, when one was found.
    pub witness: Option<ReluNet<Q>>,
}

/// The sites `t_i = i/n²` with `i mod n` odd.  Bit-extraction targets may
/// take any sign there: zero at even offsets and `±1` at odd offsets keeps
/// every block sum at zero.  There are `n²/2` of them.
pub fn bit_extract_sites(n: usize) -> Vec<Q> {
    let nn = (n * n) as i64;
    (0..nn).filter(|i| (i % n as i64) % 2 == 1).map(|i| Q::from_ratio(i, nn)).collect()
}

fn realizes(net: &ReluNet<Q>, points: &[Q], signs: &[i8]) -> Result<bool, NetError> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| points[i].partial_cmp(&points[j]).unwrap());
    let sorted: Vec<Q> = order.iter().map(|&i| points[i].clone()).collect();
    let vals = eval_sorted1(net, &sorted)?;
    Ok(order.iter().zip(vals).all(|(&i, v)| if signs[i] > 0 { v > Q::zero() } else { v < Q::zero() }))
}

/// Does the family realize the sign pattern `signs` on `points`?
pub fn shatter_check(builder: &ShatterBuilder, points: &[Q], signs: &[i8]) -> Result<ShatterOutcome, NetError> {
    if points.len() != signs.len() {
        return Err(NetError::Shape("one sign per point required".into()));
    }
    if signs.iter().any(|s| *s != 1 && *s != -1) {
        return Err(NetError::Contract("signs must be ±1".into()));
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(NetError::Contract("points must be distinct".into()));
    }
    let witness = match builder {
        ShatterBuilder::ShallowInterpolant { width } => {
            if points.len() > width + 1 {
                return Err(NetError::Contract(format!(
                    "a width-{width} interpolant fits at most {} points",
                    width + 1
                )));
            }
            let mut pairs: Vec<(Q, Q)> = points.iter().cloned().zip(signs.iter().map(|&s| Q::from_i64(s as i64))).collect();
            pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            let (p, v): (Vec<Q>, Vec<Q>) = pairs.into_iter().unzip();
            Some(shallow_interpolant(&p, &v)?)
        }
        ShatterBuilder::SingleNeuron { step, bound } => single_neuron_witness(points, signs, step, bound)?,
        ShatterBuilder::BitExtract { n } => {
            let nn = n * n;
            let mut y = vec![0i64; nn + 1];
            for (t, s) in points.iter().zip(signs) {
                let i = t.clone() * Q::from_i64(nn as i64);
                if !i.is_integer() || i < Q::zero() || i > Q::from_i64(nn as i64) {
                    return Err(NetError::Contract(format!("{t} is not a bit-extraction site")));
                }
                let i = i.to_integer().try_into().unwrap_or(usize::MAX);
                if (i % n) % 2 != 1 {
                    return Err(NetError::Contract(format!("{t} is not an admissible site")));
                }
                y[i] = *s as i64;
            }
            // Sites left unspecified take +1 at odd offsets.
            for (i, v) in y.iter_mut().enumerate() {
                if (i % n) % 2 == 1 && *v == 0 {
                    *v = 1;
                }
            }
            Some(bit_extract_net(&BitExtractPlan::from_values(*n, &y)?)?)
        }
    };
    match witness {
        Some(net) if realizes(&net, points, signs)? => Ok(ShatterOutcome { realized: true, witness: Some(net) }),
        _ => Ok(ShatterOutcome { realized: false, witness: None }),
    }
}

/// Every sign pattern on `points` is realized (`2^D` checks, run in
/// parallel).
pub fn shatters(builder: &ShatterBuilder, points: &[Q]) -> Result<bool, NetError> {
    let k = points.len();
    if k > 24 {
        return Err(NetError::Contract("too many points to enumerate all sign patterns".into()));
    }
    let results: Vec<bool> = (0u32..(1u32 << k))
        .into_par_iter()
        .map(|mask| {
            let signs: Vec<i8> = (0..k).map(|i| if mask >> i & 1 == 1 { 1 } else { -1 }).collect();
            shatter_check(builder, points, &signs).map(|o| o.realized)
        })
        .collect::<Result<_, NetError>>()?;
    Ok(results.into_iter().all(|r| r))
}

fn single_neuron_witness(points: &[Q], signs: &[i8], step: &Q, bound: &Q) -> Result<Option<ReluNet<Q>>, NetError> {
    if *step <= Q::zero() || *bound < Q::zero() {
        return Err(NetError::Contract("grid step must be positive and bound nonnegative".into()));
    }
    let k = (bound / step).floor().to_integer();
    let k: i64 = k.try_into().map_err(|_| NetError::Contract("parameter grid is too large".into()))?;
    let grid: Vec<Q> = (-k..=k).map(|i| step * Q::from_i64(i)).collect();
    let found = grid.par_iter().find_map_first(|w| {
        grid.iter().find_map(|b| {
            // ε_i (c + a h_i) > 0 in the unknowns (a, c).
            let cons: Vec<LinearForm> = points
                .iter()
                .zip(signs)
                .map(|(t, &s)| {
                    let h = (w * t + b).relu();
                    let e = Q::from_i64(s as i64);
                    LinearForm::new(vec![&e * h, e], Q::zero())
                })
                .collect();
            feasible_point(2, &cons, &[]).map(|ac| (w.clone(), b.clone(), ac))
        })
    });
    Ok(match found {
        Some((w, b, ac)) => Some(ReluNet::new(
            1,
            1,
            vec![Layer::new(vec![vec![w]], vec![b])?, Layer::new(vec![vec![ac[0].clone()]], vec![ac[1].clone()])?],
        )?),
        None => None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net_core::{q, qi};

    #[test]
    fn shallow_family_shatters_w_plus_one_points() {
        let pts = vec![qi(0), q(1, 3), q(1, 2), qi(2)];
        assert!(shatters(&ShatterBuilder::ShallowInterpolant { width: 3 }, &pts).unwrap());
        assert!(shatter_check(&ShatterBuilder::ShallowInterpolant { width: 2 }, &pts, &[1, 1, 1, 1]).is_err());
    }

    #[test]
    fn single_neuron_misses_alternating_signs() {
        let b = ShatterBuilder::SingleNeuron { step: q(1, 4), bound: qi(2) };
        let pts = [qi(0), q(1, 2), qi(1)];
        assert!(!shatter_check(&b, &pts, &[1, -1, 1]).unwrap().realized);
        assert!(!shatter_check(&b, &pts, &[-1, 1, -1]).unwrap().realized);
        let mono = shatter_check(&b, &pts, &[-1, 1, 1]).unwrap();
        assert!(mono.realized && mono.witness.is_some());
    }

    #[test]
    fn bit_extract_sites_and_errors() {
        let s = bit_extract_sites(4);
        assert_eq!(s.len(), 8);
        assert_eq!(s[0], q(1, 16));
        let b = ShatterBuilder::BitExtract { n: 4 };
        assert!(shatter_check(&b, &[q(2, 16)], &[1]).is_err());
        let out = shatter_check(&b, &s[..3], &[1, -1, -1]).unwrap();
        assert!(out.realized);
    }
}
