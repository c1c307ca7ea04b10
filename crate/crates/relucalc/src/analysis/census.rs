//! Activation-pattern census: how many linear regions a network shows on
//! random samples of a box, against the `3^m` and `2^m` pattern counts.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::arrangement::{Arrangement, ArrangementCellReport, EXACT_MAX_DIM, EXACT_MAX_PLANES};
use crate::net_core::numeric::exact_of;
use crate::net_core::{BoxDomain, NetError, ReluNet, Scalar, Q};

/// Sign of every hidden pre-activation, layer by layer: `+1`, `0` or `-1`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct ActivationPattern(pub Vec<i8>);

impl ActivationPattern {
    /// The pattern of `net` at `x`.
    pub fn of<T: Scalar>(net: &ReluNet<T>, x: &[T]) -> Result<Self, NetError> {
        let pre = net.preactivations(x)?;
        Ok(ActivationPattern(
            pre.iter()
                .flatten()
                .map(|z| {
                    if z.is_zero() {
                        0
                    } else if *z > T::zero() {
                        1
                    } else {
                        -1
                    }
                })
                .collect(),
        ))
    }

    pub fn has_zero(&self) -> bool {
        self.0.contains(&0)
    }
}

impl std::fmt::Display for ActivationPattern {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for s in &self.0 {
            f.write_char(match s {
                1 => '+',
                -1 => '-',
                _ => '0',
            })?;
        }
        Ok(())
    }
}

/// Result of [`region_census`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CensusReport {
    pub samples: usize,
    /// Total hidden node count `m`.
    pub hidden_nodes: usize,
    pub distinct_patterns: usize,
    /// `3^m` and `2^m` (as floating point; they overflow integers quickly).
    pub bound_all: f64,
    pub bound_generic: f64,
    /// Samples whose pattern contains a zero entry.
    pub samples_with_zero: usize,
    /// Exact (or sampled, see its `exact` flag) cell count of the first
    /// layer's hyperplanes, for one-hidden-layer networks.
    pub arrangement: Option<ArrangementCellReport>,
    #[serde(skip)]
    pub counts: BTreeMap<ActivationPattern, usize>,
}

impl CensusReport {
    /// `pattern,count` lines, patterns written with `+`, `-`, `0`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("pattern,count\n");
        for (p, c) in &self.counts {
            let _ = writeln!(s, "{p},{c}");
        }
        s
    }

    /// JSON summary (without the per-pattern table).
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Uniform random points in a bounded box.
pub fn sample_box<T: Scalar>(domain: &BoxDomain<T>, count: usize, seed: u64) -> Result<Vec<Vec<T>>, NetError> {
    if !domain.is_bounded() {
        return Err(NetError::Unbounded("cannot sample an unbounded box".into()));
    }
    let sides: Vec<(f64, f64)> =
        (0..domain.dim()).map(|i| (domain.lo(i).unwrap().to_f64(), domain.hi(i).unwrap().to_f64())).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count)
        .map(|_| sides.iter().map(|&(a, b)| T::from_f64(a + (b - a) * rng.random::<f64>())).collect())
        .collect())
}

/// Count the distinct activation patterns of `net` over `samples` random
/// points of `domain`.  For one-hidden-layer networks the cell count of the
/// first-layer hyperplanes on all of `R^d` is attached: exact for `d ≤ 3`
/// and at most 8 hyperplanes, otherwise a lower bound from the samples.
pub fn region_census<T: Scalar>(
    net: &ReluNet<T>,
    domain: &BoxDomain<T>,
    samples: usize,
    seed: u64,
) -> Result<CensusReport, NetError> {
    if domain.dim() != net.input_dim() {
        return Err(NetError::Dimension { expected: net.input_dim(), got: domain.dim() });
    }
    let pts = sample_box(domain, samples, seed)?;
    let patterns: Vec<ActivationPattern> =
        pts.par_iter().map(|x| ActivationPattern::of(net, x)).collect::<Result<_, NetError>>()?;
    let mut counts = BTreeMap::new();
    for p in &patterns {
        *counts.entry(p.clone()).or_insert(0usize) += 1;
    }
    let m: usize = net.hidden().iter().map(|l| l.fan_out()).sum();
    let arrangement = if net.depth() == 1 {
        let exact_net: ReluNet<Q> = net.to_mode();
        let arr = Arrangement::from_first_layer(&exact_net);
        if arr.dim() <= EXACT_MAX_DIM && arr.len() <= EXACT_MAX_PLANES {
            Some(arr.cell_report()?)
        } else {
            let qpts: Vec<Vec<Q>> = pts.iter().map(|x| x.iter().map(exact_of).collect()).collect();
            Some(arr.sampled_cell_report(&qpts))
        }
    } else {
        None
    };
    Ok(CensusReport {
        samples,
        hidden_nodes: m,
        distinct_patterns: counts.len(),
        bound_all: 3f64.powi(m as i32),
        bound_generic: 2f64.powi(m as i32),
        samples_with_zero: patterns.iter().filter(|p| p.has_zero()).count(),
        arrangement,
        counts,
    })
}
