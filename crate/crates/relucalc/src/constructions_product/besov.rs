//! Coefficient-budgeted B-spline approximants.
//!
//! Given coefficients `c_I` of dyadic B-splines `N_I(x) = N(2^k x - j)` on
//! the unit cube, each term is replaced by the emulated spline `N̂_I` with an
//! accuracy level `m(I)` chosen from the magnitude class of `|c_I|` and the
//! level `k` of the cube; terms with `m(I) = 0` are dropped.  The levels
//! follow a budget that equalizes the error contributions of all levels
//! for coefficient sequences in a Besov ball `B^s_∞(L_τ)` measured in
//! `L_p`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::bspline::bspline_net;
use crate::net_calculus::{add_by_depth, precompose_affine, AffineMap};
use crate::net_core::numeric::dyadic_class;
use crate::net_core::{parse_scalar, BoxDomain, NetError, ReluNet, Scalar, SpecialNet, Q};

/// Smoothness budget: Besov smoothness `s`, integrability `τ`, error norm
/// `L_p` (`τ < p < ∞`), dimension `d` and target level `L` (`2^L` terms).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BesovBudget {
    pub s: f64,
    pub tau: f64,
    pub p: f64,
    pub d: usize,
    pub level: u32,
}

impl BesovBudget {
    pub fn new(s: f64, tau: f64, p: f64, d: usize, level: u32) -> Result<Self, NetError> {
        let b = BesovBudget { s, tau, p, d, level };
        if !(s > 0.0 && tau > 0.0 && p.is_finite() && p > tau && d > 0) {
            return Err(NetError::Contract("need s > 0, 0 < τ < p < ∞ and d ≥ 1".into()));
        }
        if b.delta() <= 0.0 {
            return Err(NetError::Contract(format!("δ = s - d/τ + d/p = {} must be positive", b.delta())));
        }
        Ok(b)
    }

    /// Distance to the embedding line, `δ = s - d/τ + d/p`.
    pub fn delta(&self) -> f64 {
        self.s - self.d as f64 / self.tau + self.d as f64 / self.p
    }

    /// `λ = (1/τ - 1/p)^{-1}`.
    pub fn lambda(&self) -> f64 {
        1.0 / (1.0 / self.tau - 1.0 / self.p)
    }

    /// `β = max(1, ⌈2d / (s - δ)⌉)`, the logarithmic exponent of the size bound.
    pub fn beta(&self) -> u32 {
        ((2.0 * self.d as f64 / (self.s - self.delta())).ceil() as u32).max(1)
    }

    /// `ε_k = 2 log₂(k + 1)`.
    pub fn eps(&self, k: u32) -> f64 {
        2.0 * (k as f64 + 1.0).log2()
    }

    /// Smallest magnitude class that can be populated at level `k`:
    /// `J_k = (s - d/τ) k`.
    pub fn j_min(&self, k: u32) -> f64 {
        (self.s - self.d as f64 / self.tau) * k as f64
    }

    /// Class beyond which no emulation is needed:
    /// `J_k⁺ (1 - τ/p) + k s τ/p = ε_k + L s/d`.
    pub fn j_plus(&self, k: u32) -> f64 {
        let r = self.tau / self.p;
        (self.eps(k) + self.level as f64 * self.s / self.d as f64 - k as f64 * self.s * r) / (1.0 - r)
    }

    /// `X(j,k)/p = ε_k + L s/d - k s τ/p - j (1 - τ/p)`: half the exponent
    /// deficit that the level `m(j,k)` must make up.
    fn deficit(&self, j: f64, k: u32) -> f64 {
        let r = self.tau / self.p;
        self.eps(k) + self.level as f64 * self.s / self.d as f64 - k as f64 * self.s * r - j * (1.0 - r)
    }

    /// Accuracy level `m(j,k)`: the smallest nonnegative integer with
    /// `(2m + 1) ≥ X(j,k)/p`.  Zero for `j ≥ J_k⁺`.
    pub fn m(&self, j: f64, k: u32) -> u32 {
        let x = self.deficit(j, k);
        // Guard against rounding right at an integer threshold.
        let v = ((x - 1.0) / 2.0 - 1e-12).ceil();
        if v <= 0.0 {
            0
        } else {
            v as u32
        }
    }
}

/// One coefficient `c_I` of the dyadic cube `I = 2^{-k}(j + [0,1]^d)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DyadicIndex {
    pub k: u32,
    pub j: Vec<i64>,
}

/// Finitely supported B-spline coefficients.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BsplineCoeffs {
    pub d: usize,
    pub entries: BTreeMap<DyadicIndex, Q>,
}

#[derive(Debug, Deserialize)]
struct CoeffRecord {
    k: u32,
    j: Vec<i64>,
    c: String,
}

impl BsplineCoeffs {
    pub fn new(d: usize) -> Self {
        BsplineCoeffs { d, entries: BTreeMap::new() }
    }

    pub fn insert(&mut self, k: u32, j: Vec<i64>, c: Q) -> Result<(), NetError> {
        if j.len() != self.d {
            return Err(NetError::Dimension { expected: self.d, got: j.len() });
        }
        self.entries.insert(DyadicIndex { k, j }, c);
        Ok(())
    }

    /// Parse the JSON list `[{"k": 1, "j": [0, 1], "c": "3/8"}, …]`.
    pub fn from_json(d: usize, text: &str) -> Result<Self, NetError> {
        let recs: Vec<CoeffRecord> =
            serde_json::from_str(text).map_err(|e| NetError::Parse(format!("coefficient file: {e}")))?;
        let mut out = BsplineCoeffs::new(d);
        for r in recs {
            let c: Q = parse_scalar(&r.c)?;
            out.insert(r.k, r.j, c)?;
        }
        Ok(out)
    }
}

/// Per-term entry of a [`BesovReport`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TermReport {
    pub k: u32,
    pub offset: Vec<i64>,
    /// Magnitude class `j` with `2^{-j} ≤ |c_I| < 2^{-j+1}`.
    pub class: i64,
    pub m: u32,
}

/// Summary of the budget applied to a coefficient set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BesovReport {
    pub terms: Vec<TermReport>,
    /// `A = Σ_I m(I)`, the total accuracy budget (proportional to depth).
    pub total_budget: u64,
    /// Every populated `(j, k)` with `j ≥ J_k⁺` has `m(j,k) = 0`.
    pub zero_beyond_j_plus: bool,
    /// Largest `m(J_k, k)` over the populated levels `k`.
    pub max_m_at_j_min: u32,
    /// Depth and width of the assembled network.
    pub depth: usize,
    pub width: usize,
}

/// Assemble `Ŝ = Σ_{m(I) > 0} c_I N̂_I` by stacking the emulated splines in
/// depth (source channels plus one collation channel), realized on the unit
/// cube, together with the budget report.
pub fn besov_approximant(
    coeffs: &BsplineCoeffs,
    r: u32,
    budget: &BesovBudget,
) -> Result<(SpecialNet<Q>, BesovReport), NetError> {
    let d = coeffs.d;
    if d != budget.d {
        return Err(NetError::Dimension { expected: budget.d, got: d });
    }
    let mut terms = Vec::new();
    let mut nets = Vec::new();
    let mut alphas = Vec::new();
    let mut zero_beyond = true;
    let mut max_at_min = 0;
    for (idx, c) in &coeffs.entries {
        let Some(class) = dyadic_class(c) else { continue };
        let m = budget.m(class as f64, idx.k);
        if class as f64 >= budget.j_plus(idx.k) && m != 0 {
            zero_beyond = false;
        }
        max_at_min = max_at_min.max(budget.m(budget.j_min(idx.k), idx.k));
        terms.push(TermReport { k: idx.k, offset: idx.j.clone(), class, m });
        if m == 0 {
            continue;
        }
        let base = bspline_net::<Q>(r, d, m as usize)?;
        let scale = Q::pow2(idx.k as i64);
        let shift: Vec<Q> = idx.j.iter().map(|&v| Q::from_integer((-v).into())).collect();
        nets.push(precompose_affine(&base, &AffineMap::scalar(d, scale, shift))?);
        alphas.push(c.clone());
    }
    let snet = if nets.is_empty() {
        SpecialNet::from_relu(&ReluNet::zero(d, 1, 1, 1))?
    } else {
        add_by_depth(&nets, &alphas, &BoxDomain::unit(d))?
    };
    let report = BesovReport {
        total_budget: terms.iter().map(|t| t.m as u64).sum(),
        terms,
        zero_beyond_j_plus: zero_beyond,
        max_m_at_j_min: max_at_min,
        depth: snet.net().depth(),
        width: snet.net().width(),
    };
    Ok((snet, report))
}
