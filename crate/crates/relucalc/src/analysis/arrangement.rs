//! Hyperplane arrangements: exact cell enumeration, general-position tests
//! and the gradient-jump test for one-hidden-layer representability.

use serde::Serialize;

use super::polyhedra::{feasible_point, LinearForm};
use num::{One, Zero};
use crate::net_core::linalg::rank;
use crate::net_core::{NetError, ReluNet, Scalar, Q};

/// Largest instance handled by exact cell enumeration.
pub const EXACT_MAX_DIM: usize = 3;
pub const EXACT_MAX_PLANES: usize = 8;

/// `Σ_{j ≤ d} C(W, j)`: the number of cells of `W` hyperplanes in general
/// position in `R^d`, and an upper bound for any arrangement.
pub fn zaslavsky_bound(w: usize, d: usize) -> u64 {
    let mut c = 1u64;
    let mut s = 0u64;
    for j in 0..=d.min(w) {
        if j > 0 {
            c = c * (w - j + 1) as u64 / j as u64;
        }
        s += c;
    }
    s
}

/// Hyperplanes `H_j = {x : w_j·x + b_j = 0}` in `R^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Arrangement {
    d: usize,
    planes: Vec<LinearForm>,
}

/// Cell census of an arrangement.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArrangementCellReport {
    pub hyperplanes: usize,
    pub d: usize,
    pub cell_count: u64,
    pub zaslavsky_bound: u64,
    pub in_general_position: bool,
    /// `false` when the count comes from sampling (a lower bound only).
    pub exact: bool,
}

/// One cell of an arrangement: its sign vector and an interior point.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub signs: Vec<i8>,
    pub witness: Vec<Q>,
}

impl Arrangement {
    /// Every normal must be nonzero.
    pub fn new(d: usize, planes: Vec<LinearForm>) -> Result<Self, NetError> {
        for (j, p) in planes.iter().enumerate() {
            if p.a.len() != d {
                return Err(NetError::Dimension { expected: d, got: p.a.len() });
            }
            if p.a.iter().all(|v| v.is_zero()) {
                return Err(NetError::Contract(format!("hyperplane {j} has a zero normal")));
            }
        }
        Ok(Arrangement { d, planes })
    }

    /// The breakpoint hyperplanes of the first layer of a network; rows with
    /// a zero weight vector (constant nodes) are skipped.
    pub fn from_first_layer(net: &ReluNet<Q>) -> Self {
        let l = &net.layers()[0];
        let planes = l
            .w
            .iter()
            .zip(&l.b)
            .filter(|(w, _)| w.iter().any(|v| !v.is_zero()))
            .map(|(w, b)| LinearForm::new(w.clone(), b.clone()))
            .collect();
        Arrangement { d: net.input_dim(), planes }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn planes(&self) -> &[LinearForm] {
        &self.planes
    }

    pub fn len(&self) -> usize {
        self.planes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.planes.is_empty()
    }

    /// Sign vector of `x` (entries in `{-1, 0, 1}`).
    pub fn signs_at(&self, x: &[Q]) -> Vec<i8> {
        self.planes
            .iter()
            .map(|p| {
                let v = p.eval(x);
                if v.is_zero() {
                    0
                } else if v > Q::zero() {
                    1
                } else {
                    -1
                }
            })
            .collect()
    }

    fn oriented(&self, j: usize, s: i8) -> LinearForm {
        if s > 0 {
            self.planes[j].clone()
        } else {
            self.planes[j].negated()
        }
    }

    /// All nonempty open cells, by depth-first search over sign prefixes
    /// with an exact feasibility check at every node.
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        let mut prefix = Vec::with_capacity(self.len());
        self.extend_cells(&mut prefix, &mut out);
        out
    }

    fn extend_cells(&self, prefix: &mut Vec<LinearForm>, out: &mut Vec<Cell>) {
        let j = prefix.len();
        if j == self.len() {
            let witness = feasible_point(self.d, prefix, &[]).expect("checked feasible");
            out.push(Cell { signs: self.signs_at(&witness), witness });
            return;
        }
        for s in [1i8, -1] {
            prefix.push(self.oriented(j, s));
            if feasible_point(self.d, prefix, &[]).is_some() {
                self.extend_cells(prefix, out);
            }
            prefix.pop();
        }
    }

    /// General position: every `k ≤ d` normals are linearly independent and
    /// no `d + 1` hyperplanes share a point.  Checked exactly.
    pub fn in_general_position(&self) -> bool {
        let w = self.len();
        let mut ok = true;
        for_each_subset(w, (self.d + 1).min(w), &mut |idx| {
            if !ok {
                return;
            }
            let normals: Vec<Vec<Q>> = idx.iter().map(|&j| self.planes[j].a.clone()).collect();
            if idx.len() <= self.d {
                ok = rank(&normals) == idx.len();
            } else {
                // d+1 planes meet iff the augmented system is consistent.
                let aug: Vec<Vec<Q>> =
                    idx.iter().map(|&j| self.planes[j].a.iter().cloned().chain([self.planes[j].c.clone()]).collect()).collect();
                ok = rank(&aug) != rank(&normals);
            }
        });
        ok
    }

    /// Exact cell count (`d ≤ 3`, `W ≤ 8`).
    pub fn cell_report(&self) -> Result<ArrangementCellReport, NetError> {
        if self.d > EXACT_MAX_DIM || self.len() > EXACT_MAX_PLANES {
            return Err(NetError::Contract(format!(
                "exact cell counting supports d ≤ {EXACT_MAX_DIM} and at most {EXACT_MAX_PLANES} hyperplanes"
            )));
        }
        Ok(ArrangementCellReport {
            hyperplanes: self.len(),
            d: self.d,
            cell_count: self.cells().len() as u64,
            zaslavsky_bound: zaslavsky_bound(self.len(), self.d),
            in_general_position: self.in_general_position(),
            exact: true,
        })
    }

    /// Sampled lower bound on the cell count for instances too large for
    /// exact counting: distinct sign vectors over the given points.
    pub fn sampled_cell_report(&self, points: &[Vec<Q>]) -> ArrangementCellReport {
        let mut seen = std::collections::BTreeSet::new();
        for x in points {
            let s = self.signs_at(x);
            if !s.contains(&0) {
                seen.insert(s);
            }
        }
        ArrangementCellReport {
            hyperplanes: self.len(),
            d: self.d,
            cell_count: seen.len() as u64,
            zaslavsky_bound: zaslavsky_bound(self.len(), self.d),
            in_general_position: self.in_general_position(),
            exact: false,
        }
    }

    /// A point on `H_j` that lies in the open facet between the cells with
    /// sign vectors `s` and `s` with entry `j` flipped, if that facet is
    /// `(d-1)`-dimensional.
    fn facet_point(&self, signs: &[i8], j: usize) -> Option<Vec<Q>> {
        let strict: Vec<LinearForm> =
            (0..self.len()).filter(|&i| i != j).map(|i| self.oriented(i, signs[i])).collect();
        feasible_point(self.d, &strict, std::slice::from_ref(&self.planes[j]))
    }
}

fn for_each_subset(n: usize, k: usize, f: &mut dyn FnMut(&[usize])) {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if !cur.is_empty() {
            f(cur);
        }
        if cur.len() == k {
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, f);
            cur.pop();
        }
    }
    rec(0, n, k, &mut Vec::new(), f);
}

/// Gradient data of a piecewise-linear `T` whose pieces are cells of an
/// arrangement: per cell, its sign vector, an interior witness point and the
/// gradient of `T` there.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpSpec {
    pub arrangement: Arrangement,
    pub cells: Vec<CellGradient>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellGradient {
    pub signs: Vec<i8>,
    pub witness: Vec<Q>,
    pub gradient: Vec<Q>,
}

/// Outcome of [`one_layer_representable`].
#[derive(Debug, Clone, PartialEq)]
pub enum Representability {
    /// `T = Σ_j a_j (w_j·x + b_j)_+ + g·x + const`.
    Yes { a: Vec<Q>, linear: Vec<Q> },
    /// Across `hyperplane`, the gradient jump is not a multiple of `w_j`, or
    /// it differs between two facets.
    No { hyperplane: usize, reason: String },
}

impl JumpSpec {
    /// Gradient data of a network on the cells of `arrangement`.  The
    /// arrangement must contain every hyperplane on which the network's
    /// function bends, so that it is affine on each cell; gradients are then
    /// exact one-sided derivatives at the witness points.
    pub fn from_net(net: &ReluNet<Q>, arrangement: Arrangement) -> Result<Self, NetError> {
        if net.input_dim() != arrangement.dim() || net.output_dim() != 1 {
            return Err(NetError::Shape("need a scalar network on the arrangement's space".into()));
        }
        let cells = arrangement
            .cells()
            .into_iter()
            .map(|c| {
                let gradient = (0..arrangement.dim())
                    .map(|i| {
                        let mut e = vec![Q::zero(); arrangement.dim()];
                        e[i] = Q::one();
                        directional_derivative(net, &c.witness, &e)
                    })
                    .collect();
                CellGradient { signs: c.signs, witness: c.witness, gradient }
            })
            .collect();
        Ok(JumpSpec { arrangement, cells })
    }
}

/// One-sided derivative `lim_{h↓0} (N(x + h v) - N(x)) / h` of the first
/// output, by exact forward-mode propagation (a tied ReLU passes the
/// positive part of the incoming derivative).
pub fn directional_derivative(net: &ReluNet<Q>, x: &[Q], v: &[Q]) -> Q {
    let mut val = x.to_vec();
    let mut der = v.to_vec();
    let last = net.layers().len() - 1;
    for (li, layer) in net.layers().iter().enumerate() {
        let z = layer.apply(&val);
        let dz: Vec<Q> =
            layer.w.iter().map(|row| row.iter().zip(&der).fold(Q::zero(), |s, (w, d)| s + w * d)).collect();
        if li == last {
            return dz[0].clone();
        }
        der = z
            .iter()
            .zip(dz)
            .map(|(zi, di)| {
                if *zi > Q::zero() {
                    di
                } else if zi.is_zero() {
                    di.relu()
                } else {
                    Q::zero()
                }
            })
            .collect();
        val = z.iter().map(|zi| zi.relu()).collect();
    }
    unreachable!("a network has an output layer")
}

/// Test whether a piecewise-linear function given by per-cell gradients is
/// a one-hidden-layer network on the arrangement's hyperplanes.  Across each
/// hyperplane `H_j`, at every `(d-1)`-dimensional facet between two listed
/// cells, the gradient jump (positive side minus negative side) must equal
/// `a_j w_j` for one `a_j`.  On success, the linear part `g = ∇T - Σ_{j
/// active} a_j w_j` is also checked to be the same on every cell.
pub fn one_layer_representable(jumps: &JumpSpec) -> Result<Representability, NetError> {
    let arr = &jumps.arrangement;
    let d = arr.dim();
    for c in &jumps.cells {
        if c.witness.len() != d || c.gradient.len() != d || c.signs.len() != arr.len() {
            return Err(NetError::Shape("cell data does not match the arrangement".into()));
        }
        if arr.signs_at(&c.witness) != c.signs {
            return Err(NetError::Contract("a witness point is not inside its cell".into()));
        }
    }
    let by_signs: std::collections::HashMap<&[i8], &CellGradient> =
        jumps.cells.iter().map(|c| (c.signs.as_slice(), c)).collect();
    let mut a: Vec<Option<Q>> = vec![None; arr.len()];
    for c in jumps.cells.iter().filter(|c| c.signs.iter().all(|s| *s != 0)) {
        for j in 0..arr.len() {
            if c.signs[j] < 0 {
                continue;
            }
            let mut other = c.signs.clone();
            other[j] = -1;
            let Some(nb) = by_signs.get(other.as_slice()) else { continue };
            if arr.facet_point(&c.signs, j).is_none() {
                continue;
            }
            let jump: Vec<Q> = c.gradient.iter().zip(&nb.gradient).map(|(u, v)| u - v).collect();
            let w = &arr.planes()[j].a;
            let k = w.iter().position(|v| !v.is_zero()).expect("nonzero normal");
            let aj = &jump[k] / &w[k];
            if jump.iter().zip(w).any(|(u, wi)| *u != &aj * wi) {
                return Ok(Representability::No { hyperplane: j, reason: "gradient jump is not normal to the hyperplane".into() });
            }
            match &a[j] {
                Some(prev) if *prev != aj => {
                    return Ok(Representability::No { hyperplane: j, reason: "gradient jump differs between facets".into() });
                }
                _ => a[j] = Some(aj),
            }
        }
    }
    let a: Vec<Q> = a.into_iter().map(|v| v.unwrap_or_else(Q::zero)).collect();
    let mut linear: Option<Vec<Q>> = None;
    for c in &jumps.cells {
        let mut g = c.gradient.clone();
        for (j, aj) in a.iter().enumerate() {
            if c.signs[j] > 0 {
                for (gi, wi) in g.iter_mut().zip(&arr.planes()[j].a) {
                    *gi = gi.clone() - aj * wi;
                }
            }
        }
        match &linear {
            None => linear = Some(g),
            Some(l) if *l != g => {
                return Ok(Representability::No {
                    hyperplane: usize::MAX,
                    reason: "the residual after removing the ridge terms is not affine".into(),
                })
            }
            _ => {}
        }
    }
    Ok(Representability::Yes { a, linear: linear.unwrap_or_else(|| vec![Q::zero(); d]) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net_core::{q, qi, Layer};

    fn lf(a: &[i64], c: i64) -> LinearForm {
        LinearForm::new(a.iter().map(|&v| qi(v)).collect(), qi(c))
    }

    #[test]
    fn bound_values() {
        assert_eq!(zaslavsky_bound(2, 2), 4);
        assert_eq!(zaslavsky_bound(5, 2), 16);
        assert_eq!(zaslavsky_bound(3, 1), 4);
        assert_eq!(zaslavsky_bound(2, 3), 4);
        assert_eq!(zaslavsky_bound(0, 2), 1);
    }

    #[test]
    fn two_crossing_lines_give_four_cells() {
        let arr = Arrangement::new(2, vec![lf(&[1, 0], 0), lf(&[0, 1], 0)]).unwrap();
        let r = arr.cell_report().unwrap();
        assert_eq!((r.cell_count, r.zaslavsky_bound, r.in_general_position), (4, 4, true));
    }

    #[test]
    fn degenerate_arrangements_lose_cells() {
        // Parallel lines: 3 cells.
        let par = Arrangement::new(2, vec![lf(&[1, 0], 0), lf(&[1, 0], -1)]).unwrap();
        assert_eq!(par.cells().len(), 3);
        assert!(!par.in_general_position());
        // Three concurrent lines: 6 cells instead of 7.
        let conc = Arrangement::new(2, vec![lf(&[1, 0], 0), lf(&[0, 1], 0), lf(&[1, 1], 0)]).unwrap();
        assert_eq!(conc.cells().len(), 6);
        assert!(!conc.in_general_position());
        let generic = Arrangement::new(2, vec![lf(&[1, 0], 0), lf(&[0, 1], 0), lf(&[1, 1], -1)]).unwrap();
        assert_eq!(generic.cells().len(), 7);
        assert!(generic.in_general_position());
    }

    #[test]
    fn witnesses_lie_in_their_cells() {
        let arr = Arrangement::new(3, vec![lf(&[1, 0, 0], 0), lf(&[0, 1, 0], 0), lf(&[0, 0, 1], 0), lf(&[1, 1, 1], -1)]).unwrap();
        let cells = arr.cells();
        assert_eq!(cells.len() as u64, zaslavsky_bound(4, 3));
        for c in &cells {
            assert!(!c.signs.contains(&0));
        }
    }

    fn one_layer_net() -> ReluNet<Q> {
        let hidden = Layer::new(vec![vec![qi(1), qi(0)], vec![qi(0), qi(1)], vec![qi(1), qi(1)]], vec![qi(0), qi(0), qi(-1)]).unwrap();
        let out = Layer::new(vec![vec![q(3, 2), qi(-2), qi(5)]], vec![qi(7)]).unwrap();
        ReluNet::new(2, 1, vec![hidden, out]).unwrap()
    }

    #[test]
    fn genuine_one_layer_net_is_recognized() {
        let net = one_layer_net();
        let jumps = JumpSpec::from_net(&net, Arrangement::from_first_layer(&net)).unwrap();
        match one_layer_representable(&jumps).unwrap() {
            Representability::Yes { a, linear } => {
                assert_eq!(a, vec![q(3, 2), qi(-2), qi(5)]);
                assert_eq!(linear, vec![qi(0), qi(0)]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn zero_function_has_zero_coefficients() {
        let net = ReluNet::<Q>::zero(2, 1, 2, 1);
        let arr = Arrangement::new(2, vec![lf(&[1, 0], 0), lf(&[1, -1], 0)]).unwrap();
        let jumps = JumpSpec::from_net(&net, arr).unwrap();
        assert_eq!(
            one_layer_representable(&jumps).unwrap(),
            Representability::Yes { a: vec![qi(0), qi(0)], linear: vec![qi(0), qi(0)] }
        );
    }

    #[test]
    fn compactly_supported_pyramid_is_not_one_layer() {
        use crate::constructions_product::pyramid_net;
        use crate::net_calculus::relu_output;
        let net = relu_output(&pyramid_net::<Q>(2, 2).unwrap()).unwrap();
        let lines = vec![lf(&[1, 0], 0), lf(&[1, 0], -2), lf(&[0, 1], 0), lf(&[0, 1], -2), lf(&[1, -1], 0), lf(&[1, 1], -2)];
        let jumps = JumpSpec::from_net(&net, Arrangement::new(2, lines).unwrap()).unwrap();
        assert!(matches!(one_layer_representable(&jumps).unwrap(), Representability::No { .. }));
    }

    #[test]
    fn inconsistent_witness_is_rejected() {
        let net = one_layer_net();
        let mut jumps = JumpSpec::from_net(&net, Arrangement::from_first_layer(&net)).unwrap();
        jumps.cells[0].witness = jumps.cells[1].witness.clone();
        assert!(one_layer_representable(&jumps).is_err());
    }
}
