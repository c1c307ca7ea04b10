//! Nodal (hat) bases of linear finite elements on the Kuhn triangulation of
//! `[0,1]^d` with `n` cubes per axis, and networks for their combinations.
//!
//! Every cube is split into `d!` simplices along the diagonal that runs from
//! the corner with `x_0 = 1` (the other coordinates 0) to the corner with
//! `x_0 = 0` (the others 1), i.e. the standard Kuhn split reflected in the
//! first coordinate.  In two dimensions that is the northwest diagonal.
//! The nodal function of a vertex `v` is `φ_v = (min_{Δ ∋ v} λ_{v,Δ})_+`
//! where `λ_{v,Δ}` is the barycentric coordinate of `v` in the simplex `Δ`,
//! extended affinely to all of `R^d`.

use serde::{Deserialize, Serialize};

use super::minmax::{carry_collation, minmax_affine, recursive_rows, AffineFamily, Extremum, MinMaxStrategy, Stacking};
use super::tent::barycentric_family;
use crate::net_calculus::parallelize_sum;
use crate::net_core::{special_to_relu, Affine, BoxDomain, ChannelRole, NetError, ReluNet, Scalar, SpecialBuilder};

/// Kuhn triangulation of `[0,1]^d` with `n` cubes per axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KuhnGrid {
    pub d: usize,
    pub n: usize,
}

/// Lattice vertex given by its integer coordinates in `0..=n`.
pub type Vertex = Vec<usize>;

fn permutations(d: usize) -> Vec<Vec<usize>> {
    if d == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(d - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, d - 1);
            out.push(q);
        }
    }
    out
}

fn factorial(k: usize) -> usize {
    (1..=k).product()
}

impl KuhnGrid {
    pub fn new(d: usize, n: usize) -> Result<Self, NetError> {
        if d == 0 || n == 0 {
            return Err(NetError::Contract("the Kuhn grid needs d ≥ 1 and n ≥ 1".into()));
        }
        Ok(KuhnGrid { d, n })
    }

    /// Number of simplices meeting at an interior vertex, `d* = (d+1)!`.
    pub fn star_size(&self) -> usize {
        factorial(self.d + 1)
    }

    /// All `(n+1)^d` vertices, first coordinate varying slowest.
    pub fn vertices(&self) -> Vec<Vertex> {
        let mut out = vec![Vec::new()];
        for _ in 0..self.d {
            out = out
                .into_iter()
                .flat_map(|v| {
                    (0..=self.n).map(move |i| {
                        let mut w = v.clone();
                        w.push(i);
                        w
                    })
                })
                .collect();
        }
        out
    }

    pub fn contains(&self, v: &[usize]) -> bool {
        v.len() == self.d && v.iter().all(|&i| i <= self.n)
    }

    /// Coordinates `v / n` of a vertex.
    pub fn point<T: Scalar>(&self, v: &[usize]) -> Vec<T> {
        v.iter().map(|&i| T::from_ratio(i as i64, self.n as i64)).collect()
    }

    /// All `n^d · d!` simplices, each as its `d + 1` vertices.
    pub fn simplices(&self) -> Vec<Vec<Vertex>> {
        let perms = permutations(self.d);
        let corners: Vec<Vertex> = KuhnGrid { d: self.d, n: self.n - 1 }.vertices();
        let mut out = Vec::with_capacity(corners.len() * perms.len());
        for c in &corners {
            for p in &perms {
                let mut off = vec![0usize; self.d];
                let mut simplex = Vec::with_capacity(self.d + 1);
                let place = |off: &[usize]| -> Vertex {
                    off.iter()
                        .enumerate()
                        .map(|(i, &o)| c[i] + if i == 0 { 1 - o } else { o })
                        .collect()
                };
                simplex.push(place(&off));
                for &axis in p {
                    off[axis] = 1;
                    simplex.push(place(&off));
                }
                out.push(simplex);
            }
        }
        out
    }

    /// The simplices containing `v`, each with the position of `v` in it.
    pub fn star(&self, v: &[usize]) -> Vec<(Vec<Vertex>, usize)> {
        self.simplices()
            .into_iter()
            .filter_map(|s| s.iter().position(|w| w.as_slice() == v).map(|k| (s.clone(), k)))
            .collect()
    }

    /// The affine functions `λ_{v,Δ}`, one per simplex `Δ` of the star.
    pub fn nodal_family<T: Scalar>(&self, v: &[usize]) -> Result<AffineFamily<T>, NetError> {
        if !self.contains(v) {
            return Err(NetError::Contract(format!("vertex {v:?} is not on the grid")));
        }
        let members = self
            .star(v)
            .into_iter()
            .map(|(s, k)| {
                let pts: Vec<Vec<T>> = s.iter().map(|w| self.point(w)).collect();
                Ok(barycentric_family(&pts)?.members()[k].clone())
            })
            .collect::<Result<Vec<_>, NetError>>()?;
        AffineFamily::new(members)
    }

    /// Reference value of the nodal function `φ_v(x)`.
    pub fn nodal_value<T: Scalar>(&self, v: &[usize], x: &[T]) -> Result<T, NetError> {
        Ok(self.nodal_family(v)?.extremum(Extremum::Min, x).relu())
    }
}

/// Network for the nodal function `φ_v`: the star family is padded to
/// `(d+1)!` members by repetition, so every vertex gets the same
/// architecture `Υ^{3·2^{⌈log₂ d*⌉-1}, 1+⌈log₂ d*⌉}`.
pub fn fem_basis_net<T: Scalar>(grid: &KuhnGrid, v: &[usize]) -> Result<ReluNet<T>, NetError> {
    let fam = grid.nodal_family::<T>(v)?.padded(grid.star_size());
    minmax_affine(&fam, Extremum::Min, MinMaxStrategy::Tournament, true, None)
}

/// Network for `Σ_v S(v) φ_v` with nodal values listed in the order of
/// [`KuhnGrid::vertices`].
///
/// * [`Stacking::Parallel`]: all nodal networks side by side, width
///   `3 (n+1)^d 2^{⌈log₂ d*⌉-1}`, depth `1 + ⌈log₂ d*⌉`, exact on `R^d`.
/// * [`Stacking::Deep`]: one running minimum per vertex, width `d + 2`,
///   depth at most `(n+1)^d d*`, exact on `[0,1]^d`.
pub fn fem_combination<T: Scalar>(grid: &KuhnGrid, values: &[T], stacking: Stacking) -> Result<ReluNet<T>, NetError> {
    let verts = grid.vertices();
    if values.len() != verts.len() {
        return Err(NetError::Shape(format!("{} nodal values for {} vertices", values.len(), verts.len())));
    }
    match stacking {
        Stacking::Parallel => {
            let nets = verts.iter().map(|v| fem_basis_net(grid, v)).collect::<Result<Vec<_>, _>>()?;
            parallelize_sum(&nets, values)
        }
        Stacking::Deep => {
            let d = grid.d;
            let mut roles: Vec<ChannelRole> = (0..d).map(ChannelRole::source).collect();
            roles.push(ChannelRole::compute());
            roles.push(ChannelRole::collation());
            let (c, coll) = (d, d + 1);
            let mut b = SpecialBuilder::new(d, roles);
            let mut pending = Affine::zero();
            for (v, s) in verts.iter().zip(values) {
                let fam = grid.nodal_family::<T>(v)?;
                let mu = recursive_rows(&mut b, &fam, Extremum::Min, c, Some((coll, &mut pending)))?;
                let mut r = b.blank();
                r[c] = mu;
                r[coll] = carry_collation(&b, coll, &mut pending);
                b.push(r)?;
                pending = Affine::term(c, s.clone());
            }
            let out = Affine::var(coll).plus(&pending);
            special_to_relu(&b.finish(vec![out], None)?, &BoxDomain::unit(d))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net_core::{q, qi, Q};

    #[test]
    fn grid_counts() {
        let g = KuhnGrid::new(2, 2).unwrap();
        assert_eq!(g.vertices().len(), 9);
        assert_eq!(g.simplices().len(), 8);
        assert_eq!(g.star(&[1, 1]).len(), 6);
        let g3 = KuhnGrid::new(3, 1).unwrap();
        assert_eq!(g3.simplices().len(), 6);
        assert_eq!(g3.star_size(), 24);
    }

    #[test]
    fn northwest_diagonal() {
        let g = KuhnGrid::new(2, 1).unwrap();
        for s in g.simplices() {
            assert!(s.contains(&vec![1, 0]) && s.contains(&vec![0, 1]));
        }
    }

    #[test]
    fn nodal_property_and_partition_of_unity() {
        let g = KuhnGrid::new(2, 2).unwrap();
        let verts = g.vertices();
        let nets: Vec<ReluNet<Q>> = verts.iter().map(|v| fem_basis_net(&g, v).unwrap()).collect();
        for (v, net) in verts.iter().zip(&nets) {
            assert_eq!((net.width(), net.depth()), (12, 4));
            for w in &verts {
                let want = if v == w { qi(1) } else { qi(0) };
                assert_eq!(net.eval1(&g.point::<Q>(w)).unwrap(), want);
            }
        }
        for x in BoxDomain::<Q>::unit(2).grid(13).unwrap() {
            let s = nets.iter().fold(qi(0), |s, n| s + n.eval1(&x).unwrap());
            assert_eq!(s, qi(1));
        }
    }

    #[test]
    fn combinations_reproduce_nodal_data() {
        let g = KuhnGrid::new(2, 2).unwrap();
        let verts = g.vertices();
        let vals: Vec<Q> = (0..verts.len() as i64).map(|k| q(k * k - 3, 4)).collect();
        let par = fem_combination(&g, &vals, Stacking::Parallel).unwrap();
        let deep = fem_combination(&g, &vals, Stacking::Deep).unwrap();
        assert_eq!(deep.width(), 4);
        assert!(deep.depth() <= 9 * 6);
        for (v, s) in verts.iter().zip(&vals) {
            let x = g.point::<Q>(v);
            assert_eq!(par.eval1(&x).unwrap(), *s);
            assert_eq!(deep.eval1(&x).unwrap(), *s);
        }
        for x in BoxDomain::<Q>::unit(2).grid(9).unwrap() {
            assert_eq!(par.eval1(&x).unwrap(), deep.eval1(&x).unwrap());
        }
    }

    #[test]
    fn rejects_foreign_vertex() {
        let g = KuhnGrid::new(2, 2).unwrap();
        assert!(fem_basis_net::<Q>(&g, &[3, 0]).is_err());
    }
}
