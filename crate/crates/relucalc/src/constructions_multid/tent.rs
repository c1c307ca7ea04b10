//! Tent functions on simplices and compilers for continuous piecewise-linear
//! functions given as signed sums of convex pieces `Σ_j ε_j max(S_j)`.

use serde::{Deserialize, Serialize};

use super::minmax::{carry_collation, minmax_affine, recursive_rows, AffineFamily, Extremum, MinMaxStrategy};
use crate::net_calculus::parallelize_sum;
use crate::net_core::linalg::inverse;
use crate::net_core::{special_to_relu, Affine, BoxDomain, ChannelRole, NetError, ReluNet, Scalar, SpecialBuilder};

/// The `d + 1` barycentric coordinates of a nondegenerate simplex as affine
/// functions on `R^d`.
pub fn barycentric_family<T: Scalar>(vertices: &[Vec<T>]) -> Result<AffineFamily<T>, NetError> {
    let d = vertices.first().map_or(0, |v| v.len());
    if d == 0 || vertices.len() != d + 1 || vertices.iter().any(|v| v.len() != d) {
        return Err(NetError::Shape("a simplex in R^d needs d + 1 vertices of dimension d ≥ 1".into()));
    }
    let v0 = &vertices[0];
    // Columns v_j - v_0, j = 1..d.
    let a: Vec<Vec<T>> =
        (0..d).map(|r| (1..=d).map(|j| vertices[j][r].clone() - v0[r].clone()).collect()).collect();
    let inv = inverse(&a).ok_or_else(|| NetError::Contract("degenerate simplex".into()))?;
    let mut members = Vec::with_capacity(d + 1);
    let mut w0 = vec![T::zero(); d];
    let mut b0 = T::one();
    for row in &inv {
        let b = -row.iter().zip(v0).fold(T::zero(), |s, (r, v)| s + r.clone() * v.clone());
        for (acc, r) in w0.iter_mut().zip(row) {
            *acc = acc.clone() - r.clone();
        }
        b0 = b0 - b.clone();
        members.push((row.clone(), b));
    }
    members.insert(0, (w0, b0));
    AffineFamily::new(members)
}

/// Tent `T(x) = (min_j z_j(x))_+` on the simplex with the given vertices,
/// where `z_j = λ_j / λ_j(x*)` are the barycentric coordinates normalized to
/// equal one at the interior point `x*`.  `T(x*) = 1` and `T = 0` outside
/// the simplex.  Tournament architecture:
/// `Υ^{3·2^{⌈log₂(d+1)⌉-1}, 1+⌈log₂(d+1)⌉}`.
pub fn tent_net<T: Scalar>(vertices: &[Vec<T>], x_star: &[T]) -> Result<ReluNet<T>, NetError> {
    let fam = normalized_tent_family(vertices, x_star)?;
    minmax_affine(&fam, Extremum::Min, MinMaxStrategy::Tournament, true, None)
}

/// The normalized family `z_j` of [`tent_net`].
pub fn normalized_tent_family<T: Scalar>(vertices: &[Vec<T>], x_star: &[T]) -> Result<AffineFamily<T>, NetError> {
    let bary = barycentric_family(vertices)?;
    if x_star.len() != bary.dim() {
        return Err(NetError::Dimension { expected: bary.dim(), got: x_star.len() });
    }
    let at = bary.eval(x_star);
    if at.iter().any(|l| *l <= T::zero()) {
        return Err(NetError::Contract("x* must lie strictly inside the simplex".into()));
    }
    let members = bary
        .members()
        .iter()
        .zip(&at)
        .map(|((w, b), l)| (w.iter().map(|v| v.clone() / l.clone()).collect(), b.clone() / l.clone()))
        .collect();
    AffineFamily::new(members)
}

/// `f = Σ_j ε_j max(S_j)` with signs `ε_j = ±1` and affine families of at
/// most `d + 1` members on `R^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexPieceDecomposition<T> {
    terms: Vec<(i8, AffineFamily<T>)>,
}

impl<T: Scalar> ConvexPieceDecomposition<T> {
    pub fn new(terms: Vec<(i8, AffineFamily<T>)>) -> Result<Self, NetError> {
        let d = terms.first().ok_or_else(|| NetError::Contract("empty decomposition".into()))?.1.dim();
        for (eps, fam) in &terms {
            if *eps != 1 && *eps != -1 {
                return Err(NetError::Contract(format!("signs must be ±1, got {eps}")));
            }
            if fam.dim() != d {
                return Err(NetError::Shape("all families need the same input dimension".into()));
            }
            if fam.len() > d + 1 {
                return Err(NetError::Contract(format!("a family has {} > d + 1 = {} members", fam.len(), d + 1)));
            }
        }
        Ok(ConvexPieceDecomposition { terms })
    }

    pub fn dim(&self) -> usize {
        self.terms[0].1.dim()
    }

    pub fn terms(&self) -> &[(i8, AffineFamily<T>)] {
        &self.terms
    }

    /// Direct evaluation of `Σ_j ε_j max(S_j)(x)`.
    pub fn eval(&self, x: &[T]) -> T {
        self.terms.iter().fold(T::zero(), |s, (eps, fam)| {
            let m = fam.extremum(Extremum::Max, x);
            if *eps > 0 {
                s + m
            } else {
                s - m
            }
        })
    }
}

/// Architecture for [`cpwl_compile`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CompileMode {
    /// Parallel tournaments: depth `⌈log₂(d+1)⌉`, width `3p·2^{⌈log₂(d+1)⌉-1}`,
    /// exact on `R^d`.
    Shallow,
    /// Running maxima one after another: width `d + 2`, depth at most `p d`,
    /// exact on the given box.
    Deep,
}

fn sign<T: Scalar>(eps: i8) -> T {
    if eps > 0 {
        T::one()
    } else {
        -T::one()
    }
}

/// Compile a convex-piece decomposition into a ReLU network.
pub fn cpwl_compile<T: Scalar>(
    decomp: &ConvexPieceDecomposition<T>,
    mode: CompileMode,
    region: Option<&BoxDomain<T>>,
) -> Result<ReluNet<T>, NetError> {
    let d = decomp.dim();
    match mode {
        CompileMode::Shallow => {
            // Padding every family to d + 1 members equalizes the depths.
            let nets = decomp
                .terms
                .iter()
                .map(|(_, fam)| minmax_affine(&fam.padded(d + 1), Extremum::Max, MinMaxStrategy::Tournament, false, None))
                .collect::<Result<Vec<_>, _>>()?;
            let alpha: Vec<T> = decomp.terms.iter().map(|(e, _)| sign(*e)).collect();
            parallelize_sum(&nets, &alpha)
        }
        CompileMode::Deep => {
            let region = region.ok_or_else(|| NetError::Unbounded("deep compilation needs a bounded box".into()))?;
            let mut roles: Vec<ChannelRole> = (0..d).map(ChannelRole::source).collect();
            roles.push(ChannelRole::compute());
            roles.push(ChannelRole::collation());
            let (c, coll) = (d, d + 1);
            let mut b = SpecialBuilder::new(d, roles);
            let mut pending = Affine::zero();
            for (eps, fam) in &decomp.terms {
                let mu = recursive_rows(&mut b, fam, Extremum::Max, c, Some((coll, &mut pending)))?;
                pending = pending.plus(&mu.scale(&sign(*eps)));
            }
            if b.depth() == 0 {
                // Affine target: one carrying layer keeps the network well formed.
                let mut r = b.blank();
                r[coll] = carry_collation(&b, coll, &mut pending);
                b.push(r)?;
            }
            let out = Affine::var(coll).plus(&pending);
            special_to_relu(&b.finish(vec![out], None)?, region)
        }
    }
}
