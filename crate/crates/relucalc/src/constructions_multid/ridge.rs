//! Exact interpolation of scattered data in `R^d` by a ridge function
//! `x ↦ S(v · x)`, where `S` is a deep univariate interpolant.

use crate::constructions_1d::deep_interpolant;
use crate::net_calculus::{precompose_affine, AffineMap};
use crate::net_core::{NetError, ReluNet, Scalar};

/// First direction `v_k = (1, k, k², …, k^{d-1})`, `k = 1, 2, …`, along
/// which the points have pairwise distinct projections.  For distinct
/// points the sweep terminates: for every pair, `(x - y) · v_k` is a nonzero
/// polynomial in `k` of degree below `d`, so it vanishes for at most `d - 1`
/// values of `k`.
pub fn separating_direction<T: Scalar>(points: &[Vec<T>]) -> Result<Vec<T>, NetError> {
    let d = points.first().map_or(0, |p| p.len());
    if d == 0 || points.iter().any(|p| p.len() != d) {
        return Err(NetError::Shape("points need a common positive dimension".into()));
    }
    let pairs = points.len() * points.len().saturating_sub(1) / 2;
    let bound = (d - 1) * pairs + 1;
    for k in 1..=bound as i64 {
        let mut v = Vec::with_capacity(d);
        let mut p = T::one();
        for _ in 0..d {
            v.push(p.clone());
            p = p * T::from_ratio(k, 1);
        }
        let mut t: Vec<T> = points.iter().map(|x| dot(&v, x)).collect();
        t.sort_by(|a, b| a.partial_cmp(b).expect("comparable scalars"));
        if t.windows(2).all(|w| w[0] < w[1]) {
            return Ok(v);
        }
    }
    Err(NetError::Contract("points are not pairwise distinct".into()))
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |s, (x, y)| s + x.clone() * y.clone())
}

/// Network `T(x) = S(v · x)` with `T(x⁽ⁱ⁾) = y_i` exactly.  The projections
/// are rescaled to `[0, 1]` before the univariate interpolation, so `T` has
/// the architecture of [`deep_interpolant`] on the same number of sites.
pub fn ridge_interpolant<T: Scalar>(points: &[Vec<T>], values: &[T]) -> Result<ReluNet<T>, NetError> {
    if points.is_empty() || points.len() != values.len() {
        return Err(NetError::Shape("need one value per point and at least one point".into()));
    }
    let d = points[0].len();
    if points.len() == 1 {
        if d == 0 {
            return Err(NetError::Shape("points need a positive dimension".into()));
        }
        return Ok(ReluNet::constant(d, values[0].clone()));
    }
    let v = separating_direction(points)?;
    let t: Vec<T> = points.iter().map(|x| dot(&v, x)).collect();
    let mut order: Vec<usize> = (0..t.len()).collect();
    order.sort_by(|&i, &j| t[i].partial_cmp(&t[j]).expect("comparable scalars"));
    let (lo, hi) = (t[order[0]].clone(), t[*order.last().unwrap()].clone());
    let span = hi - lo.clone();
    let sites: Vec<T> = order.iter().map(|&i| (t[i].clone() - lo.clone()) / span.clone()).collect();
    let vals: Vec<T> = order.iter().map(|&i| values[i].clone()).collect();
    let s = deep_interpolant(&sites, &vals)?;
    let row: Vec<T> = v.iter().map(|c| c.clone() / span.clone()).collect();
    let map = AffineMap::rect(vec![row], vec![-lo / span])?;
    precompose_affine(&s, &map)
}
