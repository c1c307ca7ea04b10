//! Exact continuous piecewise-linear functions of one variable.

use crate::net_core::{NetError, Scalar};

/// A continuous piecewise-linear function on `R`, stored by its values at
/// strictly increasing nodes plus the slopes of the two unbounded rays.
///
/// Nodes are not required to be genuine breakpoints (the slope may be the
/// same on both sides); [`Cpwl1D::simplify`] removes redundant ones.  There
/// is always at least one node.
#[derive(Debug, Clone, PartialEq)]
pub struct Cpwl1D<T> {
    nodes: Vec<T>,
    values: Vec<T>,
    left_slope: T,
    right_slope: T,
}

impl<T: Scalar> Cpwl1D<T> {
    pub fn new(nodes: Vec<T>, values: Vec<T>, left_slope: T, right_slope: T) -> Result<Self, NetError> {
        if nodes.is_empty() || nodes.len() != values.len() {
            return Err(NetError::Shape("need at least one node and one value per node".into()));
        }
        if nodes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(NetError::Contract("nodes must be strictly increasing".into()));
        }
        Ok(Cpwl1D { nodes, values, left_slope, right_slope })
    }

    /// `t ↦ a t + b`.
    pub fn affine(a: T, b: T) -> Self {
        Cpwl1D { nodes: vec![T::zero()], values: vec![b], left_slope: a.clone(), right_slope: a }
    }

    pub fn constant(c: T) -> Self {
        Self::affine(T::zero(), c)
    }

    /// Piecewise-linear interpolant of the data, extended constantly.
    pub fn interpolant(nodes: Vec<T>, values: Vec<T>) -> Result<Self, NetError> {
        Self::new(nodes, values, T::zero(), T::zero())
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn left_slope(&self) -> &T {
        &self.left_slope
    }

    pub fn right_slope(&self) -> &T {
        &self.right_slope
    }

    /// Slope of segment `i` (between nodes `i` and `i+1`).
    fn seg_slope(&self, i: usize) -> T {
        (self.values[i + 1].clone() - self.values[i].clone())
            / (self.nodes[i + 1].clone() - self.nodes[i].clone())
    }

    /// Slopes of all pieces from left to right: `len = nodes + 1`.
    pub fn slopes(&self) -> Vec<T> {
        let mut s = Vec::with_capacity(self.nodes.len() + 1);
        s.push(self.left_slope.clone());
        for i in 0..self.nodes.len() - 1 {
            s.push(self.seg_slope(i));
        }
        s.push(self.right_slope.clone());
        s
    }

    pub fn eval(&self, t: &T) -> T {
        let n = self.nodes.len();
        // first node > t
        let k = self.nodes.partition_point(|x| x <= t);
        if k == 0 {
            return self.values[0].clone() + self.left_slope.clone() * (t.clone() - self.nodes[0].clone());
        }
        if k == n {
            return self.values[n - 1].clone()
                + self.right_slope.clone() * (t.clone() - self.nodes[n - 1].clone());
        }
        let i = k - 1;
        if *t == self.nodes[i] {
            return self.values[i].clone();
        }
        self.values[i].clone() + self.seg_slope(i) * (t.clone() - self.nodes[i].clone())
    }

    /// Evaluate at points sorted in increasing order in one pass.
    pub fn eval_sorted(&self, pts: &[T]) -> Vec<T> {
        let n = self.nodes.len();
        let mut out = Vec::with_capacity(pts.len());
        let mut k = 0;
        for t in pts {
            while k < n && self.nodes[k] <= *t {
                k += 1;
            }
            let v = if k == 0 {
                self.values[0].clone() + self.left_slope.clone() * (t.clone() - self.nodes[0].clone())
            } else if k == n {
                self.values[n - 1].clone()
                    + self.right_slope.clone() * (t.clone() - self.nodes[n - 1].clone())
            } else if *t == self.nodes[k - 1] {
                self.values[k - 1].clone()
            } else {
                self.values[k - 1].clone()
                    + self.seg_slope(k - 1) * (t.clone() - self.nodes[k - 1].clone())
            };
            out.push(v);
        }
        out
    }

    /// Pointwise `a f + c`.
    pub fn scale_add(&self, a: &T, c: &T) -> Self {
        Cpwl1D {
            nodes: self.nodes.clone(),
            values: self.values.iter().map(|v| v.clone() * a.clone() + c.clone()).collect(),
            left_slope: self.left_slope.clone() * a.clone(),
            right_slope: self.right_slope.clone() * a.clone(),
        }
    }

    /// Pointwise sum.
    pub fn add(&self, other: &Self) -> Self {
        let mut nodes = Vec::with_capacity(self.nodes.len() + other.nodes.len());
        let (mut i, mut j) = (0, 0);
        while i < self.nodes.len() || j < other.nodes.len() {
            let take = match (self.nodes.get(i), other.nodes.get(j)) {
                (Some(a), Some(b)) if a == b => {
                    i += 1;
                    j += 1;
                    a
                }
                (Some(a), Some(b)) if a < b => {
                    i += 1;
                    a
                }
                (Some(_), Some(b)) => {
                    j += 1;
                    b
                }
                (Some(a), None) => {
                    i += 1;
                    a
                }
                (None, Some(b)) => {
                    j += 1;
                    b
                }
                (None, None) => unreachable!(),
            };
            nodes.push(take.clone());
        }
        let va = self.eval_sorted(&nodes);
        let vb = other.eval_sorted(&nodes);
        Cpwl1D {
            values: va.into_iter().zip(vb).map(|(a, b)| a + b).collect(),
            nodes,
            left_slope: self.left_slope.clone() + other.left_slope.clone(),
            right_slope: self.right_slope.clone() + other.right_slope.clone(),
        }
    }

    /// `Σ w_i f_i + c` over a list of functions.
    pub fn linear_combination(parts: &[(T, &Self)], c: &T) -> Self {
        let mut acc = Cpwl1D::constant(c.clone());
        for (w, f) in parts {
            if !w.is_zero() {
                acc = acc.add(&f.scale_add(w, &T::zero()));
            }
        }
        acc
    }

    /// `max(0, f)`, inserting the zero crossings as new nodes.
    pub fn relu(&self) -> Self {
        let n = self.nodes.len();
        let mut nodes = Vec::with_capacity(n + 2);
        let mut values = Vec::with_capacity(n + 2);
        let zero = T::zero();
        // Zero crossing on the left ray.
        let (x0, v0) = (&self.nodes[0], &self.values[0]);
        if !self.left_slope.is_zero() {
            let root = x0.clone() - v0.clone() / self.left_slope.clone();
            if root < *x0 {
                nodes.push(root);
                values.push(zero.clone());
            }
        }
        for i in 0..n {
            nodes.push(self.nodes[i].clone());
            values.push(self.values[i].relu());
            if i + 1 < n {
                let (a, b) = (&self.values[i], &self.values[i + 1]);
                if (a.signum_i() * b.signum_i()) < 0 {
                    let (xa, xb) = (&self.nodes[i], &self.nodes[i + 1]);
                    let root = xa.clone() - a.clone() * (xb.clone() - xa.clone()) / (b.clone() - a.clone());
                    nodes.push(root);
                    values.push(zero.clone());
                }
            }
        }
        let (xn, vn) = (&self.nodes[n - 1], &self.values[n - 1]);
        if !self.right_slope.is_zero() {
            let root = xn.clone() - vn.clone() / self.right_slope.clone();
            if root > *xn {
                nodes.push(root);
                values.push(zero.clone());
            }
        }
        // Far-field signs decide the ray slopes.
        let left_pos = if self.left_slope.is_zero() { *v0 > zero } else { self.left_slope < zero };
        let right_pos = if self.right_slope.is_zero() { *vn > zero } else { self.right_slope > zero };
        Cpwl1D {
            nodes,
            values,
            left_slope: if left_pos { self.left_slope.clone() } else { zero.clone() },
            right_slope: if right_pos { self.right_slope.clone() } else { zero },
        }
    }

    /// `t ↦ f(a t + c)`.
    pub fn compose_affine(&self, a: &T, c: &T) -> Result<Self, NetError> {
        if a.is_zero() {
            return Ok(Cpwl1D::constant(self.eval(c)));
        }
        let mut pairs: Vec<(T, T)> = self
            .nodes
            .iter()
            .zip(&self.values)
            .map(|(x, v)| ((x.clone() - c.clone()) / a.clone(), v.clone()))
            .collect();
        let (mut ls, mut rs) = (self.left_slope.clone() * a.clone(), self.right_slope.clone() * a.clone());
        if *a < T::zero() {
            pairs.reverse();
            std::mem::swap(&mut ls, &mut rs);
        }
        let (nodes, values) = pairs.into_iter().unzip();
        Cpwl1D::new(nodes, values, ls, rs)
    }

    /// `max(f, g)`.
    pub fn max(&self, g: &Self) -> Self {
        let diff = self.add(&g.scale_add(&-T::one(), &T::zero()));
        g.add(&diff.relu())
    }

    /// `min(f, g)`.
    pub fn min(&self, g: &Self) -> Self {
        let diff = self.add(&g.scale_add(&-T::one(), &T::zero()));
        self.add(&diff.relu().scale_add(&-T::one(), &T::zero()))
    }

    /// Drop nodes where the slope does not change (keeps at least one).
    pub fn simplify(&self) -> Self {
        let s = self.slopes();
        let mut nodes = Vec::new();
        let mut values = Vec::new();
        for i in 0..self.nodes.len() {
            if s[i] != s[i + 1] {
                nodes.push(self.nodes[i].clone());
                values.push(self.values[i].clone());
            }
        }
        if nodes.is_empty() {
            nodes.push(self.nodes[0].clone());
            values.push(self.values[0].clone());
        }
        Cpwl1D { nodes, values, left_slope: self.left_slope.clone(), right_slope: self.right_slope.clone() }
    }

    /// Genuine breakpoints (slope changes), in increasing order.
    pub fn breakpoints(&self) -> Vec<T> {
        let s = self.slopes();
        (0..self.nodes.len()).filter(|&i| s[i] != s[i + 1]).map(|i| self.nodes[i].clone()).collect()
    }

    /// Breakpoints in the open interval `(a, b)`.
    pub fn breakpoints_in(&self, a: &T, b: &T) -> Vec<T> {
        self.breakpoints().into_iter().filter(|x| x > a && x < b).collect()
    }

    /// Nodes in `[a, b]` together with the two endpoints, sorted.
    fn critical_points(&self, a: &T, b: &T) -> Vec<T> {
        let mut pts = vec![a.clone()];
        pts.extend(self.nodes.iter().filter(|x| *x > a && *x < b).cloned());
        if b > a {
            pts.push(b.clone());
        }
        pts
    }

    /// `(min, max)` of `f` on `[a, b]` (attained at nodes or endpoints).
    pub fn range_on(&self, a: &T, b: &T) -> (T, T) {
        let vals = self.eval_sorted(&self.critical_points(a, b));
        let mut lo = vals[0].clone();
        let mut hi = vals[0].clone();
        for v in &vals[1..] {
            if *v < lo {
                lo = v.clone();
            }
            if *v > hi {
                hi = v.clone();
            }
        }
        (lo, hi)
    }

    /// `max |f|` on `[a, b]`.
    pub fn sup_abs_on(&self, a: &T, b: &T) -> T {
        let (lo, hi) = self.range_on(a, b);
        T::max_of(&lo.abs_val(), &hi.abs_val())
    }

    /// `max |f - g|` on `[a, b]`, exact.
    pub fn sup_dist_on(&self, g: &Self, a: &T, b: &T) -> T {
        self.add(&g.scale_add(&-T::one(), &T::zero())).sup_abs_on(a, b)
    }

    /// Largest absolute slope of any piece.
    pub fn lipschitz(&self) -> T {
        self.slopes().iter().fold(T::zero(), |m, s| T::max_of(&m, &s.abs_val()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net_core::{q, qi, Q};

    fn hat() -> Cpwl1D<Q> {
        Cpwl1D::interpolant(vec![qi(0), q(1, 2), qi(1)], vec![qi(0), qi(1), qi(0)]).unwrap()
    }

    #[test]
    fn eval_and_breakpoints() {
        let h = hat();
        assert_eq!(h.eval(&q(1, 4)), q(1, 2));
        assert_eq!(h.eval(&qi(5)), qi(0));
        assert_eq!(h.breakpoints().len(), 3);
        let pts: Vec<Q> = (-4..=8).map(|k| q(k, 4)).collect();
        let fast = h.eval_sorted(&pts);
        for (p, v) in pts.iter().zip(fast) {
            assert_eq!(h.eval(p), v);
        }
    }

    #[test]
    fn relu_inserts_crossings_on_rays() {
        let f = Cpwl1D::affine(qi(2), qi(-1)); // 2t - 1
        let r = f.relu();
        assert_eq!(r.breakpoints(), vec![q(1, 2)]);
        assert_eq!(r.eval(&qi(-3)), qi(0));
        assert_eq!(r.eval(&qi(3)), qi(5));
        let g = Cpwl1D::affine(qi(-1), qi(0)).relu();
        assert_eq!(g.eval(&qi(-2)), qi(2));
        assert_eq!(g.eval(&qi(2)), qi(0));
    }

    #[test]
    fn min_max_and_compose() {
        let h = hat();
        let c = Cpwl1D::constant(q(1, 2));
        let m = h.min(&c);
        assert_eq!(m.eval(&q(1, 2)), q(1, 2));
        assert_eq!(m.eval(&q(1, 8)), q(1, 4));
        let mx = h.max(&c);
        assert_eq!(mx.eval(&qi(7)), q(1, 2));
        let h2 = h.compose_affine(&qi(-2), &qi(1)).unwrap(); // h(1 - 2t)
        for k in -4..=4 {
            let t = q(k, 8);
            assert_eq!(h2.eval(&t), h.eval(&(qi(1) - qi(2) * t.clone())));
        }
        assert_eq!(h.sup_abs_on(&qi(0), &q(1, 4)), q(1, 2));
        assert_eq!(h.lipschitz(), qi(2));
    }
}
