//! Exact evaluation of univariate networks at many sorted sample points.
//!
//! Every node is tracked as a list of affine pieces over runs of consecutive
//! sample indices.  A ReLU splits a run at most once (the piece is monotone),
//! so the number of pieces never exceeds the number of samples, no matter
//! how many breakpoints the network creates between them.  This keeps exact
//! evaluation cheap for networks whose full piecewise-linear form is huge
//! (steep ramps create many pieces that contain no sample).

use crate::net_core::{NetError, ReluNet, Scalar, SpecialNet};

/// Piecewise-affine function restricted to a sorted sample set: piece `k`
/// covers sample indices `[ends[k-1], ends[k])` and equals `a_k t + b_k`.
#[derive(Debug, Clone)]
struct Runs<T> {
    ends: Vec<usize>,
    a: Vec<T>,
    b: Vec<T>,
}

impl<T: Scalar> Runs<T> {
    fn affine(len: usize, a: T, b: T) -> Self {
        Runs { ends: vec![len], a: vec![a], b: vec![b] }
    }

    fn combine(parts: &[(T, &Runs<T>)], c: &T, len: usize) -> Self {
        let mut cursor = vec![0usize; parts.len()];
        let mut out = Runs { ends: Vec::new(), a: Vec::new(), b: Vec::new() };
        let mut start = 0;
        while start < len {
            let mut end = len;
            let mut a = T::zero();
            let mut b = c.clone();
            for ((w, r), k) in parts.iter().zip(cursor.iter_mut()) {
                while r.ends[*k] <= start {
                    *k += 1;
                }
                end = end.min(r.ends[*k]);
                a = a + w.clone() * r.a[*k].clone();
                b = b + w.clone() * r.b[*k].clone();
            }
            out.push(end, a, b);
            start = end;
        }
        out
    }

    fn push(&mut self, end: usize, a: T, b: T) {
        if let (Some(pa), Some(pb)) = (self.a.last(), self.b.last()) {
            if *pa == a && *pb == b {
                *self.ends.last_mut().unwrap() = end;
                return;
            }
        }
        self.ends.push(end);
        self.a.push(a);
        self.b.push(b);
    }

    fn relu(&self, pts: &[T]) -> Self {
        let mut out = Runs { ends: Vec::new(), a: Vec::new(), b: Vec::new() };
        let mut start = 0;
        for k in 0..self.ends.len() {
            let end = self.ends[k];
            let (a, b) = (&self.a[k], &self.b[k]);
            let slice = &pts[start..end];
            // First index (relative) where the affine piece is positive / nonpositive.
            let split = if a.is_zero() {
                None
            } else {
                let root = -b.clone() / a.clone();
                if *a > T::zero() {
                    Some((slice.partition_point(|t| *t <= root), false))
                } else {
                    Some((slice.partition_point(|t| *t < root), true))
                }
            };
            match split {
                None => {
                    if *b > T::zero() {
                        out.push(end, a.clone(), b.clone());
                    } else {
                        out.push(end, T::zero(), T::zero());
                    }
                }
                Some((i, positive_first)) => {
                    let mid = start + i;
                    let (first, second) = if positive_first {
                        ((a.clone(), b.clone()), (T::zero(), T::zero()))
                    } else {
                        ((T::zero(), T::zero()), (a.clone(), b.clone()))
                    };
                    if mid > start {
                        out.push(mid, first.0, first.1);
                    }
                    if end > mid {
                        out.push(end, second.0, second.1);
                    }
                }
            }
            start = end;
        }
        out
    }

    fn values(&self, pts: &[T]) -> Vec<T> {
        let mut out = Vec::with_capacity(pts.len());
        let mut start = 0;
        for k in 0..self.ends.len() {
            for t in &pts[start..self.ends[k]] {
                out.push(self.a[k].clone() * t.clone() + self.b[k].clone());
            }
            start = self.ends[k];
        }
        out
    }
}

fn eval_runs<T: Scalar>(net: &ReluNet<T>, relu_free: Option<&[bool]>, pts: &[T]) -> Result<Vec<Vec<T>>, NetError> {
    if net.input_dim() != 1 {
        return Err(NetError::Shape("sampled exact evaluation needs d = 1".into()));
    }
    if pts.windows(2).any(|w| w[0] > w[1]) {
        return Err(NetError::Contract("sample points must be sorted".into()));
    }
    let len = pts.len();
    if len == 0 {
        return Ok(vec![Vec::new(); net.output_dim()]);
    }
    let mut v = vec![Runs::affine(len, T::one(), T::zero())];
    let last = net.layers().len() - 1;
    for (li, layer) in net.layers().iter().enumerate() {
        let z: Vec<Runs<T>> = layer
            .w
            .iter()
            .zip(&layer.b)
            .map(|(row, b)| {
                let parts: Vec<(T, &Runs<T>)> =
                    row.iter().zip(&v).filter(|(w, _)| !w.is_zero()).map(|(w, r)| (w.clone(), r)).collect();
                Runs::combine(&parts, b, len)
            })
            .collect();
        if li == last {
            return Ok(z.iter().map(|r| r.values(pts)).collect());
        }
        v = z
            .into_iter()
            .enumerate()
            .map(|(i, r)| {
                if relu_free.is_some_and(|m| m.get(i).copied().unwrap_or(false)) {
                    r
                } else {
                    r.relu(pts)
                }
            })
            .collect();
    }
    unreachable!("a network has an output layer")
}

/// Exact outputs of a univariate network at sorted sample points
/// (one vector per output coordinate).
pub fn eval_sorted<T: Scalar>(net: &ReluNet<T>, pts: &[T]) -> Result<Vec<Vec<T>>, NetError> {
    eval_runs(net, None, pts)
}

/// [`eval_sorted`] for the first output of a univariate network.
pub fn eval_sorted1<T: Scalar>(net: &ReluNet<T>, pts: &[T]) -> Result<Vec<T>, NetError> {
    Ok(eval_runs(net, None, pts)?.swap_remove(0))
}

/// [`eval_sorted`] for a special network (ReLU-free nodes stay affine).
pub fn special_eval_sorted<T: Scalar>(snet: &SpecialNet<T>, pts: &[T]) -> Result<Vec<Vec<T>>, NetError> {
    let mask = snet.relu_free_mask();
    eval_runs(snet.net(), Some(&mask), pts)
}
