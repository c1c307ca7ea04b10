//! Exact feasibility of small systems of strict linear inequalities and
//! linear equations, by Fourier–Motzkin elimination.
//!
//! Constraints are written `a·x + c > 0` (strict) and `a·x + c = 0`.  The
//! solver returns a witness point when the system is feasible.  The cost is
//! exponential in the dimension, which is fine for the `d ≤ 3`, `≤ 8`
//! constraint instances this crate needs; arithmetic is exact over `Q`.

use num::{One, Zero};
use crate::net_core::{Scalar, Q};

/// `a·x + c` (compared against zero).
#[derive(Debug, Clone, PartialEq)]
pub struct LinearForm {
    pub a: Vec<Q>,
    pub c: Q,
}

impl LinearForm {
    pub fn new(a: Vec<Q>, c: Q) -> Self {
        LinearForm { a, c }
    }

    pub fn eval(&self, x: &[Q]) -> Q {
        self.a.iter().zip(x).fold(self.c.clone(), |s, (a, v)| s + a * v)
    }

    pub fn negated(&self) -> Self {
        LinearForm { a: self.a.iter().map(|v| -v).collect(), c: -&self.c }
    }

    /// Scale so the first nonzero entry of `(a, c)` has absolute value one,
    /// keeping the sign (the inequality is unchanged).
    fn normalized(&self) -> Self {
        let lead = self.a.iter().chain(std::iter::once(&self.c)).find(|v| !v.is_zero()).map(|v| v.abs_val());
        match lead {
            Some(l) => LinearForm { a: self.a.iter().map(|v| v / &l).collect(), c: &self.c / &l },
            None => self.clone(),
        }
    }

    /// Substitute `x_k = e(x without k)` where `e` is given over the
    /// remaining `d-1` coordinates.
    fn substitute(&self, k: usize, e: &LinearForm) -> LinearForm {
        let coef = self.a[k].clone();
        let mut a: Vec<Q> = self.a.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, v)| v.clone()).collect();
        for (ai, ei) in a.iter_mut().zip(&e.a) {
            *ai = ai.clone() + &coef * ei;
        }
        LinearForm { a, c: &self.c + &coef * &e.c }
    }
}

/// A point with `f(x) > 0` for every `f` in `strict` and `g(x) = 0` for
/// every `g` in `equal`, or `None` if there is none.  All forms must have
/// the same dimension `d`.
pub fn feasible_point(d: usize, strict: &[LinearForm], equal: &[LinearForm]) -> Option<Vec<Q>> {
    debug_assert!(strict.iter().chain(equal).all(|f| f.a.len() == d));
    if let Some((first, rest)) = equal.split_first() {
        let Some(k) = first.a.iter().position(|v| !v.is_zero()) else {
            // 0 = c: either vacuous or contradictory.
            return if first.c.is_zero() { feasible_point(d, strict, rest) } else { None };
        };
        // x_k = -(c + Σ_{i≠k} a_i x_i) / a_k
        let ak = first.a[k].clone();
        let e = LinearForm {
            a: first.a.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, v)| -v / &ak).collect(),
            c: -&first.c / &ak,
        };
        let strict2: Vec<LinearForm> = strict.iter().map(|f| f.substitute(k, &e)).collect();
        let equal2: Vec<LinearForm> = rest.iter().map(|f| f.substitute(k, &e)).collect();
        let y = feasible_point(d - 1, &strict2, &equal2)?;
        let xk = e.eval(&y);
        let mut x = y;
        x.insert(k, xk);
        return Some(x);
    }
    strict_point(d, strict)
}

fn strict_point(d: usize, strict: &[LinearForm]) -> Option<Vec<Q>> {
    if d == 0 {
        return strict.iter().all(|f| f.c > Q::zero()).then(Vec::new);
    }
    let last = d - 1;
    let (mut lower, mut upper, mut rest) = (Vec::new(), Vec::new(), Vec::new());
    for f in strict {
        let f = f.normalized();
        let coef = f.a[last].clone();
        if coef.is_zero() {
            rest.push(drop_last(&f));
        } else if coef > Q::zero() {
            lower.push(f);
        } else {
            upper.push(f);
        }
    }
    // x_last > -(c_p + a_p'·x') / a_p  and  x_last < (c_n + a_n'·x') / |a_n|.
    for p in &lower {
        for n in &upper {
            let (ap, an) = (p.a[last].clone(), -n.a[last].clone());
            let a = p.a[..last].iter().zip(&n.a[..last]).map(|(u, v)| u / &ap + v / &an).collect();
            rest.push(LinearForm { a, c: &p.c / &ap + &n.c / &an }.normalized());
        }
    }
    rest.sort_by(|u, v| u.a.partial_cmp(&v.a).unwrap().then(u.c.partial_cmp(&v.c).unwrap()));
    rest.dedup();
    let mut x = strict_point(last, &rest)?;
    let bound = |f: &LinearForm| -> Q {
        let partial = f.a[..last].iter().zip(&x).fold(f.c.clone(), |s, (a, v)| s + a * v);
        -partial / &f.a[last]
    };
    let lo = lower.iter().map(bound).reduce(|u, v| if v > u { v } else { u });
    let hi = upper.iter().map(bound).reduce(|u, v| if v < u { v } else { u });
    let v = match (lo, hi) {
        (Some(l), Some(h)) => (l + h) / Q::from_i64(2),
        (Some(l), None) => l + Q::one(),
        (None, Some(h)) => h - Q::one(),
        (None, None) => Q::zero(),
    };
    x.push(v);
    Some(x)
}

fn drop_last(f: &LinearForm) -> LinearForm {
    LinearForm { a: f.a[..f.a.len() - 1].to_vec(), c: f.c.clone() }
}
