//! Uniform-norm distance between a network and a reference function.

use rayon::prelude::*;
use serde::Serialize;

use super::cpwl_extract::exact_cpwl_1d;
use crate::constructions_1d::Cpwl1D;
use crate::net_core::{BoxDomain, NetError, ReluNet, Scalar};

/// What a network is compared against.
pub enum Reference<'a, T> {
    Net(&'a ReluNet<T>),
    Cpwl(&'a Cpwl1D<T>),
    /// `c₀ + c₁ t + c₂ t²` (univariate).
    Quadratic([T; 3]),
    /// Any function of the input; only usable in grid mode.
    Oracle(&'a (dyn Fn(&[T]) -> T + Sync)),
}

impl<T: Scalar> Reference<'_, T> {
    fn eval(&self, x: &[T]) -> Result<T, NetError> {
        match self {
            Reference::Net(n) => n.eval1(x),
            Reference::Cpwl(f) => {
                if x.len() != 1 {
                    return Err(NetError::Dimension { expected: 1, got: x.len() });
                }
                Ok(f.eval(&x[0]))
            }
            Reference::Quadratic(c) => {
                if x.len() != 1 {
                    return Err(NetError::Dimension { expected: 1, got: x.len() });
                }
                Ok(quad(c, &x[0]))
            }
            Reference::Oracle(f) => Ok(f(x)),
        }
    }
}

fn quad<T: Scalar>(c: &[T; 3], t: &T) -> T {
    c[0].clone() + (c[1].clone() + c[2].clone() * t.clone()) * t.clone()
}

/// How the supremum is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SupMode {
    /// The true supremum on a bounded interval, through the exact
    /// piecewise-linear form (`d = 1`, non-oracle reference).
    Exact1d,
    /// Maximum over a tensor grid with this many points per axis: a lower
    /// bound on the supremum.
    Grid(usize),
}

/// A computed uniform distance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupError<T> {
    pub value: T,
    /// `true` for the true supremum, `false` for a sampled lower bound.
    pub exact: bool,
}

/// `sup_{x ∈ domain} |N(x) - ref(x)|` for a scalar network `N`.
pub fn sup_error<T: Scalar>(
    net: &ReluNet<T>,
    reference: &Reference<'_, T>,
    domain: &BoxDomain<T>,
    mode: SupMode,
) -> Result<SupError<T>, NetError> {
    if net.output_dim() != 1 {
        return Err(NetError::Shape("sup_error compares scalar networks".into()));
    }
    if domain.dim() != net.input_dim() {
        return Err(NetError::Dimension { expected: net.input_dim(), got: domain.dim() });
    }
    if let Reference::Net(r) = reference {
        if r.input_dim() != net.input_dim() || r.output_dim() != 1 {
            return Err(NetError::Shape("reference network has a different signature".into()));
        }
    }
    match mode {
        SupMode::Exact1d => {
            if net.input_dim() != 1 {
                return Err(NetError::Contract("exact mode needs d = 1".into()));
            }
            let (Some(a), Some(b)) = (domain.lo(0).cloned(), domain.hi(0).cloned()) else {
                return Err(NetError::Unbounded("exact mode needs a bounded interval".into()));
            };
            let f = exact_cpwl_1d(net)?;
            let value = match reference {
                Reference::Net(r) => f.sup_dist_on(&exact_cpwl_1d(r)?, &a, &b),
                Reference::Cpwl(g) => f.sup_dist_on(g, &a, &b),
                Reference::Quadratic(c) => sup_dist_quadratic(&f, c, &a, &b),
                Reference::Oracle(_) => {
                    return Err(NetError::Contract("exact mode needs a piecewise-linear or quadratic reference".into()))
                }
            };
            Ok(SupError { value, exact: true })
        }
        SupMode::Grid(per_axis) => {
            let pts = domain.grid(per_axis)?;
            let errs: Vec<T> = pts
                .par_iter()
                .map(|x| Ok((net.eval1(x)? - reference.eval(x)?).abs_val()))
                .collect::<Result<_, NetError>>()?;
            let value = errs.into_iter().fold(T::zero(), |m, e| T::max_of(&m, &e));
            Ok(SupError { value, exact: false })
        }
    }
}

/// `max_{t ∈ [a,b]} |q(t) - f(t)|` for a piecewise-linear `f` and a
/// quadratic `q`: on each piece `q - (αt + β)` is a quadratic, so it
/// suffices to check the piece ends and its vertex.
pub fn sup_dist_quadratic<T: Scalar>(f: &Cpwl1D<T>, c: &[T; 3], a: &T, b: &T) -> T {
    let mut knots = vec![a.clone()];
    knots.extend(f.breakpoints_in(a, b).into_iter().filter(|t| t > a && t < b));
    knots.push(b.clone());
    let vals = f.eval_sorted(&knots);
    let diff = |t: &T, v: &T| (quad(c, t) - v.clone()).abs_val();
    let mut m = diff(&knots[0], &vals[0]);
    let two = T::from_i64(2);
    for k in 1..knots.len() {
        let (t0, t1) = (&knots[k - 1], &knots[k]);
        m = T::max_of(&m, &diff(t1, &vals[k]));
        if t1 == t0 || c[2].is_zero() {
            continue;
        }
        let alpha = (vals[k].clone() - vals[k - 1].clone()) / (t1.clone() - t0.clone());
        let vertex = (alpha.clone() - c[1].clone()) / (two.clone() * c[2].clone());
        if vertex > *t0 && vertex < *t1 {
            let fv = vals[k - 1].clone() + alpha * (vertex.clone() - t0.clone());
            m = T::max_of(&m, &diff(&vertex, &fv));
        }
    }
    m
}
