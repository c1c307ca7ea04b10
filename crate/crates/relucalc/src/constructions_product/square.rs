//! Squares, products and monomials on the unit cube.
//!
//! The square is emulated by `S_n(t) = t - Σ_{k=1}^n 4^{-k} H^{∘k}(t)`: two
//! compute channels produce the sawtooth `H^{∘k}` layer by layer and a
//! collation channel accumulates the partial sums.  Products use the
//! polarization identity `xy = 2 S((x+y)/2) - (S(x) + S(y))/2` with `S_n`
//! in place of `S`, and longer products are chained:
//! `Π_n^{k+1}(x_1, …, x_{k+1}) = Π_n(x_{k+1}, Π_n^k(x_1, …, x_k))`.

use serde::{Deserialize, Serialize};

use crate::net_calculus::{precompose_affine, AffineMap};
use crate::net_core::{
    special_to_relu, Affine, BoxDomain, ChannelRole, Layer, NetError, ReluNet, Scalar, SpecialBuilder,
};

/// Multi-index `ν ∈ N^d` of the monomial `x^ν = Π_i x_i^{ν_i}`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn new(nu: Vec<u32>) -> Result<Self, NetError> {
        if nu.is_empty() {
            return Err(NetError::Shape("a multi-index needs at least one coordinate".into()));
        }
        Ok(MultiIndex(nu))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// `|ν| = Σ ν_i`.
    pub fn degree(&self) -> usize {
        self.0.iter().map(|&v| v as usize).sum()
    }

    /// Exact `x^ν`.
    pub fn eval<T: Scalar>(&self, x: &[T]) -> T {
        self.0.iter().zip(x).fold(T::one(), |acc, (&k, v)| (0..k).fold(acc, |a, _| a * v.clone()))
    }
}

/// Channel indices of one squaring block.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SqChannels {
    pub a: usize,
    pub b: usize,
    pub coll: usize,
}

fn carried<T: Scalar>(bld: &SpecialBuilder<T>, carry: &[usize]) -> Vec<Affine<T>> {
    let mut r = bld.blank();
    if bld.depth() > 0 {
        for &c in carry {
            r[c] = Affine::var(c);
        }
    }
    r
}

/// Push the `n` layers adding `coeff · S_n(u)` to the collation channel.
///
/// `u` (an expression over the previous layer, with values in `[0,1]`)
/// enters at the first layer together with `coll_base`, the value the
/// collation channel starts from.  `carry` lists channels forwarded
/// unchanged; `overrides` replace rows of the first layer.  Returns the
/// tail `-coeff·4^{-n} H^{∘n}(u)` over the last layer, still to be added.
pub(crate) fn push_square_block<T: Scalar>(
    bld: &mut SpecialBuilder<T>,
    u: &Affine<T>,
    coeff: &T,
    ch: SqChannels,
    n: usize,
    coll_base: Affine<T>,
    carry: &[usize],
    overrides: Vec<(usize, Affine<T>)>,
) -> Result<Affine<T>, NetError> {
    let half = T::from_ratio(1, 2);
    let quarter = T::from_ratio(1, 4);
    let hat = || Affine::term(ch.a, T::from_ratio(2, 1)).plus(&Affine::term(ch.b, T::from_ratio(-4, 1)));
    let mut r = carried(bld, carry);
    r[ch.a] = u.clone();
    r[ch.b] = u.add_const(&-half.clone());
    r[ch.coll] = coll_base.plus(&u.scale(coeff));
    for (c, e) in overrides {
        r[c] = e;
    }
    bld.push(r)?;
    let mut w = coeff.clone();
    for _ in 2..=n {
        w = w * quarter.clone();
        let h = hat();
        let mut r = carried(bld, carry);
        r[ch.a] = h.clone();
        r[ch.b] = h.add_const(&-half.clone());
        r[ch.coll] = Affine::var(ch.coll).minus(&h.scale(&w));
        bld.push(r)?;
    }
    Ok(hat().scale(&-(w * quarter)))
}

/// `S_n ∈ Υ^{4,n}`: channels `t`, two sawtooth channels, one collation.
/// `t² ≤ S_n(t) ≤ t` and `|S_n(t) - t²| ≤ 4^{-n}/3` on `[0, 1]`.
pub fn square_net<T: Scalar>(n: usize) -> Result<ReluNet<T>, NetError> {
    if n == 0 {
        return Err(NetError::Contract("n must be at least 1".into()));
    }
    let roles = vec![ChannelRole::source(0), ChannelRole::compute(), ChannelRole::compute(), ChannelRole::collation()];
    let ch = SqChannels { a: 1, b: 2, coll: 3 };
    let mut bld = SpecialBuilder::new(1, roles);
    let u = bld.src(0);
    let tail = push_square_block(&mut bld, &u, &T::one(), ch, n, Affine::zero(), &[], Vec::new())?;
    let out = Affine::var(ch.coll).plus(&tail);
    special_to_relu(&bld.finish(vec![out], None)?, &BoxDomain::unit(1))
}

/// Reference value of `S_n(t)` through its series.
pub fn square_series<T: Scalar>(n: usize, t: &T) -> T {
    let hat = |x: &T| {
        let two = T::from_ratio(2, 1);
        two.clone() * x.relu() - two.clone() * two * (x.clone() - T::from_ratio(1, 2)).relu()
    };
    let mut h = t.clone();
    let mut w = T::one();
    let mut s = t.clone();
    for _ in 0..n {
        h = hat(&h);
        w = w * T::from_ratio(1, 4);
        s = s - w.clone() * h.clone();
    }
    s
}

/// Where the second factor of the current stage lives.
#[derive(Clone)]
enum Operand<T> {
    /// A source coordinate.
    Src(usize),
    /// The holder channel; `fresh` is set when the holder is being written
    /// in the layer about to be pushed (readers then use the expression).
    Holder { ch: usize, fresh: Option<Affine<T>> },
}

/// Layout of a product chain inside a larger special network.
pub(crate) struct ChainLayout<'a> {
    pub sq: SqChannels,
    /// Channel holding the running product between stages (needed for
    /// three or more factors).
    pub holder: Option<usize>,
    /// Load the first factor into the holder at the first layer instead of
    /// reading it from its source channel.
    pub holder_from_input: bool,
    /// Further channels to forward unchanged.
    pub carry: &'a [usize],
}

/// Push the `3(m-1)n` layers of `Π_n^m(x_{f_1}, …, x_{f_m})` and return its
/// value as an expression over the last layer.  `first` overrides rows of
/// the first pushed layer.
pub(crate) fn push_chain<T: Scalar>(
    bld: &mut SpecialBuilder<T>,
    factors: &[usize],
    n: usize,
    lay: &ChainLayout<'_>,
    first: Vec<(usize, Affine<T>)>,
) -> Result<Affine<T>, NetError> {
    let m = factors.len();
    if m < 2 {
        return Err(NetError::Contract("a product chain needs at least two factors".into()));
    }
    if m > 2 && lay.holder.is_none() {
        return Err(NetError::Contract("three or more factors need a holder channel".into()));
    }
    let half = T::from_ratio(1, 2);
    let mut carry: Vec<usize> = lay.carry.to_vec();
    if let Some(h) = lay.holder {
        carry.push(h);
    }
    let mut first = Some(first);
    let mut p = match (lay.holder, lay.holder_from_input) {
        (Some(h), true) => Operand::Holder { ch: h, fresh: Some(bld.src(factors[0])) },
        _ => Operand::Src(factors[0]),
    };
    let mut tail = Affine::zero();
    for (s, &x) in factors.iter().enumerate().skip(1) {
        if s >= 2 {
            let h = lay.holder.expect("checked above");
            p = Operand::Holder { ch: h, fresh: Some(Affine::var(lay.sq.coll).plus(&tail)) };
            tail = Affine::zero();
        }
        for blk in 0..3 {
            let mut overrides = first.take().unwrap_or_default();
            let p_now = match &mut p {
                Operand::Src(i) => bld.src(*i),
                Operand::Holder { ch, fresh } => match fresh.take() {
                    Some(e) => {
                        overrides.push((*ch, e.clone()));
                        e
                    }
                    None => Affine::var(*ch),
                },
            };
            let x_now = bld.src(x);
            let (u, coeff, base) = match blk {
                0 => (x_now.plus(&p_now).scale(&half), T::from_ratio(2, 1), Affine::zero()),
                1 => (x_now, -half.clone(), Affine::var(lay.sq.coll).plus(&tail)),
                _ => (p_now, -half.clone(), Affine::var(lay.sq.coll).plus(&tail)),
            };
            tail = push_square_block(bld, &u, &coeff, lay.sq, n, base, &carry, overrides)?;
        }
    }
    Ok(Affine::var(lay.sq.coll).plus(&tail))
}

/// `x_i` on `[0,1]^d` as a one-neuron network (exact for `x_i ≥ 0`).
fn coordinate_net<T: Scalar>(d: usize, i: usize) -> Result<ReluNet<T>, NetError> {
    let mut w = vec![T::zero(); d];
    w[i] = T::one();
    ReluNet::new(d, 1, vec![Layer { w: vec![w], b: vec![T::zero()] }, Layer { w: vec![vec![T::one()]], b: vec![T::zero()] }])
}

/// Network `S_ν` for the monomial `x^ν` on `[0,1]^d`, `|ν| = m`:
/// `Π_n^m` applied to the factors with repetition, depth `3(m-1)n`.
///
/// Channels: one source per variable that is read after the first stage,
/// a holder for the running product (when `m ≥ 3`), two sawtooth channels
/// and a collation channel.  Starting the chain with a variable of
/// exponent one lets its channel double as the holder, which gives width at
/// most `d + 3`; only when every variable has exponent at least two and
/// `m ≥ 3` is the width `d + 4`.  `m = 0` and `m = 1` give exact networks.
pub fn monomial_net<T: Scalar>(nu: &MultiIndex, n: usize) -> Result<ReluNet<T>, NetError> {
    if n == 0 {
        return Err(NetError::Contract("n must be at least 1".into()));
    }
    let d = nu.dim();
    let m = nu.degree();
    if m == 0 {
        return Ok(ReluNet::constant(d, T::one()));
    }
    if m == 1 {
        let i = nu.0.iter().position(|&v| v == 1).expect("degree one");
        return coordinate_net(d, i);
    }
    let lead = nu.0.iter().position(|&v| v == 1).or_else(|| nu.0.iter().position(|&v| v > 0)).expect("degree ≥ 2");
    let mut factors = vec![lead];
    for (i, &v) in nu.0.iter().enumerate() {
        let extra = if i == lead { v - 1 } else { v };
        factors.extend(std::iter::repeat_n(i, extra as usize));
    }
    let need_holder = m >= 3;
    let holder_from_input = need_holder && nu.0[lead] == 1;
    let mut sources: Vec<usize> = factors[1..].to_vec();
    if !holder_from_input {
        sources.push(lead);
    }
    sources.sort_unstable();
    sources.dedup();
    let mut roles = Vec::new();
    if need_holder {
        roles.push(ChannelRole::compute());
    }
    roles.extend(sources.iter().map(|&i| ChannelRole::source(i)));
    let base = roles.len();
    roles.extend([ChannelRole::compute(), ChannelRole::compute(), ChannelRole::collation()]);
    let lay = ChainLayout {
        sq: SqChannels { a: base, b: base + 1, coll: base + 2 },
        holder: need_holder.then_some(0),
        holder_from_input,
        carry: &[],
    };
    let mut bld = SpecialBuilder::new(d, roles);
    let out = push_chain(&mut bld, &factors, n, &lay, Vec::new())?;
    special_to_relu(&bld.finish(vec![out], None)?, &BoxDomain::unit(d))
}

/// `Π_n^k ∈ Υ^{k+3, 3(k-1)n}` on `[0,1]^k`, error at most
/// `C_k 4^{-n}` with `C_k = Σ_{j=0}^{k-2} (1 + 2^{1-n})^j ≤ e k` for
/// `n ≥ 1 + log₂ k`.
pub fn kproduct_net<T: Scalar>(k: usize, n: usize) -> Result<ReluNet<T>, NetError> {
    if k < 2 {
        return Err(NetError::Contract(format!("a product needs k ≥ 2 factors, got {k}")));
    }
    monomial_net(&MultiIndex(vec![1; k]), n)
}

/// `Π_n = Π_n^2 ∈ Υ^{5,3n}`: `0 ≤ Π_n ≤ 1` and `|Π_n - xy| ≤ 4^{-n}` on
/// `[0,1]²`.
pub fn product_net<T: Scalar>(n: usize) -> Result<ReluNet<T>, NetError> {
    kproduct_net(2, n)
}

/// `a^k Π_n^k(x/a)` for products on `[0, a]^k`; error at most
/// `C_k a^k 4^{-n}`, same architecture as [`kproduct_net`].
pub fn kproduct_scaled<T: Scalar>(k: usize, n: usize, a: &T) -> Result<ReluNet<T>, NetError> {
    if *a <= T::zero() {
        return Err(NetError::Contract("the scale must be positive".into()));
    }
    let net = kproduct_net(k, n)?;
    let inv = T::one() / a.clone();
    let scaled = precompose_affine(&net, &AffineMap::scalar(k, inv, vec![T::zero(); k]))?;
    let ak = (0..k).fold(T::one(), |s, _| s * a.clone());
    Ok(scaled.affine_output(&ak, &T::zero()))
}

/// The constant `C_k = Σ_{j=0}^{k-2} α_n^j`, `α_n = 1 + 2^{1-n}`.
pub fn product_constant(k: usize, n: usize) -> f64 {
    let alpha = 1.0 + 2f64.powi(1 - n as i32);
    (0..k.saturating_sub(1)).map(|j| alpha.powi(j as i32)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net_core::{q, qi, Q};

    #[test]
    fn square_contract_and_values() {
        for n in 1..=4 {
            let s = square_net::<Q>(n).unwrap();
            assert_eq!((s.width(), s.depth()), (4, n));
            for k in 0..=64 {
                let t = q(k, 64);
                let v = s.eval1(std::slice::from_ref(&t)).unwrap();
                assert_eq!(v, square_series(n, &t));
                assert!(v >= &t * &t && v <= t);
            }
        }
        assert_eq!(square_net::<Q>(2).unwrap().eval1(&[q(1, 2)]).unwrap(), q(1, 4));
        assert_eq!(square_net::<Q>(5).unwrap().eval1(&[qi(1)]).unwrap(), qi(1));
    }

    #[test]
    fn product_contract_and_corners() {
        let p = product_net::<Q>(3).unwrap();
        assert_eq!((p.width(), p.depth()), (5, 9));
        assert_eq!(p.eval1(&[qi(0), qi(0)]).unwrap(), qi(0));
        assert_eq!(p.eval1(&[qi(1), qi(1)]).unwrap(), qi(1));
        for i in 0..=10 {
            for j in 0..=10 {
                let (x, y) = (q(i, 10), q(j, 10));
                let v = p.eval1(&[x.clone(), y.clone()]).unwrap();
                let want = q(2, 1) * square_series(3, &((&x + &y) / qi(2)))
                    - (square_series(3, &x) + square_series(3, &y)) / qi(2);
                assert_eq!(v, want);
            }
        }
    }

    #[test]
    fn kproduct_contract_and_chain() {
        let k3 = kproduct_net::<Q>(3, 2).unwrap();
        assert_eq!((k3.width(), k3.depth()), (6, 12));
        let p = product_net::<Q>(2).unwrap();
        let x = [q(1, 3), q(3, 4), q(2, 5)];
        let inner = p.eval1(&[x[0].clone(), x[1].clone()]).unwrap();
        assert_eq!(k3.eval1(&x).unwrap(), p.eval1(&[x[2].clone(), inner]).unwrap());
        assert_eq!(k3.eval1(&[qi(1), qi(1), qi(1)]).unwrap(), qi(1));
    }

    #[test]
    fn monomial_widths() {
        let cube = MultiIndex(vec![3]);
        let s = monomial_net::<Q>(&cube, 3).unwrap();
        assert_eq!((s.width(), s.depth()), (5, 18));
        let mixed = MultiIndex(vec![1, 2, 0]);
        assert_eq!(monomial_net::<Q>(&mixed, 2).unwrap().width(), 5);
        assert_eq!(monomial_net::<Q>(&MultiIndex(vec![2, 2]), 2).unwrap().width(), 6);
        let lin = monomial_net::<Q>(&MultiIndex(vec![0, 1]), 2).unwrap();
        assert_eq!(lin.eval1(&[q(1, 3), q(2, 7)]).unwrap(), q(2, 7));
    }

    #[test]
    fn scaled_product_corner() {
        let p = kproduct_scaled::<Q>(3, 3, &qi(2)).unwrap();
        assert_eq!(p.eval1(&[qi(2), qi(2), qi(2)]).unwrap(), qi(8));
    }
}
