//! Polynomials on the unit cube as sums of monomial networks stacked in
//! depth.

use super::square::{monomial_net, push_chain, ChainLayout, MultiIndex, SqChannels};
use crate::net_core::{special_to_relu, Affine, BoxDomain, ChannelRole, NetError, ReluNet, Scalar, SpecialBuilder};

/// Smallest `n` with `2^{n-1} ≥ m`, i.e. `n ≥ 1 + log₂ m`.
pub fn min_accuracy_level(m: usize) -> usize {
    let mut n = 1;
    while (1usize << (n - 1)) < m {
        n += 1;
    }
    n
}

/// Network for `P(x) = Σ_ν c_ν x^ν` on `[0,1]^d` with error at most
/// `e m 4^{-n} Σ |c_ν|`, `m` the largest degree.
///
/// A single term is the scaled monomial network.  Otherwise the monomial
/// chains run one after another: `d` source channels, a holder (only when
/// some degree is at least three), two sawtooth channels, the chain's
/// collation channel and an outer collation channel for the sum.  Width
/// `d + 4` (`d + 5` with a holder), depth `3n Σ_ν (|ν| - 1)_+`.
pub fn polynomial_net<T: Scalar>(terms: &[(MultiIndex, T)], n: usize) -> Result<ReluNet<T>, NetError> {
    let d = terms.first().ok_or_else(|| NetError::Contract("a polynomial needs at least one term".into()))?.0.dim();
    if terms.iter().any(|(nu, _)| nu.dim() != d) {
        return Err(NetError::Shape("all multi-indices need the same dimension".into()));
    }
    let m = terms.iter().map(|(nu, _)| nu.degree()).max().unwrap_or(0);
    if m >= 2 && n < min_accuracy_level(m) {
        return Err(NetError::Contract(format!(
            "n = {n} is too small for degree {m}: need n ≥ {}",
            min_accuracy_level(m)
        )));
    }
    if let [(nu, c)] = terms {
        return Ok(monomial_net(nu, n)?.affine_output(c, &T::zero()));
    }
    let need_holder = m >= 3;
    let mut roles: Vec<ChannelRole> = (0..d).map(ChannelRole::source).collect();
    let holder = need_holder.then(|| {
        roles.push(ChannelRole::compute());
        roles.len() - 1
    });
    let base = roles.len();
    roles.extend([ChannelRole::compute(), ChannelRole::compute(), ChannelRole::collation(), ChannelRole::collation()]);
    let outer = base + 3;
    let lay = ChainLayout {
        sq: SqChannels { a: base, b: base + 1, coll: base + 2 },
        holder,
        holder_from_input: false,
        carry: &[outer],
    };
    let mut bld = SpecialBuilder::new(d, roles);
    let mut pending = Affine::zero();
    for (nu, c) in terms {
        match nu.degree() {
            0 => pending = pending.add_const(c),
            1 => {
                let i = nu.0.iter().position(|&v| v == 1).expect("degree one");
                pending = pending.plus(&bld.src(i).scale(c));
            }
            _ => {
                let factors: Vec<usize> =
                    nu.0.iter().enumerate().flat_map(|(i, &v)| std::iter::repeat_n(i, v as usize)).collect();
                let start = outer_row(&bld, outer, &mut pending);
                let value = push_chain(&mut bld, &factors, n, &lay, vec![(outer, start)])?;
                pending = value.scale(c);
            }
        }
    }
    if bld.depth() == 0 {
        let mut r = bld.blank();
        r[outer] = outer_row(&bld, outer, &mut pending);
        bld.push(r)?;
    }
    let out = Affine::var(outer).plus(&pending);
    special_to_relu(&bld.finish(vec![out], None)?, &BoxDomain::unit(d))
}

fn outer_row<T: Scalar>(bld: &SpecialBuilder<T>, outer: usize, pending: &mut Affine<T>) -> Affine<T> {
    let base = if bld.depth() == 0 { Affine::zero() } else { Affine::var(outer) };
    base.plus(&std::mem::replace(pending, Affine::zero()))
}

/// Exact value of `Σ_ν c_ν x^ν`.
pub fn polynomial_eval<T: Scalar>(terms: &[(MultiIndex, T)], x: &[T]) -> T {
    terms.iter().fold(T::zero(), |s, (nu, c)| s + c.clone() * nu.eval(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net_core::{q, qi, Q};

    #[test]
    fn accuracy_levels() {
        assert_eq!([1, 2, 3, 4, 5, 8, 9].map(min_accuracy_level), [1, 2, 3, 3, 4, 4, 5]);
    }

    #[test]
    fn constant_and_affine_polynomials_are_exact() {
        let c = polynomial_net(&[(MultiIndex(vec![0, 0]), q(7, 3))], 1).unwrap();
        assert_eq!(c.eval1(&[q(1, 5), q(4, 5)]).unwrap(), q(7, 3));
        let terms = vec![(MultiIndex(vec![0, 0]), qi(1)), (MultiIndex(vec![0, 1]), qi(-2))];
        let p = polynomial_net(&terms, 1).unwrap();
        assert_eq!(p.eval1(&[q(1, 5), q(4, 5)]).unwrap(), q(-3, 5));
    }

    #[test]
    fn sum_of_chains_matches_separate_monomials() {
        let terms = vec![
            (MultiIndex(vec![1, 1]), qi(1)),
            (MultiIndex(vec![0, 0]), qi(1)),
            (MultiIndex(vec![3, 0]), q(-1, 2)),
            (MultiIndex(vec![1, 0]), q(1, 4)),
        ];
        let n = 3;
        let p = polynomial_net(&terms, n).unwrap();
        assert_eq!(p.width(), 2 + 5);
        assert_eq!(p.depth(), 3 * n * (1 + 2));
        let m11 = monomial_net::<Q>(&terms[0].0, n).unwrap();
        let m30 = monomial_net::<Q>(&terms[2].0, n).unwrap();
        for i in 0..=6 {
            for j in 0..=6 {
                let x = [q(i, 6), q(j, 6)];
                let want = m11.eval1(&x).unwrap() + qi(1) - m30.eval1(&x).unwrap() / qi(2) + &x[0] / qi(4);
                assert_eq!(p.eval1(&x).unwrap(), want);
            }
        }
    }

    #[test]
    fn rejects_low_accuracy_level() {
        assert!(polynomial_net(&[(MultiIndex(vec![5]), qi(1))], 3).is_err());
    }
}
