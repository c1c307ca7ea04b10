//! Rank-one tensor products `g_1(x_1) ⋯ g_d(x_d)` of univariate networks.

use super::square::{kproduct_net, kproduct_scaled};
use crate::net_calculus::{concatenate_compose, parallel_stack, precompose_affine, AffineMap};
use crate::net_core::{pad_depth, NetError, ReluNet, Scalar};

/// The factors placed side by side on coordinates `x_1, …, x_d`: all are
/// padded to the common depth `L₀` and width `W₀ = max(3, max W_j)`.
fn stacked_factors<T: Scalar>(factors: &[ReluNet<T>]) -> Result<ReluNet<T>, NetError> {
    if factors.iter().any(|g| g.input_dim() != 1 || g.output_dim() != 1) {
        return Err(NetError::Shape("tensor factors must be univariate with one output".into()));
    }
    let d = factors.len();
    let l0 = factors.iter().map(|g| g.depth()).max().unwrap_or(1);
    let w0 = factors.iter().map(|g| g.width()).max().unwrap_or(1).max(3);
    let lifted = factors
        .iter()
        .enumerate()
        .map(|(j, g)| {
            let g = pad_depth(g, l0)?.pad_to_width(w0)?;
            let mut row = vec![T::zero(); d];
            row[j] = T::one();
            precompose_affine(&g, &AffineMap::rect(vec![row], vec![T::zero()])?)
        })
        .collect::<Result<Vec<_>, NetError>>()?;
    parallel_stack(&lifted)
}

/// `Π_n^d(g_1(x_1), …, g_d(x_d)) ∈ Υ^{d W₀, L₀ + 3(d-1)n}` for factors with
/// values in `[0, 1]`; error at most `e d 4^{-n}` against `Π g_j` for
/// `n ≥ 1 + log₂ d`.  For `d = 1` the factor itself.
pub fn tensor_net<T: Scalar>(factors: &[ReluNet<T>], n: usize) -> Result<ReluNet<T>, NetError> {
    match factors {
        [] => Err(NetError::Contract("need at least one factor".into())),
        [g] => Ok(g.clone()),
        _ => concatenate_compose(&kproduct_net(factors.len(), n)?, &stacked_factors(factors)?),
    }
}

/// [`tensor_net`] for factors with values in `[0, a]`, using the rescaled
/// product; the error bound grows by `a^d`.
pub fn tensor_net_scaled<T: Scalar>(factors: &[ReluNet<T>], n: usize, a: &T) -> Result<ReluNet<T>, NetError> {
    match factors {
        [] => Err(NetError::Contract("need at least one factor".into())),
        [g] => Ok(g.clone()),
        _ => concatenate_compose(&kproduct_scaled(factors.len(), n, a)?, &stacked_factors(factors)?),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions_1d::hat01;
    use crate::constructions_product::square::product_net;
    use crate::net_core::{q, Q};

    #[test]
    fn single_factor_is_identity() {
        let h = hat01::<Q>();
        assert_eq!(tensor_net(std::slice::from_ref(&h), 3).unwrap(), h);
    }

    #[test]
    fn hat_tensor_contract_and_values() {
        let h = hat01::<Q>();
        let n = 3;
        let t = tensor_net(&[h.clone(), h.clone()], n).unwrap();
        assert_eq!(t.width(), 2 * 3);
        assert_eq!(t.depth(), 1 + 3 * n);
        let p = product_net::<Q>(n).unwrap();
        for i in 0..=8 {
            for j in 0..=8 {
                let x = [q(i, 8), q(j, 8)];
                let g = [h.eval1(&x[..1]).unwrap(), h.eval1(&x[1..]).unwrap()];
                assert_eq!(t.eval1(&x).unwrap(), p.eval1(&g).unwrap());
            }
        }
    }
}
