//! Cardinal B-splines: exact reference values and deep ReLU emulation.
//!
//! The emulation goes through four stages: a power network for
//! `(u_+)^{r-1}`, the truncated-power sum for the univariate spline
//! (followed by a ReLU so the values are nonnegative), a tensor product of
//! `d` copies, and finally a clamp `(min(Ñ, π))_+` with the pyramid
//! `π(x) = min_i min(x_i, r - x_i)`, which makes the result vanish outside
//! `[0, r]^d` without increasing the error inside.

use super::square::{monomial_net, MultiIndex};
use super::tensor::tensor_net_scaled;
use crate::constructions_multid::{minmax_affine, minmax_outputs, AffineFamily, Extremum, MinMaxStrategy, Stacking};
use crate::net_calculus::{concatenate_compose, precompose_affine, relu_output, translate_dilate_sum, AffineMap};
use crate::net_core::{pad_depth, BoxDomain, Layer, NetError, ReluNet, Scalar};

fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

fn factorial(n: u64) -> u64 {
    (1..=n).product()
}

/// `(u)_+^{p}`, with `(u)_+^0` the indicator of `u > 0`.
fn truncated_power<T: Scalar>(u: &T, p: u32) -> T {
    if *u <= T::zero() {
        return T::zero();
    }
    (0..p).fold(T::one(), |s, _| s * u.clone())
}

/// Signed coefficients `(-1)^{r-k} C(r,k) / (r-1)!`, `k = 0..=r`, of the
/// truncated powers `(k - t)_+^{r-1}` in `N_r`.
pub fn truncated_power_coefficients<T: Scalar>(r: u32) -> Vec<T> {
    let f = factorial(r as u64 - 1) as i64;
    (0..=r)
        .map(|k| {
            let sign = if (r - k).is_multiple_of(2) { 1 } else { -1 };
            T::from_ratio(sign * binomial(r as u64, k as u64) as i64, f)
        })
        .collect()
}

/// Univariate cardinal B-spline `N_r(t)` of order `r` (degree `r - 1`),
/// supported on `[0, r]`, through its truncated-power sum.
pub fn bspline_ref_1d<T: Scalar>(r: u32, t: &T) -> T {
    assert!(r >= 1, "B-spline order must be at least 1");
    truncated_power_coefficients::<T>(r)
        .into_iter()
        .enumerate()
        .fold(T::zero(), |s, (k, c)| s + c * truncated_power(&(T::from_ratio(k as i64, 1) - t.clone()), r - 1))
}

/// Tensor-product B-spline `N_r(x_1) ⋯ N_r(x_d)`.
pub fn bspline_ref<T: Scalar>(r: u32, x: &[T]) -> T {
    x.iter().fold(T::one(), |s, t| s * bspline_ref_1d(r, t))
}

/// Network for `(u_+)^{r-1}` on `[-r, r]`: a ReLU followed by `r^{r-1}`
/// times the monomial network of `(v/r)^{r-1}`.  Exact for `r = 2`.
pub fn truncated_power_net<T: Scalar>(r: u32, n: usize) -> Result<ReluNet<T>, NetError> {
    if r < 2 {
        return Err(NetError::Contract("B-spline emulation needs r ≥ 2".into()));
    }
    let relu = ReluNet::new(1, 1, vec![Layer { w: vec![vec![T::one()]], b: vec![T::zero()] }, Layer { w: vec![vec![T::one()]], b: vec![T::zero()] }])?;
    if r == 2 {
        return Ok(relu);
    }
    let rr = T::from_ratio(r as i64, 1);
    let power = monomial_net::<T>(&MultiIndex(vec![r - 1]), n)?;
    let power = precompose_affine(&power, &AffineMap::scalar(1, T::one() / rr.clone(), vec![T::zero()]))?;
    let scale = (0..r - 1).fold(T::one(), |s, _| s * rr.clone());
    concatenate_compose(&power.affine_output(&scale, &T::zero()), &relu)
}

/// `T_r^+ = (Σ_k c_k ρ(k - t))_+`, the nonnegative univariate surrogate of
/// `N_r` (realized on `[0, r]`).
pub fn univariate_spline_net<T: Scalar>(r: u32, n: usize) -> Result<ReluNet<T>, NetError> {
    let rho = truncated_power_net::<T>(r, n)?;
    let terms: Vec<(AffineMap<T>, T)> = truncated_power_coefficients::<T>(r)
        .into_iter()
        .enumerate()
        .map(|(k, c)| Ok((AffineMap::new(vec![vec![-T::one()]], vec![T::from_ratio(k as i64, 1)])?, c)))
        .collect::<Result<_, NetError>>()?;
    let dom = BoxDomain::new(vec![T::zero()], vec![T::from_ratio(r as i64, 1)])?;
    relu_output(&translate_dilate_sum(&rho, &terms, &dom)?)
}

/// Pyramid `min_i min(x_i, r - x_i)`: nonpositive outside `[0, r]^d` and at
/// least `N_r(x_1) ⋯ N_r(x_d)` inside (each `N_r` is 1-Lipschitz and
/// vanishes at `0` and `r`).  Built from the `2d` facet functions with a
/// tournament, so it is exact on all of `R^d`.
pub fn pyramid_net<T: Scalar>(r: u32, d: usize) -> Result<ReluNet<T>, NetError> {
    let rr = T::from_ratio(r as i64, 1);
    let mut members = Vec::with_capacity(2 * d);
    for i in 0..d {
        let mut w = vec![T::zero(); d];
        w[i] = T::one();
        members.push((w.clone(), T::zero()));
        w[i] = -T::one();
        members.push((w, rr.clone()));
    }
    minmax_affine(&AffineFamily::new(members)?, Extremum::Min, MinMaxStrategy::Tournament, false, None)
}

/// `N̂ = (min(Ñ, π))_+` with `Ñ = Π_n^d(T_r^+(x_1), …, T_r^+(x_d))` (the
/// product rescaled to `[0, 2]^d`) and `π` from [`pyramid_net`].  Vanishes
/// outside `[0, r]^d`; the error is `O(4^{-n})` with a constant depending on
/// `r` and `d`.  For `r = 2` the univariate stage is exact, and the width is
/// `6d` for `d ≤ 2`.
pub fn bspline_net<T: Scalar>(r: u32, d: usize, n: usize) -> Result<ReluNet<T>, NetError> {
    if r < 2 {
        return Err(NetError::Contract("B-spline emulation needs r ≥ 2".into()));
    }
    if d == 0 {
        return Err(NetError::Shape("dimension must be positive".into()));
    }
    let g = univariate_spline_net::<T>(r, n)?;
    let tilde = tensor_net_scaled(&vec![g; d], n, &T::from_ratio(2, 1))?;
    let pyr = pyramid_net::<T>(r, d)?;
    let depth = tilde.depth().max(pyr.depth());
    let parts = [pad_depth(&tilde, depth)?, pad_depth(&pyr, depth)?];
    relu_output(&minmax_outputs(&parts, Extremum::Min, Stacking::Parallel, None)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net_core::{q, qi, Q};

    #[test]
    fn reference_values() {
        assert_eq!(bspline_ref_1d(2, &qi(1)), qi(1));
        assert_eq!(bspline_ref_1d(2, &q(1, 2)), q(1, 2));
        assert_eq!(bspline_ref_1d(3, &q(3, 2)), q(3, 4));
        assert_eq!(bspline_ref_1d(1, &q(1, 2)), qi(1));
        for t in [q(-1, 3), qi(0), qi(4), q(9, 2)] {
            assert_eq!(bspline_ref_1d(4, &t), qi(0));
        }
        assert_eq!(bspline_ref(2, &[qi(1), q(1, 2)]), q(1, 2));
    }

    #[test]
    fn hat_spline_is_exact_in_one_dimension() {
        let net = bspline_net::<Q>(2, 1, 3).unwrap();
        assert_eq!(net.width(), 6);
        for k in -20..=60 {
            let t = q(k, 20);
            assert_eq!(net.eval1(std::slice::from_ref(&t)).unwrap(), bspline_ref_1d(2, &t));
        }
    }

    #[test]
    fn two_dimensional_support_and_width() {
        let net = bspline_net::<Q>(2, 2, 3).unwrap();
        assert_eq!(net.width(), 12);
        for x in [[q(-1, 2), qi(1)], [qi(1), q(21, 10)], [qi(3), qi(3)], [q(-1, 10), q(-1, 10)]] {
            assert_eq!(net.eval1(&x).unwrap(), qi(0));
        }
        let v = net.eval1(&[qi(1), qi(1)]).unwrap();
        assert!((v - qi(1)).abs_val() <= qi(4) * q(1, 64));
    }

    #[test]
    fn cubic_spline_error_decays() {
        let err = |n: usize| {
            let net = bspline_net::<f64>(3, 1, n).unwrap();
            (0..=300).map(|k| 3.0 * k as f64 / 300.0).map(|t| (net.eval1(&[t]).unwrap() - bspline_ref_1d(3, &t)).abs()).fold(0.0, f64::max)
        };
        let (e3, e5) = (err(3), err(5));
        assert!(e5 < e3 / 4.0, "{e3} {e5}");
    }
}
