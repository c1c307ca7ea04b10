//! Super-convergent approximation of 1-Lipschitz functions on `[0, 1]`:
//! a coarse piecewise-linear interpolant on `n` cells plus a bit-extraction
//! correction that encodes the residual on the fine grid of `N = n²` cells.
//! The resulting width-11 network of depth `O(n)` achieves error `O(1/n²)`.

use super::bitextract::{assemble, BitExtractPlan};
use crate::net_core::{q, qi, NetError, ReluNet, Scalar, Q};

/// Output of [`yarotsky_approx`].
#[derive(Debug, Clone)]
pub struct YarotskyResult {
    pub net: ReluNet<Q>,
    /// Sign plan of the correction term.
    pub plan: BitExtractPlan,
    /// Values of the target at `j/n`, `j = 0..n`.
    pub coarse: Vec<Q>,
}

/// Greedy ±1 walk tracking the residual `r` on the fine grid: at every step
/// choose the sign that brings `2 y_{i+1} / N` closest to `r(t_{i+1})`,
/// breaking ties towards `+1`.
///
/// Fails with a contract error when the residual is not tracked within
/// `2/N` or the walk does not return to zero at block ends, which happens
/// exactly when the target is not 1-Lipschitz.
pub fn greedy_signs(residual: &dyn Fn(&Q) -> Q, n: usize) -> Result<BitExtractPlan, NetError> {
    if n < 4 || !n.is_multiple_of(2) {
        return Err(NetError::Contract(format!("n must be even and at least 4, got {n}")));
    }
    let nn = (n * n) as i64;
    let scale = q(2, nn);
    let mut y = 0i64;
    let mut eps = Vec::with_capacity(n * n);
    for i in 0..nn {
        let target = residual(&q(i + 1, nn));
        let up = (&scale * qi(y + 1) - &target).abs_val();
        let down = (&scale * qi(y - 1) - &target).abs_val();
        let e = if up <= down { 1 } else { -1 };
        y += e as i64;
        eps.push(e);
        if (&scale * qi(y) - &target).abs_val() > scale {
            return Err(NetError::Contract(format!(
                "residual not tracked at t = {}/{nn}; is the target 1-Lipschitz?",
                i + 1
            )));
        }
    }
    BitExtractPlan::new(n, eps)
}

/// Approximate a 1-Lipschitz `f` on `[0, 1]` with `n` coarse cells
/// (`n` even, at least 4).
pub fn yarotsky_approx(f: &dyn Fn(&Q) -> Q, n: usize) -> Result<YarotskyResult, NetError> {
    if n < 4 || !n.is_multiple_of(2) {
        return Err(NetError::Contract(format!("n must be even and at least 4, got {n}")));
    }
    let ni = n as i64;
    let coarse: Vec<Q> = (0..=ni).map(|j| f(&q(j, ni))).collect();
    let s0 = |t: &Q| -> Q {
        let x = t * qi(ni);
        let j = (x.floor().to_integer().try_into().unwrap_or(0i64)).clamp(0, ni - 1);
        let frac = x - qi(j);
        let (a, b) = (&coarse[j as usize], &coarse[j as usize + 1]);
        a + (b - a) * frac
    };
    let residual = |t: &Q| f(t) - s0(t);
    let plan = greedy_signs(&residual, n)?;
    let net = assemble(&plan, Some(&coarse))?.to_relu()?;
    Ok(YarotskyResult { net, plan, coarse })
}
