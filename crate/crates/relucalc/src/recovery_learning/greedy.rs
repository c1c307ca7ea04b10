//! Orthogonal greedy approximation from a finite dictionary in a sampled
//! inner-product space.

use serde::Serialize;

use crate::net_core::NetError;

/// Output of [`greedy_hull_approx`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GreedyReport {
    /// Dictionary index chosen at each step.
    pub selected: Vec<usize>,
    /// Final approximant `f_n`.
    pub approximant: Vec<f64>,
    /// `‖f - f_k‖` for `k = 1..=steps`.
    pub errors: Vec<f64>,
}

/// Least-squares slope of `log e` against `log n` over the steps
/// `n ∈ [lo, hi]` (1-based).  Errors are floored at `floor` so that exact
/// recovery (error zero) still gives a finite slope.
pub fn loglog_slope(errors: &[f64], lo: usize, hi: usize, floor: f64) -> f64 {
    let pts: Vec<(f64, f64)> = (lo.max(1)..=hi.min(errors.len()))
        .map(|n| ((n as f64).ln(), errors[n - 1].max(floor).ln()))
        .collect();
    let k = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / k, sy / k);
    let (num, den) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + (x - mx) * (y - my), b + (x - mx) * (x - mx)));
    num / den
}

/// Orthogonal greedy algorithm: at step `k` pick the element `φ` with the
/// largest `|⟨f - f_{k-1}, φ⟩|` (so a dictionary given without `-φ`
/// behaves as if it were symmetric), then let `f_k` be the orthogonal
/// projection of `f` onto the span of the chosen elements.  The inner
/// product is `⟨u, v⟩ = Σ_i q_i u_i v_i`.  Once the residual is orthogonal
/// to the whole dictionary, the remaining steps repeat the final error.
pub fn greedy_hull_approx(
    dictionary: &[Vec<f64>],
    weights: &[f64],
    f: &[f64],
    steps: usize,
) -> Result<GreedyReport, NetError> {
    if dictionary.is_empty() {
        return Err(NetError::Contract("the dictionary is empty".into()));
    }
    let n = f.len();
    if weights.len() != n || dictionary.iter().any(|g| g.len() != n) {
        return Err(NetError::Shape("dictionary, weights and target must share one grid".into()));
    }
    let inner = |u: &[f64], v: &[f64]| -> f64 { weights.iter().zip(u).zip(v).map(|((q, a), b)| q * a * b).sum() };
    let fnorm = inner(f, f).sqrt();
    // Orthonormal basis of the selected span (modified Gram–Schmidt).
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut approx = vec![0.0; n];
    let mut selected = Vec::with_capacity(steps);
    let mut errors = Vec::with_capacity(steps);
    for _ in 0..steps {
        let r: Vec<f64> = f.iter().zip(&approx).map(|(a, b)| a - b).collect();
        let (best, corr) = dictionary
            .iter()
            .enumerate()
            .map(|(i, g)| (i, inner(&r, g).abs() / inner(g, g).sqrt().max(f64::MIN_POSITIVE)))
            .fold((0, -1.0), |acc, c| if c.1 > acc.1 { c } else { acc });
        if corr > 1e-14 * fnorm.max(f64::MIN_POSITIVE) {
            let mut v = dictionary[best].clone();
            for e in &basis {
                let c = inner(&v, e);
                v.iter_mut().zip(e).for_each(|(a, b)| *a -= c * b);
            }
            let vn = inner(&v, &v).sqrt();
            if vn > 1e-14 * inner(&dictionary[best], &dictionary[best]).sqrt() {
                v.iter_mut().for_each(|a| *a /= vn);
                let c = inner(f, &v);
                approx.iter_mut().zip(&v).for_each(|(a, b)| *a += c * b);
                basis.push(v);
            }
        }
        selected.push(best);
        let r: Vec<f64> = f.iter().zip(&approx).map(|(a, b)| a - b).collect();
        errors.push(inner(&r, &r).sqrt());
    }
    Ok(GreedyReport { selected, approximant: approx, errors })
}
