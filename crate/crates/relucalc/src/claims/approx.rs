//! Approximation claims: squaring and products, super-convergence,
//! B-spline emulation and the Besov accuracy budget.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use super::{within, ClaimError, ClaimOptions, Outcome};
use crate::analysis::{eval_sorted1, sup_error, Reference, SupMode};
use crate::constructions_1d::{yarotsky_approx, Cpwl1D};
use crate::constructions_product::{
    bspline_net, bspline_ref, kproduct_net, kproduct_scaled, product_constant, product_net, square_net, BesovBudget,
};
use crate::net_core::{q, q_to_f64, qi, BoxDomain, NetError, ReluNet, Scalar, Q};

fn pow4(n: usize) -> f64 {
    4f64.powi(n as i32)
}

/// Sup error on a point set plus the range of the network values.
struct GridStats {
    error: f64,
    min: f64,
    max: f64,
}

fn grid_stats<T: Scalar>(net: &ReluNet<T>, pts: &[Vec<T>], reference: &(dyn Fn(&[T]) -> T + Sync)) -> Result<GridStats, NetError> {
    let vals: Vec<(f64, f64)> = pts
        .par_iter()
        .map(|x| {
            let v = net.eval1(x)?;
            Ok(((v.clone() - reference(x)).abs_val().to_f64(), v.to_f64()))
        })
        .collect::<Result<_, NetError>>()?;
    Ok(vals.iter().fold(GridStats { error: 0.0, min: f64::INFINITY, max: f64::NEG_INFINITY }, |s, (e, v)| GridStats {
        error: s.error.max(*e),
        min: s.min.min(*v),
        max: s.max.max(*v),
    }))
}

fn product_of<T: Scalar>(x: &[T]) -> T {
    x.iter().fold(T::one(), |s, v| s * v.clone())
}

fn sweep(opts: &ClaimOptions, default: &[usize], lo: usize, name: &str) -> Result<Vec<usize>, ClaimError> {
    let ns = opts.n.clone().unwrap_or_else(|| default.to_vec());
    if ns.is_empty() || ns.iter().any(|&n| n < lo) {
        return Err(ClaimError::Usage(format!("{name} values must be at least {lo}")));
    }
    Ok(ns)
}

/// Exact uniform error of the squaring network against `t²` on `[0, 1]`.
pub(super) fn square_error(opts: &ClaimOptions) -> Result<Outcome, ClaimError> {
    let ns = sweep(opts, &(1..=10).collect::<Vec<_>>(), 1, "n")?;
    let start = Instant::now();
    let dom = BoxDomain::unit(1);
    let mut rows = Vec::new();
    let mut pass = true;
    for &n in &ns {
        let net = square_net::<Q>(n)?;
        let err = sup_error(&net, &Reference::Quadratic([qi(0), qi(0), qi(1)]), &dom, SupMode::Exact1d)?.value;
        let bound = Q::new(1.into(), (3 * 4u64.pow(n as u32)).into());
        let ok = err <= bound || within(q_to_f64(&err), q_to_f64(&bound), opts.tolerance);
        pass &= ok;
        rows.push(json!({"n": n, "error": err.to_string(), "error_f64": q_to_f64(&err), "bound": bound.to_string(), "width": net.width(), "depth": net.depth(), "pass": ok}));
    }
    let secs = start.elapsed().as_secs_f64();
    let fast = ns.iter().all(|&n| n <= 10) && secs < 1.0 || ns.iter().any(|&n| n > 10);
    Ok(Outcome {
        contract: "exact sup_{[0,1]} |S_n(t) - t²| ≤ 4^{-n}/3; whole sweep under 1 s".into(),
        measured: json!({"rows": rows, "seconds": secs}),
        pass: pass && fast,
    })
}

/// Grid error of the two-factor product on `[0,1]²` and its range.
pub(super) fn product_error(opts: &ClaimOptions) -> Result<Outcome, ClaimError> {
    let ns = sweep(opts, &(1..=8).collect::<Vec<_>>(), 1, "n")?;
    let per_axis = opts.grid.unwrap_or(500);
    let mut rows = Vec::new();
    let mut pass = true;
    for &n in &ns {
        let st = if opts.exact {
            grid_stats(&product_net::<Q>(n)?, &BoxDomain::unit(2).grid(per_axis)?, &product_of::<Q>)?
        } else {
            grid_stats(&product_net::<f64>(n)?, &BoxDomain::unit(2).grid(per_axis)?, &product_of::<f64>)?
        };
        let bound = 1.0 / pow4(n);
        let ok = within(st.error, bound, opts.tolerance) && st.min >= 0.0 && st.max <= 1.0;
        pass &= ok;
        rows.push(json!({"n": n, "error": st.error, "bound": bound, "min": st.min, "max": st.max, "pass": ok}));
    }
    Ok(Outcome {
        contract: format!("max over a {per_axis}² grid of |Π_n(x,y) - xy| ≤ 4^{{-n}} and 0 ≤ Π_n ≤ 1"),
        measured: json!({ "rows": rows }),
        pass,
    })
}

/// Lattice error of the `k`-factor product on `[0,1]^k` and of the rescaled
/// product on `[0,2]^k`.
pub(super) fn kproduct_error(opts: &ClaimOptions) -> Result<Outcome, ClaimError> {
    let ns = sweep(opts, &[3, 5, 7], 1, "n")?;
    let per_axis = opts.grid.unwrap_or(40);
    let mut rows = Vec::new();
    let mut pass = true;
    for k in [3usize, 4] {
        let unit = BoxDomain::unit(k).grid(per_axis)?;
        let two = BoxDomain::cube(k, 0.0, 2.0).grid(per_axis)?;
        for &n in &ns {
            let plain = grid_stats(&kproduct_net::<f64>(k, n)?, &unit, &product_of::<f64>)?;
            let scaled = grid_stats(&kproduct_scaled::<f64>(k, n, &2.0)?, &two, &product_of::<f64>)?;
            let bound = std::f64::consts::E * k as f64 / pow4(n);
            let scaled_bound = product_constant(k, n) * 2f64.powi(k as i32) / pow4(n);
            let ok = within(plain.error, bound, opts.tolerance) && within(scaled.error, scaled_bound, opts.tolerance);
            pass &= ok;
            rows.push(json!({
                "k": k, "n": n,
                "error": plain.error, "bound": bound,
                "scaled_error": scaled.error, "scaled_bound": scaled_bound,
                "pass": ok
            }));
        }
    }
    Ok(Outcome {
        contract: format!(
            "on a {per_axis}^k lattice, k ∈ {{3,4}}: error ≤ e·k·4^{{-n}} on [0,1]^k and ≤ C_k 2^k 4^{{-n}} on [0,2]^k"
        ),
        measured: json!({ "rows": rows }),
        pass,
    })
}

/// A 1-Lipschitz piecewise-linear function on `[0, 1]` with random nodes
/// and slopes in `[-1, 1]`.
pub fn random_lipschitz_cpwl(rng: &mut impl Rng) -> Cpwl1D<Q> {
    let count = rng.random_range(2..=8);
    let mut nodes: Vec<i64> = (0..count).map(|_| rng.random_range(1..1000)).collect();
    nodes.sort_unstable();
    nodes.dedup();
    fn slope(rng: &mut impl Rng) -> Q {
        q(rng.random_range(-100..=100), 100)
    }
    let left = slope(rng);
    let mut values = vec![q(rng.random_range(0..=100), 100) + &left * q(nodes[0], 1000)];
    for w in nodes.windows(2) {
        let next = values.last().unwrap() + slope(rng) * q(w[1] - w[0], 1000);
        values.push(next);
    }
    let right = slope(rng);
    let nodes: Vec<Q> = nodes.into_iter().map(|v| q(v, 1000)).collect();
    Cpwl1D::new(nodes, values, left, right).expect("sorted distinct nodes")
}

/// The named targets of the super-convergence claim.
fn yarotsky_targets(opts: &ClaimOptions) -> Result<Vec<(String, Cpwl1D<Q>)>, ClaimError> {
    let half = q(1, 2);
    let abs_mid = Cpwl1D::new(vec![half.clone()], vec![qi(0)], qi(-1), qi(1))?;
    let tent = Cpwl1D::new(vec![half.clone()], vec![half], qi(1), qi(-1))?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut all = vec![("abs-mid".to_string(), abs_mid), ("tent".to_string(), tent)];
    for i in 1..=5 {
        all.push((format!("random-{i}"), random_lipschitz_cpwl(&mut rng)));
    }
    match opts.f.as_deref() {
        None | Some("all") => Ok(all),
        Some("random") => Ok(all.into_iter().filter(|(n, _)| n.starts_with("random-")).collect()),
        Some(name) => {
            let pick: Vec<_> = all.into_iter().filter(|(n, _)| n == name).collect();
            if pick.is_empty() {
                Err(ClaimError::Usage(format!(
                    "unknown target '{name}' (expected abs-mid, tent, random, random-1..random-5 or all)"
                )))
            } else {
                Ok(pick)
            }
        }
    }
}

/// Grid error of the super-convergent approximant: `≤ 6/n²`, and finer
/// coarse grids do better.
pub(super) fn yarotsky(opts: &ClaimOptions) -> Result<Outcome, ClaimError> {
    let ns = sweep(opts, &[4, 8, 16], 4, "n")?;
    if ns.iter().any(|n| n % 2 != 0) {
        return Err(ClaimError::Usage("n must be even".into()));
    }
    let targets = yarotsky_targets(opts)?;
    let g = opts.grid.unwrap_or(10_000).max(2) as i64;
    let pts: Vec<Q> = (0..=g).map(|k| q(k, g)).collect();
    let jobs: Vec<(usize, usize)> = (0..targets.len()).flat_map(|t| ns.iter().map(move |&n| (t, n))).collect();
    let errs: Vec<(usize, usize, f64, usize, usize)> = jobs
        .par_iter()
        .map(|&(t, n)| {
            let f = &targets[t].1;
            let r = yarotsky_approx(&|x: &Q| f.eval(x), n)?;
            let vals = eval_sorted1(&r.net, &pts)?;
            let e = pts.iter().zip(&vals).map(|(x, v)| (f.eval(x) - v).abs_val()).fold(qi(0), |m, e| m.max(e));
            Ok((t, n, q_to_f64(&e), r.net.width(), r.net.depth()))
        })
        .collect::<Result<_, NetError>>()?;
    let mut pass = true;
    let mut rows = Vec::new();
    for (t, (name, _)) in targets.iter().enumerate() {
        let mine: Vec<_> = errs.iter().filter(|e| e.0 == t).collect();
        let bound_ok = mine.iter().all(|e| within(e.2, 6.0 / (e.1 * e.1) as f64, opts.tolerance));
        let at = |n: usize| mine.iter().find(|e| e.1 == n).map(|e| e.2);
        let improves = match (at(4), at(16)) {
            (Some(a), Some(b)) => b < a,
            _ => true,
        };
        pass &= bound_ok && improves;
        let per_n: Vec<Value> = mine
            .iter()
            .map(|e| json!({"n": e.1, "error": e.2, "bound": 6.0 / (e.1 * e.1) as f64, "width": e.3, "depth": e.4}))
            .collect();
        rows.push(json!({"f": name, "rows": per_n, "bound_ok": bound_ok, "improves": improves}));
    }
    Ok(Outcome {
        contract: format!("max over {} grid points of |f - S_n| ≤ 6/n², and error(16) < error(4)", g + 1),
        measured: json!({ "targets": rows }),
        pass,
    })
}

/// Random point of `[-1, 3]^d` outside `[0, 2]^d`.
fn exterior_point(d: usize, rng: &mut impl Rng) -> Vec<Q> {
    loop {
        let x: Vec<Q> = (0..d).map(|_| q(rng.random_range(-1000..=3000), 1000)).collect();
        if x.iter().any(|v| *v < qi(0) || *v > qi(2)) {
            return x;
        }
    }
}

/// Support and error decay of the order-2 B-spline emulation for
/// `d ∈ {1, 2}`.  For `d = 1` the emulation is exact, so the decay ratio
/// is undefined and reported as such.
pub(super) fn bspline(opts: &ClaimOptions) -> Result<Outcome, ClaimError> {
    let r = 2u32;
    let ns = sweep(opts, &[3, 4, 5, 6, 7], 1, "n")?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut pass = true;
    let mut rows = Vec::new();
    for d in [1usize, 2] {
        let per_axis = opts.grid.unwrap_or(if d == 1 { 2001 } else { 201 });
        let grid = BoxDomain::cube(d, 0.0, 2.0).grid(per_axis)?;
        let exterior: Vec<Vec<Q>> = (0..1000).map(|_| exterior_point(d, &mut rng)).collect();
        let mut errors = Vec::new();
        let mut outside_zero = true;
        for &n in &ns {
            let net = bspline_net::<Q>(r, d, n)?;
            outside_zero &= exterior.par_iter().map(|x| net.eval1(x)).collect::<Result<Vec<_>, _>>()?.iter().all(|v| *v == qi(0));
            let fnet: ReluNet<f64> = net.to_mode();
            errors.push(grid_stats(&fnet, &grid, &|x: &[f64]| bspline_ref(r, x))?.error);
        }
        let ratios: Vec<Option<f64>> = errors
            .windows(2)
            .map(|w| if w[1] > 0.0 && w[0].is_finite() { Some(w[0] / w[1]) } else { None })
            .collect();
        let ratios_ok = !ratios.is_empty() && ratios.iter().all(|r| r.is_some_and(|v| (2.5..=6.0).contains(&v)));
        pass &= outside_zero && ratios_ok;
        rows.push(json!({
            "d": d, "n": ns, "errors": errors, "ratios": ratios,
            "exterior_zero": outside_zero,
            "note": if errors.iter().all(|e| *e == 0.0) { "emulation is exact: the decay ratio is undefined" } else { "" }
        }));
    }
    Ok(Outcome {
        contract: "N̂ = 0 at 1000 points outside [0,2]^d; error(n)/error(n+1) ∈ [2.5, 6] on consecutive n".into(),
        measured: json!({ "rows": rows }),
        pass,
    })
}

/// Structure of the accuracy levels `m(j, k)`: they vanish from the class
/// `J_k⁺` on and stay below `C·L` (`C = s/d`) at the smallest class `J_k`.
pub(super) fn besov_budget(opts: &ClaimOptions) -> Result<Outcome, ClaimError> {
    let (s, tau, p) = (1.5, 1.0, 2.0);
    let levels = opts.n.clone().unwrap_or_else(|| vec![4, 6]);
    let mut pass = true;
    let mut rows = Vec::new();
    for d in [1usize, 2] {
        for &l in &levels {
            let b = BesovBudget::new(s, tau, p, d, l as u32)?;
            let c = s / d as f64;
            let mut tail_ok = true;
            let mut worst: u32 = 0;
            let mut populated = 0;
            for k in 0..=(8 * l as u32 + 16) {
                let (jmin, jplus) = (b.j_min(k), b.j_plus(k));
                if jplus < jmin {
                    continue;
                }
                populated += 1;
                worst = worst.max(b.m(jmin, k));
                let first = jplus.ceil() as i64;
                tail_ok &= (first..=first + 8).all(|j| b.m(j as f64, k) == 0) && b.m(jplus, k) == 0;
            }
            let ok = tail_ok && (worst as f64) <= c * l as f64 && populated > 0;
            pass &= ok;
            rows.push(json!({"d": d, "L": l, "levels_k": populated, "tail_zero": tail_ok, "max_m_at_Jk": worst, "C_L": c * l as f64, "pass": ok}));
        }
    }
    Ok(Outcome {
        contract: "s=1.5, τ=1, p=2: m(j,k) = 0 for j ≥ J_k⁺ and m(J_k,k) ≤ (s/d)·L on every populated level".into(),
        measured: json!({ "rows": rows }),
        pass,
    })
}
