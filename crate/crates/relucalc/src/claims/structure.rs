//! Structural claims: breakpoint counts, bit extraction, min/max networks,
//! arrangements, finite-element bases, shattering and the calculus.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde_json::json;

use super::{ClaimError, ClaimOptions, Outcome};
use crate::analysis::{
    bit_extract_sites, count_breakpoints_in, eval_sorted1, exact_cpwl_1d, lipschitz_probe, shatter_check, shatters,
    zaslavsky_bound, Architecture, Arrangement, LinearForm, ShatterBuilder,
};
use crate::constructions_1d::{bit_extract_net, sawtooth as sawtooth_net, BitExtractPlan};
use crate::constructions_multid::{
    ceil_log2, fem_basis_net, fem_combination, minmax_affine, minmax_outputs, AffineFamily, Extremum, KuhnGrid,
    MinMaxStrategy, Stacking,
};
use crate::net_calculus::{
    add_by_depth, concatenate_compose, parallel_stack, parallelize_sum, power_sum, precompose_affine, relu_output,
    shift_dilate, AffineMap,
};
use crate::net_core::{q, qi, special_to_relu, BoxDomain, Layer, NetError, ReluNet, Scalar, Q};

/// Random network with small rational weights.
pub(crate) fn random_rational_net(d: usize, widths: &[usize], rng: &mut impl Rng) -> Result<ReluNet<Q>, NetError> {
    let mut dims = vec![d];
    dims.extend_from_slice(widths);
    dims.push(1);
    let entry = |rng: &mut ChaCha8Rng| q(rng.random_range(-6..=6), rng.random_range(1..=3));
    let mut local = ChaCha8Rng::seed_from_u64(rng.random());
    let layers = dims
        .windows(2)
        .map(|p| {
            let w = (0..p[1]).map(|_| (0..p[0]).map(|_| entry(&mut local)).collect()).collect();
            let b = (0..p[1]).map(|_| entry(&mut local)).collect();
            Layer::new(w, b)
        })
        .collect::<Result<Vec<_>, _>>()?;
    ReluNet::new(d, 1, layers)
}

/// Random rational points of `[0, 1]^d` with denominator 1000.
fn random_points(d: usize, count: usize, rng: &mut impl Rng) -> Vec<Vec<Q>> {
    (0..count).map(|_| (0..d).map(|_| q(rng.random_range(0..=1000), 1000)).collect()).collect()
}

/// `2^L - 1` breakpoints in `(0, 1)` and shape `(2, L)` for `L ≤ 12`.
pub(super) fn sawtooth(opts: &ClaimOptions) -> Result<Outcome, ClaimError> {
    let ls = opts.n.clone().unwrap_or_else(|| (1..=12).collect());
    if ls.iter().any(|&l| l == 0 || l > 24) {
        return Err(ClaimError::Usage("L must lie in 1..=24".into()));
    }
    let rows: Vec<_> = ls
        .par_iter()
        .map(|&l| {
            let net = sawtooth_net::<Q>(l);
            let bps = count_breakpoints_in(&exact_cpwl_1d(&net)?, &qi(0), &qi(1));
            let ok = bps == (1usize << l) - 1 && net.width() == 2 && net.depth() == l;
            Ok((ok, json!({"L": l, "breakpoints": bps, "expected": (1usize << l) - 1, "width": net.width(), "depth": net.depth()})))
        })
        .collect::<Result<_, NetError>>()?;
    Ok(Outcome {
        contract: "sawtooth of depth L: exactly 2^L - 1 breakpoints in (0,1), width 2, depth L".into(),
        pass: rows.iter().all(|r: &(bool, _)| r.0),
        measured: json!({ "rows": rows.into_iter().map(|r| r.1).collect::<Vec<_>>() }),
    })
}

/// Breakpoints of random Gaussian networks never exceed `(W + 1)^L`.
pub(super) fn breakpoint_bound(opts: &ClaimOptions) -> Result<Outcome, ClaimError> {
    let count = opts.grid.unwrap_or(200);
    let normal = Normal::new(0.0, 1.0).expect("valid normal");
    let results: Vec<(usize, usize, usize)> = (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_mul(1_000_003).wrapping_add(i));
            let w = rng.random_range(1..=4usize);
            let l = rng.random_range(1..=5usize);
            let mut dims = vec![1];
            dims.extend(std::iter::repeat_n(w, l));
            dims.push(1);
            let layers = dims
                .windows(2)
                .map(|p| {
                    let mut g = || Q::from_f64(normal.sample(&mut rng));
                    let wm = (0..p[1]).map(|_| (0..p[0]).map(|_| g()).collect()).collect();
                    let b = (0..p[1]).map(|_| g()).collect();
                    Layer::new(wm, b)
                })
                .collect::<Result<Vec<_>, _>>()?;
            let net = ReluNet::new(1, 1, layers)?;
            Ok((w, l, exact_cpwl_1d(&net)?.simplify().breakpoints().len()))
        })
        .collect::<Result<_, NetError>>()?;
    let violations = results.iter().filter(|(w, l, b)| *b > (w + 1).pow(*l as u32)).count();
    let max_fill = results.iter().map(|(w, l, b)| *b as f64 / ((w + 1).pow(*l as u32)) as f64).fold(0.0, f64::max);
    Ok(Outcome {
        contract: format!("{count} random networks (W ≤ 4, L ≤ 5, N(0,1) parameters): breakpoints ≤ (W+1)^L"),
        measured: json!({"networks": count, "violations": violations, "max_breakpoints_over_bound": max_fill}),
        pass: violations == 0,
    })
}

/// Width 11, depth `≤ 15n + 2`, exact node values and bounded oscillation
/// between nodes for random sign plans.
pub(super) fn bit_extraction(opts: &ClaimOptions) -> Result<Outcome, ClaimError> {
    let ns = opts.n.clone().unwrap_or_else(|| vec![4, 6, 8]);
    if ns.iter().any(|&n| n < 4 || n % 2 != 0) {
        return Err(ClaimError::Usage("n must be even and at least 4".into()));
    }
    let samples = opts.grid.unwrap_or(10_000);
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let jobs: Vec<BitExtractPlan> =
        ns.iter().flat_map(|&n| (0..20).map(|_| BitExtractPlan::random(n, &mut rng)).collect::<Vec<_>>()).collect::<Result<_, _>>()?;
    let den = 10_000_000i64;
    let mut raw: Vec<i64> = (0..samples).map(|_| rng.random_range(0..den)).collect();
    raw.sort_unstable();
    let pts: Vec<Q> = raw.iter().map(|&k| q(k, den)).collect();
    let results: Vec<(usize, usize, usize, bool, i64)> = jobs
        .par_iter()
        .map(|plan| {
            let net = bit_extract_net(plan)?;
            let y = plan.values();
            let nodes_ok = eval_sorted1(&net, &plan.sites())?.iter().zip(&y).all(|(v, yi)| *v == qi(*yi));
            let nn = plan.big_n() as i64;
            let vals = eval_sorted1(&net, &pts)?;
            let excess = raw
                .iter()
                .zip(&vals)
                .filter(|(k, v)| {
                    let i = (*k * nn / den) as usize;
                    (*v - qi(y[i])).abs_val() > qi(1)
                })
                .count() as i64;
            Ok((plan.n(), net.width(), net.depth(), nodes_ok, excess))
        })
        .collect::<Result<_, NetError>>()?;
    let secs = start.elapsed().as_secs_f64();
    let mut pass = secs < 30.0;
    let mut rows = Vec::new();
    for &n in &ns {
        let mine: Vec<_> = results.iter().filter(|r| r.0 == n).collect();
        let widths_ok = mine.iter().all(|r| r.1 == 11);
        let max_depth = mine.iter().map(|r| r.2).max().unwrap_or(0);
        let nodes_ok = mine.iter().all(|r| r.3);
        let excess: i64 = mine.iter().map(|r| r.4).sum();
        pass &= widths_ok && max_depth <= 15 * n + 2 && nodes_ok && excess == 0;
        rows.push(json!({"n": n, "plans": mine.len(), "width_11": widths_ok, "max_depth": max_depth, "depth_bound": 15 * n + 2, "nodes_exact": nodes_ok, "oscillation_violations": excess}));
    }
    Ok(Outcome {
        contract: format!("20 random plans per n: width 11, depth ≤ 15n+2, S(t_i) = y_i, |S(t) - S(t_i)| ≤ 1 at {samples} points; under 30 s"),
        measured: json!({"rows": rows, "seconds": secs}),
        pass,
    })
}

/// Exactness and shape of the four min/max constructions for `m ≤ 8`,
/// `d ≤ 3`.
pub(super) fn minmax(opts: &ClaimOptions) -> Result<Outcome, ClaimError> {
    let samples = opts.grid.unwrap_or(10_000);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut rows = Vec::new();
    let mut pass = true;
    for d in 1..=3usize {
        let pts = random_points(d, samples, &mut rng);
        let region = BoxDomain::unit(d);
        for m in 1..=8usize {
            let op = if (m + d) % 2 == 0 { Extremum::Max } else { Extremum::Min };
            let fam = AffineFamily::new(
                (0..m).map(|_| ((0..d).map(|_| q(rng.random_range(-9..=9), rng.random_range(1..=4))).collect(), q(rng.random_range(-9..=9), 4))).collect(),
            )?;
            let mm1 = minmax_affine(&fam, op, MinMaxStrategy::Tournament, false, None)?;
            let mm2 = minmax_affine(&fam, op, MinMaxStrategy::Recursive, false, Some(&region))?;
            let nets: Vec<ReluNet<Q>> = (0..m).map(|_| random_rational_net(d, &[3, 3], &mut rng)).collect::<Result<_, _>>()?;
            let mm3 = minmax_outputs(&nets, op, Stacking::Parallel, None)?;
            let mm4 = minmax_outputs(&nets, op, Stacking::Deep, Some(&region))?;
            let exact = pts
                .par_iter()
                .map(|x| {
                    let a = fam.extremum(op, x);
                    let outs: Vec<Q> = nets.iter().map(|n| n.eval1(x)).collect::<Result<_, _>>()?;
                    let b = op.apply(&outs).expect("nonempty");
                    Ok([mm1.eval1(x)? == a, mm2.eval1(x)? == a, mm3.eval1(x)? == b, mm4.eval1(x)? == b])
                })
                .collect::<Result<Vec<_>, NetError>>()?
                .into_iter()
                .fold([true; 4], |acc, r| [acc[0] && r[0], acc[1] && r[1], acc[2] && r[2], acc[3] && r[3]]);
            let lg = ceil_log2(m);
            let shapes = if m == 1 {
                [true; 4]
            } else {
                let sum_w: usize = nets.iter().map(|n| n.width()).sum();
                let sum_l: usize = nets.iter().map(|n| n.depth()).sum();
                [
                    mm1.width() == 3 * (1 << (lg - 1)) && mm1.depth() == lg,
                    mm2.width() <= d + 1 && mm2.depth() == m - 1,
                    mm3.width() == sum_w && mm3.depth() == nets[0].depth() + lg,
                    mm4.width() <= nets[0].width().max(3) + d + 1 && mm4.depth() == sum_l + m - 1,
                ]
            };
            let ok = exact.iter().chain(&shapes).all(|b| *b);
            pass &= ok;
            rows.push(json!({
                "d": d, "m": m, "op": format!("{op:?}"), "exact": exact, "shape": shapes,
                "shapes_wl": [[mm1.width(), mm1.depth()], [mm2.width(), mm2.depth()], [mm3.width(), mm3.depth()], [mm4.width(), mm4.depth()]]
            }));
        }
    }
    Ok(Outcome {
        contract: format!(
            "at {samples} random points, exact equality with the pointwise extremum; shapes MM1 (3·2^{{⌈log₂m⌉-1}}, ⌈log₂m⌉), MM2 (d+1, m-1), MM3 (ΣW_j, L₀+⌈log₂m⌉), MM4 (≤ max(W₀,3)+d+1, ΣL_j+m-1)"
        ),
        measured: json!({ "rows": rows }),
        pass,
    })
}

/// Random line arrangement in general position with `w` lines.
pub(crate) fn generic_lines(w: usize, rng: &mut impl Rng) -> Result<Arrangement, NetError> {
    let perturbed = |rng: &mut dyn rand::RngCore| qi(rng.random_range(-5..=5)) + q(rng.random_range(-999..=999), 10_000);
    loop {
        let planes = (0..w).map(|_| LinearForm::new(vec![perturbed(rng), perturbed(rng)], perturbed(rng))).collect();
        if let Ok(a) = Arrangement::new(2, planes) {
            if a.in_general_position() {
                return Ok(a);
            }
        }
    }
}

/// Cells of 20 perturbed generic line arrangements equal `Σ_{j ≤ 2} C(W, j)`.
pub(super) fn arrangement_cells(opts: &ClaimOptions) -> Result<Outcome, ClaimError> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut rows = Vec::new();
    let mut pass = true;
    for i in 0..20 {
        let w = 1 + i % 6;
        let arr = generic_lines(w, &mut rng)?;
        let rep = arr.cell_report()?;
        let formula = (1 + w + w * (w - 1) / 2) as u64;
        let ok = rep.exact && rep.cell_count == formula && rep.cell_count <= zaslavsky_bound(w, 2);
        pass &= ok;
        rows.push(json!({"W": w, "cells": rep.cell_count, "expected": formula, "pass": ok}));
    }
    Ok(Outcome {
        contract: "20 generic arrangements of W ≤ 6 lines: exact cell count = 1 + W + C(W,2)".into(),
        measured: json!({ "rows": rows }),
        pass,
    })
}

/// Nodal basis on the 3×3 Kuhn grid: Kronecker property, partition of
/// unity and exact reproduction of nodal data.
pub(super) fn fem_nodal(opts: &ClaimOptions) -> Result<Outcome, ClaimError> {
    let samples = opts.grid.unwrap_or(1000);
    let grid = KuhnGrid::new(2, 3)?;
    let verts = grid.vertices();
    let basis: Vec<ReluNet<Q>> = verts.iter().map(|v| fem_basis_net(&grid, v)).collect::<Result<_, _>>()?;
    let mut delta_ok = true;
    for (i, phi) in basis.iter().enumerate() {
        for (j, v) in verts.iter().enumerate() {
            delta_ok &= phi.eval1(&grid.point::<Q>(v))? == qi((i == j) as i64);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let fbasis: Vec<ReluNet<f64>> = basis.iter().map(|b| b.to_mode()).collect();
    let fpts: Vec<Vec<f64>> = (0..samples).map(|_| vec![rng.random::<f64>(), rng.random::<f64>()]).collect();
    let pu_dev = fpts
        .iter()
        .map(|x| Ok((fbasis.iter().map(|b| b.eval1(x)).sum::<Result<f64, NetError>>()? - 1.0).abs()))
        .collect::<Result<Vec<f64>, NetError>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let values: Vec<Q> = verts.iter().map(|_| q(rng.random_range(-100..=100), rng.random_range(1..=7))).collect();
    let qpts = random_points(2, 200, &mut rng);
    let mut reproduce = Vec::new();
    for stacking in [Stacking::Parallel, Stacking::Deep] {
        let net = fem_combination(&grid, &values, stacking)?;
        let mut ok = true;
        for (v, s) in verts.iter().zip(&values) {
            ok &= net.eval1(&grid.point::<Q>(v))? == *s;
        }
        for x in &qpts {
            let want = basis.iter().zip(&values).map(|(b, s)| Ok(b.eval1(x)? * s)).sum::<Result<Q, NetError>>()?;
            ok &= net.eval1(x)? == want;
        }
        reproduce.push(json!({"stacking": format!("{stacking:?}"), "exact": ok, "width": net.width(), "depth": net.depth()}));
    }
    let rep_ok = reproduce.iter().all(|r| r["exact"] == true);
    Ok(Outcome {
        contract: format!("d=2, n=3: φ_v(v') = δ_vv' exactly; |Σφ_v - 1| ≤ 1e-9 at {samples} points; combinations reproduce nodal data exactly"),
        measured: json!({"kronecker": delta_ok, "partition_of_unity_deviation": pu_dev, "combinations": reproduce}),
        pass: delta_ok && pu_dev <= 1e-9 + opts.tolerance && rep_ok,
    })
}

/// Shallow networks shatter `W + 1` points, a single neuron cannot fit an
/// alternating pattern, and bit extraction shatters `n²/4` sites.
pub(super) fn shattering(opts: &ClaimOptions) -> Result<Outcome, ClaimError> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut shallow = Vec::new();
    for w in 1..=5usize {
        let mut raw: Vec<i64> = Vec::new();
        while raw.len() < w + 1 {
            let v = rng.random_range(-1000..=1000);
            if !raw.contains(&v) {
                raw.push(v);
            }
        }
        let pts: Vec<Q> = raw.iter().map(|&v| q(v, 100)).collect();
        shallow.push((w, shatters(&ShatterBuilder::ShallowInterpolant { width: w }, &pts)?));
    }
    let single = shatter_check(
        &ShatterBuilder::SingleNeuron { step: q(1, 100), bound: qi(1) },
        &[qi(0), q(1, 2), qi(1)],
        &[1, -1, 1],
    )?;
    let mut bits = Vec::new();
    for n in [4usize, 6] {
        let k = (n * n).div_ceil(4);
        let sites: Vec<Q> = bit_extract_sites(n).into_iter().take(k).collect();
        let ok = shatters(&ShatterBuilder::BitExtract { n }, &sites)?;
        let depth = bit_extract_net(&BitExtractPlan::new(n, [1, -1].repeat(n * n / 2))?)?.depth();
        bits.push((n, k, ok, depth));
    }
    let pass = shallow.iter().all(|s| s.1) && !single.realized && bits.iter().all(|b| b.2 && b.3 <= 15 * b.0 + 2);
    Ok(Outcome {
        contract: "Υ^{W,1} shatters W+1 points (W ≤ 5); Υ^{1,1} misses (+,-,+) on the (w,b) grid of step 1/100 in [-1,1]²; bit extraction shatters ⌈n²/4⌉ sites at depth ≤ 15n+2 (n = 4, 6)".into(),
        measured: json!({
            "shallow": shallow.iter().map(|s| json!({"W": s.0, "shatters": s.1})).collect::<Vec<_>>(),
            "single_neuron_realizes_alternating": single.realized,
            "bit_extraction": bits.iter().map(|b| json!({"n": b.0, "points": b.1, "shatters": b.2, "depth": b.3})).collect::<Vec<_>>(),
        }),
        pass,
    })
}

/// The calculus preserves evaluation exactly, special networks realize
/// faithfully, and the realization map has finite, radius-monotone
/// Lipschitz ratios.
pub(super) fn realization(opts: &ClaimOptions) -> Result<Outcome, ClaimError> {
    let per_axis = opts.grid.unwrap_or(9);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let a = random_rational_net(2, &[3, 3], &mut rng)?;
    let b = random_rational_net(2, &[2, 4], &mut rng)?;
    let outer = random_rational_net(1, &[3], &mut rng)?;
    let t = random_rational_net(1, &[2], &mut rng)?;
    let (al, be) = (q(3, 2), q(-2, 3));
    let square = BoxDomain::cube(2, qi(-1), qi(1));
    let pts = square.grid(per_axis)?;
    let mut checks: Vec<(&str, bool)> = Vec::new();

    let stack = parallel_stack(&[a.clone(), b.clone()])?;
    let sum = parallelize_sum(&[a.clone(), b.clone()], &[al.clone(), be.clone()])?;
    let comp = concatenate_compose(&outer, &a)?;
    let relu = relu_output(&a)?;
    let c = vec![q(1, 3), q(-1, 5)];
    let sd = shift_dilate(&a, &q(-3, 2), &c)?;
    let map = AffineMap::new(vec![vec![qi(1), qi(2)], vec![q(-1, 2), qi(3)]], vec![q(1, 7), qi(0)])?;
    let pre = precompose_affine(&a, &map)?;
    let deep = add_by_depth(&[a.clone(), b.clone()], &[al.clone(), be.clone()], &square)?;
    let deep_relu = special_to_relu(&deep, &square)?;
    let mut ok = [true; 8];
    for x in &pts {
        let (va, vb) = (a.eval1(x)?, b.eval1(x)?);
        let lin = &al * &va + &be * &vb;
        ok[0] &= stack.eval(x)? == vec![va.clone(), vb.clone()];
        ok[1] &= sum.eval1(x)? == lin;
        ok[2] &= comp.eval1(x)? == outer.eval1(std::slice::from_ref(&va))?;
        ok[3] &= relu.eval1(x)? == va.relu();
        let y: Vec<Q> = x.iter().zip(&c).map(|(v, ci)| q(-3, 2) * v + ci).collect();
        ok[4] &= sd.eval1(x)? == a.eval1(&y)?;
        ok[5] &= pre.eval1(x)? == a.eval1(&map.apply(x))?;
        ok[6] &= deep.eval1(x)? == lin;
        ok[7] &= deep_relu.eval1(x)? == lin;
    }
    for (name, v) in ["parallel_stack", "parallelize_sum", "concatenate_compose", "relu_output", "shift_dilate", "precompose_affine", "add_by_depth", "special_to_relu(add_by_depth)"].into_iter().zip(ok) {
        checks.push((name, v));
    }
    let alpha = [qi(1), q(-1, 2), q(1, 3)];
    let dom = BoxDomain::cube(1, qi(-2), qi(2));
    let ps = power_sum(&t, &alpha, &dom)?;
    let mut ps_ok = true;
    for x in dom.grid(4 * per_axis + 1)? {
        let mut cur = x[0].clone();
        let mut want = qi(0);
        for c in &alpha {
            cur = t.eval1(&[cur])?;
            want += c * &cur;
        }
        ps_ok &= ps.eval1(&x)? == want;
    }
    checks.push(("special_to_relu(power_sum)", ps_ok));

    let arch = Architecture { d: 1, width: 3, depth: 2 };
    let rows = lipschitz_probe(&arch, &[0.5, 1.0, 2.0, 4.0], 40, 33, opts.seed)?;
    let lip_ok = rows.iter().all(|r| r.max_ratio.is_finite()) && rows.windows(2).all(|w| w[1].max_ratio >= w[0].max_ratio);
    let pass = checks.iter().all(|c| c.1) && lip_ok;
    Ok(Outcome {
        contract: "calculus operations and special_to_relu agree exactly with the composed evaluations on a grid; Lipschitz ratios finite and nondecreasing in the radius".into(),
        measured: json!({
            "eval_preserving": checks.iter().map(|(n, v)| json!({"op": n, "exact": v})).collect::<Vec<_>>(),
            "lipschitz": rows,
        }),
        pass,
    })
}
