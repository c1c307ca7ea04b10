//! Bit extraction: a width-11 network of depth `O(n)` that interpolates
//! `N = n²` prescribed ±1 increments at the equispaced points `t_i = i/N`.
//!
//! Channel layout (0-based):
//!
//! | channel | role                                                         |
//! |---------|--------------------------------------------------------------|
//! | 0       | source, forwards `t` (`t ≥ 0`, so no ReLU-free flag needed)  |
//! | 1–6     | compute: knot terms, quantizer pair, `(ν-K)_+`, the three `T` nodes |
//! | 7–9     | collation: `J`/`K`/`S̃` carries, `Y` and residuals, `K` and envelopes |
//! | 10      | collation: coarse interpolant (only used by the Lipschitz approximant) |
//!
//! Stages, all on `[0, 1]`:
//!
//! 1. `2n-1` layers build `J` and `Y` (same breakpoints) and, optionally,
//!    the coarse interpolant `S₀`.
//! 2. `2n-1` layers build `K(t) = J(n t - J(t))`.
//! 3. `n+1` layers run the surrogate quantizer recursion on `Y` and sum
//!    `T(B̂_ν + 3(ν-K)_+)` into `S̃`.
//! 4. `4n-1` layers build the envelopes `U` and `Û`.
//! 5. Two layers form `max(min(S̃, U), Û)`.
//!
//! Total depth `9n`, comfortably inside `15n + 2`.

use rand::seq::SliceRandom;
use rand::Rng;

use super::cpwl::Cpwl1D;
use crate::net_core::{
    lift_relu_free, q, qi, Affine, BoxDomain, ChannelRole, NetError, ReluNet, RoleKind, Scalar,
    SpecialBuilder, SpecialNet, Q,
};

pub const WIDTH: usize = 11;

/// Sign plan for bit extraction: `n` even, `N = n²` increments `ε_i = ±1`
/// whose partial sums `y_i` vanish at every multiple of `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitExtractPlan {
    n: usize,
    eps: Vec<i8>,
}

impl BitExtractPlan {
    pub fn new(n: usize, eps: Vec<i8>) -> Result<Self, NetError> {
        if n < 4 || !n.is_multiple_of(2) {
            return Err(NetError::Contract(format!("n must be even and at least 4, got {n}")));
        }
        if eps.len() != n * n {
            return Err(NetError::Contract(format!("need n² = {} signs, got {}", n * n, eps.len())));
        }
        if eps.iter().any(|e| *e != 1 && *e != -1) {
            return Err(NetError::Contract("signs must be ±1".into()));
        }
        let plan = BitExtractPlan { n, eps };
        let y = plan.values();
        if let Some(j) = (0..=n).find(|j| y[j * n] != 0) {
            return Err(NetError::Contract(format!("partial sum at t = {j}/{n} is {} (must be 0)", y[j * n])));
        }
        Ok(plan)
    }

    /// Parse a string of `+`/`-` characters.
    pub fn parse(n: usize, signs: &str) -> Result<Self, NetError> {
        let eps = signs
            .chars()
            .filter(|c| !c.is_whitespace() && *c != ',')
            .map(|c| match c {
                '+' => Ok(1),
                '-' => Ok(-1),
                other => Err(NetError::Parse(format!("sign must be + or -, got {other:?}"))),
            })
            .collect::<Result<Vec<i8>, _>>()?;
        Self::new(n, eps)
    }

    /// Plan from target values `y_0..y_N`.
    pub fn from_values(n: usize, y: &[i64]) -> Result<Self, NetError> {
        if y.len() != n * n + 1 || y[0] != 0 {
            return Err(NetError::Contract("need N+1 values starting at 0".into()));
        }
        let eps = y
            .windows(2)
            .map(|w| match w[1] - w[0] {
                1 => Ok(1),
                -1 => Ok(-1),
                _ => Err(NetError::Contract("consecutive values must differ by ±1".into())),
            })
            .collect::<Result<Vec<i8>, _>>()?;
        Self::new(n, eps)
    }

    /// Uniformly random admissible plan: each block of `n` signs is a random
    /// arrangement of `n/2` pluses and `n/2` minuses.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self, NetError> {
        let mut eps = Vec::with_capacity(n * n);
        for _ in 0..n {
            let mut block: Vec<i8> = (0..n).map(|k| if k < n / 2 { 1 } else { -1 }).collect();
            block.shuffle(rng);
            eps.extend(block);
        }
        Self::new(n, eps)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of increments `N = n²`.
    pub fn big_n(&self) -> usize {
        self.n * self.n
    }

    pub fn signs(&self) -> &[i8] {
        &self.eps
    }

    /// Partial sums `y_0 = 0, y_{i+1} = y_i + ε_i`.
    pub fn values(&self) -> Vec<i64> {
        let mut y = Vec::with_capacity(self.eps.len() + 1);
        y.push(0);
        for e in &self.eps {
            y.push(y.last().unwrap() + *e as i64);
        }
        y
    }

    /// `δ = 2^{-N}`.
    pub fn delta(&self) -> Q {
        Q::pow2(-(self.big_n() as i64))
    }

    /// Interpolation sites `t_i = i/N`.
    pub fn sites(&self) -> Vec<Q> {
        let nn = self.big_n() as i64;
        (0..=nn).map(|i| q(i, nn)).collect()
    }

    /// `Y_j = Σ_k ε_{jn+k} 2^{-k-1}`: block `j`'s signs read as binary digits.
    pub fn block_value(&self, j: usize) -> Q {
        (0..self.n).fold(qi(0), |s, k| s + qi(self.eps[j * self.n + k] as i64) * Q::pow2(-(k as i64) - 1))
    }
}

/// Surrogate bits `B̂_ν(x)` for `ν = 1..count`, computed by the quantizer
/// recursion with `Q̂(x) = -1 + (x/δ + 1)_+ - (x/δ - 1)_+`.
pub fn surrogate_bits(x: &Q, delta: &Q, count: usize) -> Vec<Q> {
    let qhat = |v: &Q| -> Q { qi(-1) + (v / delta + qi(1)).relu() - (v / delta - qi(1)).relu() };
    let mut r = x.clone();
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let b = qhat(&r);
        r = qi(2) * r - b.clone();
        out.push(b);
    }
    out
}

/// Knots and slope changes of a function given on `[0, 1]` by its values at
/// sorted nodes `0 = x_0 < … < x_m = 1`:  `f(t) = f(0) + s₀ t + Σ_k Δ_k (t - x_k)_+`
/// for the interior nodes.  Returns `(f(0), s₀, interior knots, Δ)`.
fn knot_form(nodes: &[Q], values: &[Q]) -> (Q, Q, Vec<Q>, Vec<Q>) {
    let slopes: Vec<Q> = (0..nodes.len() - 1)
        .map(|i| (&values[i + 1] - &values[i]) / (&nodes[i + 1] - &nodes[i]))
        .collect();
    let knots = nodes[1..nodes.len() - 1].to_vec();
    let jumps = (1..slopes.len()).map(|i| &slopes[i] - &slopes[i - 1]).collect();
    (values[0].clone(), slopes[0].clone(), knots, jumps)
}

fn var(c: usize) -> Affine<Q> {
    Affine::var(c)
}

fn term(c: usize, w: &Q) -> Affine<Q> {
    Affine::term(c, w.clone())
}

/// Partial sums `c + s t + Σ_{i<k} Δ_i (t - x_i)_+` for `k = 0..=len`.
fn partial_sums(c: &Q, s: &Q, knots: &[Q], jumps: &[Q]) -> Vec<Cpwl1D<Q>> {
    let mut acc = Cpwl1D::affine(s.clone(), c.clone());
    let mut out = vec![acc.clone()];
    for (x, d) in knots.iter().zip(jumps) {
        let ramp = Cpwl1D::new(vec![x.clone()], vec![qi(0)], qi(0), d.clone()).expect("single node");
        acc = acc.add(&ramp).simplify();
        out.push(acc.clone());
    }
    out
}

/// Special network together with certified lower bounds of every hidden
/// pre-activation of its ReLU-free channels on `[0, 1]`.
pub(crate) struct Assembled {
    pub snet: SpecialNet<Q>,
    pub lows: Vec<Vec<Option<Q>>>,
}

impl Assembled {
    pub fn to_relu(&self) -> Result<ReluNet<Q>, NetError> {
        lift_relu_free(&self.snet, &self.lows)
    }
}

/// Assemble the bit-extraction special network.  With `coarse = Some(v)`
/// (values of a function at `j/n`, `j = 0..n`) the output is
/// `S₀ + (2/N) S` where `S₀` interpolates `v` linearly.
///
/// The lower bounds are obtained from the construction rather than by
/// propagating intervals (which would be multiplied by `1/δ`) or by
/// extracting the exact piecewise-linear form (whose piece count grows like
/// `2^n` inside the quantizer ramps):
///
/// * channels that hold univariate partial sums in `t` or in
///   `s = n t - J(t)` are bounded by the exact range of that partial sum;
/// * the residuals satisfy `|R_ν| ≤ 2`, because `Q̂` clamps `R/δ` to
///   `[-1, 1]` and the excess over 1 at most doubles from `2^ν δ`;
/// * `T` takes values in `[-1, 1]`, so `ν` accumulated terms are `≥ -ν`
///   and `S̃ ≥ -n` everywhere (also on the ramps).
pub(crate) fn assemble(plan: &BitExtractPlan, coarse: Option<&[Q]>) -> Result<Assembled, NetError> {
    let n = plan.n;
    let ni = n as i64;
    let nn = plan.big_n() as i64;
    let delta = plan.delta();
    let inv_delta = Q::pow2(nn);
    let unit = (qi(0), qi(1));
    let low_on = |f: &Cpwl1D<Q>, a: &Q, b: &Q| Some(f.range_on(a, b).0);

    // Breakpoints shared by J and Y: ξ'_0 < ξ_1 < ξ'_1 < … < ξ_{n-1} < ξ'_{n-1}.
    let mut nodes = vec![qi(0)];
    let mut jv = vec![qi(0)];
    let mut yv = vec![plan.block_value(0)];
    for j in 0..n {
        let end = q(j as i64 + 1, ni);
        nodes.push(&end - &delta);
        jv.push(qi(j as i64));
        yv.push(plan.block_value(j));
        nodes.push(end);
        jv.push(qi(j as i64 + 1));
        yv.push(if j + 1 < n { plan.block_value(j + 1) } else { qi(0) });
    }
    // J and Y start flat, so their initial slope is zero.
    let (j0, _, knots, aj) = knot_form(&nodes, &jv);
    let (y0, _, _, ay) = knot_form(&nodes, &yv);
    debug_assert_eq!(knots.len(), 2 * n - 1);
    let j_parts = partial_sums(&j0, &qi(0), &knots, &aj);
    let y_parts = partial_sums(&y0, &qi(0), &knots, &ay);
    let j_full = j_parts.last().unwrap().clone();
    let y_full = y_parts.last().unwrap().clone();
    // Range of the inner argument s = n t - J(t) of K on [0, 1].
    let (s_lo, s_hi) = Cpwl1D::affine(qi(ni), qi(0)).add(&j_full.scale_add(&qi(-1), &qi(0))).range_on(&unit.0, &unit.1);

    // Coarse interpolant: knots at j/n, which are among the J knots.
    let s0 = coarse.map(|v| {
        let xs: Vec<Q> = (0..=n).map(|j| q(j as i64, ni)).collect();
        let (c, s, k, a) = knot_form(&xs, v);
        let mut per_knot = vec![qi(0); knots.len()];
        for (x, d) in k.iter().zip(a) {
            let idx = knots.iter().position(|b| b == x).expect("j/n is a J knot");
            per_knot[idx] = d;
        }
        let parts = partial_sums(&c, &s, &knots, &per_knot);
        (c, s, per_knot, parts)
    });
    let s0_jump = |k: usize| s0.as_ref().map_or(qi(0), |(_, _, a, _)| a[k].clone());
    let s0_low = |k: usize| match &s0 {
        Some((_, _, _, parts)) => low_on(&parts[k], &unit.0, &unit.1),
        None => Some(qi(0)),
    };
    let s0_full_low = s0_low(knots.len());

    let mut roles = vec![ChannelRole { kind: RoleKind::Source(0), relu_free: false }];
    roles.extend(std::iter::repeat_n(ChannelRole::compute(), 6));
    roles.extend(std::iter::repeat_n(ChannelRole::collation(), 4));
    let mut b = SpecialBuilder::new(1, roles);
    let mut lows: Vec<Vec<Option<Q>>> = Vec::new();
    // Lower bounds for the collation channels 7..=10 of one layer.
    let low_row = |l7: Option<Q>, l8: Option<Q>, l9: Option<Q>, l10: Option<Q>| {
        let mut row = vec![None; WIDTH];
        row[7] = l7;
        row[8] = l8;
        row[9] = l9;
        row[10] = l10;
        row
    };

    // Stage 1: J (ch7), Y (ch8), S₀ (ch10).
    for (k, knot) in knots.iter().enumerate() {
        let mut r = b.blank();
        r[1] = b.src(0).add_const(&-knot.clone());
        if k == 0 {
            r[7] = Affine::constant(j0.clone());
            r[8] = Affine::constant(y0.clone());
            if let Some((c, s, _, _)) = &s0 {
                r[10] = b.src(0).scale(s).add_const(c);
            }
        } else {
            r[7] = var(7).plus(&term(1, &aj[k - 1]));
            r[8] = var(8).plus(&term(1, &ay[k - 1]));
            r[10] = var(10).plus(&term(1, &s0_jump(k - 1)));
        }
        b.push(r)?;
        lows.push(low_row(
            low_on(&j_parts[k], &unit.0, &unit.1),
            low_on(&y_parts[k], &unit.0, &unit.1),
            Some(qi(0)),
            s0_low(k),
        ));
    }
    let last = knots.len() - 1;
    let j_low = low_on(&j_full, &unit.0, &unit.1);
    let y_low = low_on(&y_full, &unit.0, &unit.1);

    // Stage 2: K(t) = J(n t - J(t)) accumulated in ch9.
    for (k, knot) in knots.iter().enumerate() {
        let mut r = b.blank();
        let (j_expr, y_expr, s0_expr) = if k == 0 {
            (
                var(7).plus(&term(1, &aj[last])),
                var(8).plus(&term(1, &ay[last])),
                var(10).plus(&term(1, &s0_jump(last))),
            )
        } else {
            (var(7), var(8), var(10))
        };
        let s = term(0, &qi(ni)).minus(&j_expr);
        r[1] = s.add_const(&-knot.clone());
        r[7] = j_expr;
        r[8] = y_expr;
        r[10] = s0_expr;
        r[9] = if k == 0 { Affine::constant(j0.clone()) } else { var(9).plus(&term(1, &aj[k - 1])) };
        b.push(r)?;
        lows.push(low_row(j_low.clone(), y_low.clone(), low_on(&j_parts[k], &s_lo, &s_hi), s0_full_low.clone()));
    }
    let k_low = low_on(&j_full, &s_lo, &s_hi);

    // Stage 3: quantizer recursion and the sum S̃ = Σ_ν T(B̂_ν + 3(ν - K)_+).
    let bhat = || Affine::constant(qi(-1)).plus(&var(1)).minus(&var(2));
    let t_of_prev = || Affine::constant(qi(-1)).plus(&var(4)).plus(&term(5, &qi(-2))).plus(&var(6));
    {
        let mut r = b.blank();
        let k_expr = var(9).plus(&term(1, &aj[last]));
        r[1] = var(8).scale(&inv_delta).add_const(&qi(1));
        r[2] = var(8).scale(&inv_delta).add_const(&qi(-1));
        r[3] = Affine::constant(qi(1)).minus(&k_expr);
        r[7] = k_expr;
        r[8] = var(8);
        r[10] = var(10);
        b.push(r)?;
        lows.push(low_row(k_low.clone(), y_low.clone(), Some(qi(0)), s0_full_low.clone()));
    }
    for nu in 1..=n {
        let mut r = b.blank();
        let x = bhat().plus(&term(3, &qi(3)));
        r[4] = x.add_const(&qi(1));
        r[5] = x.add_const(&qi(-1));
        r[6] = x.add_const(&qi(-2));
        r[9] = if nu >= 2 { var(9).plus(&t_of_prev()) } else { var(9) };
        r[10] = var(10);
        let sum_low = Some(qi(-(nu as i64 - 1)));
        if nu < n {
            let resid = var(8).scale(&qi(2)).minus(&bhat());
            r[1] = resid.scale(&inv_delta).add_const(&qi(1));
            r[2] = resid.scale(&inv_delta).add_const(&qi(-1));
            r[8] = resid;
            r[3] = Affine::constant(qi(nu as i64 + 1)).minus(&var(7));
            r[7] = var(7);
            lows.push(low_row(k_low.clone(), Some(qi(-2)), sum_low, s0_full_low.clone()));
        } else {
            lows.push(low_row(Some(qi(0)), Some(qi(0)), sum_low, s0_full_low.clone()));
        }
        b.push(r)?;
    }
    let s_tilde = var(9).plus(&t_of_prev());
    let s_tilde_low = Some(qi(-ni));

    // Envelope height: on the safe region S̃ equals some y_k or y_k + η with
    // |η| ≤ 1, so max|y| + 1 dominates it.
    let y = plan.values();
    let m = qi(y.iter().map(|v| v.abs()).max().unwrap_or(0) + 1);

    // Stage 4: envelopes.  Both share the nodes
    // (j-1)/n, (j-1)/n + 1/N - δ, j/n - 1/N, j/n - δ for every block j, and 1.
    let mut env_nodes = Vec::with_capacity(4 * n + 1);
    let mut u_vals = Vec::with_capacity(4 * n + 1);
    let mut l_vals = Vec::with_capacity(4 * n + 1);
    for j in 1..=n {
        let start = q(j as i64 - 1, ni);
        let eta = y[j * n - 1];
        env_nodes.push(start.clone());
        env_nodes.push(&start + q(1, nn) - &delta);
        env_nodes.push(q(j as i64, ni) - q(1, nn));
        env_nodes.push(q(j as i64, ni) - &delta);
        u_vals.extend([qi(0), m.clone(), m.clone(), if eta > 0 { qi(1) } else { qi(0) }]);
        l_vals.extend([qi(0), -m.clone(), -m.clone(), if eta > 0 { qi(0) } else { qi(-1) }]);
    }
    env_nodes.push(qi(1));
    u_vals.push(qi(0));
    l_vals.push(qi(0));
    let (uc, us, env_knots, au) = knot_form(&env_nodes, &u_vals);
    let (lc, ls, _, al) = knot_form(&env_nodes, &l_vals);
    let u_parts = partial_sums(&uc, &us, &env_knots, &au);
    let l_parts = partial_sums(&lc, &ls, &env_knots, &al);
    let elast = env_knots.len() - 1;
    for (k, knot) in env_knots.iter().enumerate() {
        let mut r = b.blank();
        r[1] = var(0).add_const(&-knot.clone());
        r[10] = var(10);
        if k == 0 {
            r[7] = s_tilde.clone();
            r[8] = term(0, &us).add_const(&uc);
            r[9] = term(0, &ls).add_const(&lc);
        } else {
            r[7] = var(7);
            r[8] = var(8).plus(&term(1, &au[k - 1]));
            r[9] = var(9).plus(&term(1, &al[k - 1]));
        }
        b.push(r)?;
        lows.push(low_row(
            s_tilde_low.clone(),
            low_on(&u_parts[k], &unit.0, &unit.1),
            low_on(&l_parts[k], &unit.0, &unit.1),
            s0_full_low.clone(),
        ));
    }
    let u_expr = var(8).plus(&term(1, &au[elast]));
    let l_expr = var(9).plus(&term(1, &al[elast]));
    let l_low = low_on(l_parts.last().unwrap(), &unit.0, &unit.1);

    // Stage 5: min with U, then max with Û.
    {
        let mut r = b.blank();
        r[1] = var(7).minus(&u_expr); // (S̃ - U)_+
        r[7] = var(7);
        r[9] = l_expr;
        r[10] = var(10);
        b.push(r)?;
        lows.push(low_row(s_tilde_low.clone(), Some(qi(0)), l_low, s0_full_low.clone()));
    }
    {
        let mut r = b.blank();
        let min = var(7).minus(&var(1));
        r[1] = var(9).minus(&min); // (Û - min)_+
        r[7] = min;
        r[10] = var(10);
        b.push(r)?;
        lows.push(low_row(s_tilde_low, Some(qi(0)), Some(qi(0)), s0_full_low));
    }
    let s1 = var(7).plus(&var(1));
    let out = match coarse {
        None => s1,
        Some(_) => var(10).plus(&s1.scale(&q(2, nn))),
    };
    let snet = b.finish(vec![out], Some(BoxDomain::unit(1)))?;
    Ok(Assembled { snet, lows })
}

/// The bit-extraction network as a special network (ReLU-free collation
/// channels, domain `[0, 1]`).
pub fn bit_extract_special(plan: &BitExtractPlan) -> Result<SpecialNet<Q>, NetError> {
    Ok(assemble(plan, None)?.snet)
}

/// The bit-extraction network as a plain ReLU network on `[0, 1]`: width 11,
/// depth `9n ≤ 15n + 2`, exact interpolation `S(t_i) = y_i`.
pub fn bit_extract_net(plan: &BitExtractPlan) -> Result<ReluNet<Q>, NetError> {
    assemble(plan, None)?.to_relu()
}
