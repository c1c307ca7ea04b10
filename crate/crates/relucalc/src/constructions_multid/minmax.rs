//! Minimum and maximum networks: pairwise tournaments (shallow and wide) and
//! running recursions (deep and narrow), over affine functions or over the
//! outputs of other networks.

use serde::{Deserialize, Serialize};

use crate::net_calculus::parallel_stack;
use crate::net_core::special::{subnet_output, subnet_rows};
use crate::net_core::{
    special_to_relu, Affine, BoxDomain, ChannelRole, Layer, NetError, ReluNet, Scalar, SpecialBuilder,
};

/// Which extremum to take.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Extremum {
    Min,
    Max,
}

impl Extremum {
    pub fn apply<T: Scalar>(self, vals: &[T]) -> Option<T> {
        let mut it = vals.iter();
        let first = it.next()?.clone();
        Some(it.fold(first, |acc, v| match self {
            Extremum::Min => T::min_of(&acc, v),
            Extremum::Max => T::max_of(&acc, v),
        }))
    }
}

/// Architecture used for a min/max of affine functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MinMaxStrategy {
    /// Pairwise tournament: width `3·2^{⌈log₂ m⌉-1}`, depth `⌈log₂ m⌉`.
    Tournament,
    /// Running extremum: width `d+1`, depth `m-1`, valid on a bounded box.
    Recursive,
}

/// How several networks are combined into one min/max network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stacking {
    /// Side by side, followed by a tournament on the outputs.
    Parallel,
    /// One after another with a running extremum in a collation channel.
    Deep,
}

/// Nonempty family of affine functions `z_j(x) = w_j · x + b_j` on `R^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineFamily<T> {
    members: Vec<(Vec<T>, T)>,
}

impl<T: Scalar> AffineFamily<T> {
    pub fn new(members: Vec<(Vec<T>, T)>) -> Result<Self, NetError> {
        let d = members.first().ok_or_else(|| NetError::Contract("affine family must be nonempty".into()))?.0.len();
        if d == 0 || members.iter().any(|(w, _)| w.len() != d) {
            return Err(NetError::Shape("all members need the same positive input dimension".into()));
        }
        Ok(AffineFamily { members })
    }

    pub fn dim(&self) -> usize {
        self.members[0].0.len()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[(Vec<T>, T)] {
        &self.members
    }

    /// Values `z_j(x)`.
    pub fn eval(&self, x: &[T]) -> Vec<T> {
        self.members
            .iter()
            .map(|(w, b)| w.iter().zip(x).fold(b.clone(), |s, (a, v)| s + a.clone() * v.clone()))
            .collect()
    }

    /// Reference value `min_j z_j(x)` or `max_j z_j(x)`.
    pub fn extremum(&self, op: Extremum, x: &[T]) -> T {
        op.apply(&self.eval(x)).expect("nonempty family")
    }

    /// The family padded to `m` members by repeating the last one (does not
    /// change the min or max).
    pub fn padded(&self, m: usize) -> Self {
        let mut members = self.members.clone();
        while members.len() < m {
            members.push(members.last().unwrap().clone());
        }
        AffineFamily { members }
    }

    fn expr(&self, j: usize) -> Affine<T> {
        let (w, b) = &self.members[j];
        w.iter()
            .enumerate()
            .filter(|(_, a)| !a.is_zero())
            .fold(Affine::constant(b.clone()), |e, (i, a)| e.plus(&Affine::term(i, a.clone())))
    }
}

/// `⌈log₂ m⌉` for `m ≥ 1`.
pub fn ceil_log2(m: usize) -> usize {
    (usize::BITS - (m.max(1) - 1).leading_zeros()) as usize
}

type Row<T> = (Vec<T>, T);

fn row_comb<T: Scalar>(a: &Row<T>, sa: &T, b: &Row<T>, sb: &T) -> Row<T> {
    let w = a.0.iter().zip(&b.0).map(|(x, y)| sa.clone() * x.clone() + sb.clone() * y.clone()).collect();
    (w, sa.clone() * a.1.clone() + sb.clone() * b.1.clone())
}

/// Hidden layers of a pairwise tournament over affine functions `rows` of
/// some input vector, and the output row over the last hidden layer.
///
/// A pair uses three ReLU nodes: `min(a, b) = b_+ - (-b)_+ - (b - a)_+` and
/// `max(a, b) = b_+ - (-b)_+ + (a - b)_+`.  A single function is forwarded
/// through `z_+ - (-z)_+`.
pub(crate) fn tournament<T: Scalar>(rows: Vec<Row<T>>, op: Extremum) -> (Vec<Layer<T>>, Row<T>) {
    let (one, zero) = (T::one(), T::zero());
    let m = rows.len();
    if m == 1 {
        let z = rows.into_iter().next().unwrap();
        let neg = row_comb(&z, &-one.clone(), &z, &zero);
        let layer = Layer { w: vec![z.0, neg.0], b: vec![z.1, neg.1] };
        return (vec![layer], (vec![one.clone(), -one], zero));
    }
    let k = ceil_log2(m);
    let mut cur = rows;
    while cur.len() < (1 << k) {
        cur.push(cur.last().unwrap().clone());
    }
    let mut layers = Vec::with_capacity(k);
    while cur.len() > 1 {
        let pairs = cur.len() / 2;
        let (mut w, mut b) = (Vec::with_capacity(3 * pairs), Vec::with_capacity(3 * pairs));
        for p in 0..pairs {
            let (a, bb) = (&cur[2 * p], &cur[2 * p + 1]);
            let third = match op {
                Extremum::Min => row_comb(bb, &one, a, &-one.clone()),
                Extremum::Max => row_comb(a, &one, bb, &-one.clone()),
            };
            let neg = row_comb(bb, &-one.clone(), bb, &zero);
            for node in [bb.clone(), neg, third] {
                w.push(node.0);
                b.push(node.1);
            }
        }
        layers.push(Layer { w, b });
        let sign = if op == Extremum::Min { -one.clone() } else { one.clone() };
        cur = (0..pairs)
            .map(|p| {
                let mut r = vec![zero.clone(); 3 * pairs];
                r[3 * p] = one.clone();
                r[3 * p + 1] = -one.clone();
                r[3 * p + 2] = sign.clone();
                (r, zero.clone())
            })
            .collect();
    }
    (layers, cur.pop().unwrap())
}

fn finish_with<T: Scalar>(
    d: usize,
    mut layers: Vec<Layer<T>>,
    out: Row<T>,
    apply_relu: bool,
) -> Result<ReluNet<T>, NetError> {
    if apply_relu {
        layers.push(Layer { w: vec![out.0], b: vec![out.1] });
        layers.push(Layer { w: vec![vec![T::one()]], b: vec![T::zero()] });
    } else {
        layers.push(Layer { w: vec![out.0], b: vec![out.1] });
    }
    ReluNet::new(d, 1, layers)
}

/// `min_j z_j` or `max_j z_j` of an affine family, optionally followed by a
/// ReLU.  The tournament is exact on all of `R^d`; the recursion needs a
/// bounded `region` on which its source channels are realized.
pub fn minmax_affine<T: Scalar>(
    family: &AffineFamily<T>,
    op: Extremum,
    strategy: MinMaxStrategy,
    apply_relu: bool,
    region: Option<&BoxDomain<T>>,
) -> Result<ReluNet<T>, NetError> {
    let d = family.dim();
    match strategy {
        MinMaxStrategy::Tournament => {
            let (layers, out) = tournament(family.members.clone(), op);
            finish_with(d, layers, out, apply_relu)
        }
        MinMaxStrategy::Recursive => {
            let region = region.ok_or_else(|| NetError::Unbounded("the recursive min/max needs a bounded box".into()))?;
            let mut roles: Vec<ChannelRole> = (0..d).map(ChannelRole::source).collect();
            roles.push(ChannelRole::compute());
            let c = d;
            let mut b = SpecialBuilder::new(d, roles);
            let m = family.len();
            let out = recursive_rows(&mut b, family, op, c, None)?;
            let out = if apply_relu {
                let mut r = b.blank();
                r[c] = out;
                b.push(r)?;
                Affine::var(c)
            } else if m == 1 {
                // Forward the sources through one layer; the output is affine.
                let r = b.blank();
                b.push(r)?;
                out
            } else {
                out
            };
            special_to_relu(&b.finish(vec![out], None)?, region)
        }
    }
}

/// Push the `m - 1` layers of the running extremum of `family` (whose
/// inputs are the builder's source channels) using compute channel `c`;
/// returns the expression of the extremum over the last pushed layer.
///
/// With `coll = Some((ch, pending))` the collation channel `ch` is carried
/// along, and `pending` (an expression over the previous layer) is added to
/// it on the first pushed layer and reset to zero.
pub(crate) fn recursive_rows<T: Scalar>(
    b: &mut SpecialBuilder<T>,
    family: &AffineFamily<T>,
    op: Extremum,
    c: usize,
    mut coll: Option<(usize, &mut Affine<T>)>,
) -> Result<Affine<T>, NetError> {
    // Sources occupy channels 0..d, which coincide with the input indices.
    let z = |j: usize| family.expr(j);
    let m = family.len();
    let mut mu = z(0);
    for k in 1..m {
        let mut r = b.blank();
        r[c] = match op {
            Extremum::Max => mu.minus(&z(k)),
            Extremum::Min => z(k).minus(&mu),
        };
        if let Some((ch, pending)) = coll.as_mut() {
            r[*ch] = carry_collation(b, *ch, pending);
        }
        b.push(r)?;
        mu = match op {
            Extremum::Max => z(k).plus(&Affine::var(c)),
            Extremum::Min => z(k).minus(&Affine::var(c)),
        };
    }
    Ok(mu)
}

/// Row of collation channel `ch` for the next layer: the running value plus
/// the pending contribution (which is consumed).
pub(crate) fn carry_collation<T: Scalar>(b: &SpecialBuilder<T>, ch: usize, pending: &mut Affine<T>) -> Affine<T> {
    let base = if b.depth() == 0 { Affine::zero() } else { Affine::var(ch) };
    base.plus(&std::mem::replace(pending, Affine::zero()))
}

/// Pointwise min/max of the outputs of scalar networks.
///
/// * [`Stacking::Parallel`]: the networks (equal depth `L₀`) run side by
///   side and a tournament finishes: width `Σ W_j` (at least
///   `3·2^{⌈log₂ m⌉-1}`), depth `L₀ + ⌈log₂ m⌉`, exact on `R^d`.
/// * [`Stacking::Deep`]: the networks run one after another next to `d`
///   source channels and one collation channel holding the running
///   extremum; width `max W_j + d + 1`, depth `Σ L_j + m - 1`, realized on
///   the bounded `region`.
pub fn minmax_outputs<T: Scalar>(
    nets: &[ReluNet<T>],
    op: Extremum,
    stacking: Stacking,
    region: Option<&BoxDomain<T>>,
) -> Result<ReluNet<T>, NetError> {
    let first = nets.first().ok_or_else(|| NetError::Contract("need at least one network".into()))?;
    let d = first.input_dim();
    if nets.iter().any(|n| n.input_dim() != d || n.output_dim() != 1) {
        return Err(NetError::Shape("networks must share the input dimension and have one output".into()));
    }
    if nets.len() == 1 {
        return Ok(first.clone());
    }
    match stacking {
        Stacking::Parallel => {
            if nets.iter().any(|n| n.depth() != first.depth()) {
                return Err(NetError::Contract("parallel min/max needs networks of equal depth".into()));
            }
            let stacked = parallel_stack(nets)?;
            let out = stacked.output_layer();
            let rows: Vec<Row<T>> = out.w.iter().cloned().zip(out.b.iter().cloned()).collect();
            let (tail, row) = tournament(rows, op);
            let mut layers = stacked.hidden().to_vec();
            // Splice the first tournament layer onto the stacked outputs: its
            // rows are already expressed over the last stacked hidden layer.
            layers.extend(tail);
            finish_with(d, layers, row, false)
        }
        Stacking::Deep => {
            let region = region.ok_or_else(|| NetError::Unbounded("the deep min/max needs a bounded box".into()))?;
            let w0 = nets.iter().map(|n| n.width()).max().unwrap_or(1);
            let compute: Vec<usize> = (d..d + w0.max(1)).collect();
            let coll = d + w0.max(1);
            let mut roles: Vec<ChannelRole> = (0..d).map(ChannelRole::source).collect();
            roles.extend(std::iter::repeat_n(ChannelRole::compute(), w0.max(1)));
            roles.push(ChannelRole::collation());
            let mut b = SpecialBuilder::new(d, roles);
            let u = compute[0];
            let mut prev_out: Option<Affine<T>> = None;
            for (j, net) in nets.iter().enumerate() {
                for li in 0..net.depth() {
                    let mut r = b.blank();
                    let inputs = b.inputs();
                    for (ch, row) in subnet_rows(net, li, &compute, &inputs) {
                        r[ch] = row;
                    }
                    r[coll] = if li > 0 || j == 0 {
                        Affine::var(coll)
                    } else if j == 1 {
                        prev_out.take().expect("output of the first network")
                    } else {
                        match op {
                            Extremum::Min => Affine::var(coll).minus(&Affine::var(u)),
                            Extremum::Max => Affine::var(coll).plus(&Affine::var(u)),
                        }
                    };
                    if j == 0 {
                        r[coll] = Affine::zero();
                    }
                    b.push(r)?;
                }
                let s = subnet_output(net, &compute).swap_remove(0);
                if j == 0 {
                    prev_out = Some(s);
                    continue;
                }
                // Junction: u = (T - S_j)_+ for min, (S_j - T)_+ for max.
                let mut r = b.blank();
                r[u] = match op {
                    Extremum::Min => Affine::var(coll).minus(&s),
                    Extremum::Max => s.minus(&Affine::var(coll)),
                };
                r[coll] = Affine::var(coll);
                b.push(r)?;
            }
            let out = match op {
                Extremum::Min => Affine::var(coll).minus(&Affine::var(u)),
                Extremum::Max => Affine::var(coll).plus(&Affine::var(u)),
            };
            special_to_relu(&b.finish(vec![out], None)?, region)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions_1d::{hat01, sawtooth};
    use crate::net_core::{q, qi, Q};

    fn fam() -> AffineFamily<Q> {
        AffineFamily::new(vec![
            (vec![qi(1), qi(2)], qi(0)),
            (vec![qi(-1), qi(1)], q(1, 2)),
            (vec![qi(0), qi(-3)], qi(1)),
            (vec![q(1, 3), qi(0)], qi(-1)),
            (vec![qi(2), qi(-1)], q(1, 4)),
        ])
        .unwrap()
    }

    #[test]
    fn ceil_log2_values() {
        assert_eq!([1, 2, 3, 4, 5, 8, 9].map(ceil_log2), [0, 1, 2, 2, 3, 3, 4]);
    }

    #[test]
    fn tournament_contract_and_values() {
        let f = fam();
        let net = minmax_affine(&f, Extremum::Min, MinMaxStrategy::Tournament, false, None).unwrap();
        assert_eq!((net.width(), net.depth()), (12, 3));
        for i in -4..=4 {
            for j in -4..=4 {
                let x = vec![q(i, 3), q(j, 2)];
                assert_eq!(net.eval1(&x).unwrap(), f.extremum(Extremum::Min, &x));
            }
        }
    }

    #[test]
    fn recursive_contract_and_values() {
        let f = fam();
        let unit = BoxDomain::unit(2);
        for op in [Extremum::Min, Extremum::Max] {
            let net = minmax_affine(&f, op, MinMaxStrategy::Recursive, true, Some(&unit)).unwrap();
            assert_eq!((net.width(), net.depth()), (3, 5));
            for x in unit.grid(9).unwrap() {
                assert_eq!(net.eval1(&x).unwrap(), f.extremum(op, &x).relu());
            }
        }
        assert!(minmax_affine(&f, Extremum::Min, MinMaxStrategy::Recursive, false, None).is_err());
    }

    #[test]
    fn half_symmetry() {
        let f = AffineFamily::new(vec![(vec![qi(1)], qi(0)), (vec![qi(-1)], qi(1))]).unwrap();
        let net = minmax_affine(&f, Extremum::Max, MinMaxStrategy::Tournament, false, None).unwrap();
        assert_eq!(net.eval1(&[q(1, 2)]).unwrap(), q(1, 2));
    }

    #[test]
    fn outputs_parallel_and_deep() {
        let nets = vec![hat01::<Q>(), sawtooth::<Q>(1), hat01::<Q>().affine_output(&q(1, 2), &q(1, 8))];
        let unit = BoxDomain::unit(1);
        for op in [Extremum::Min, Extremum::Max] {
            let par = minmax_outputs(&nets, op, Stacking::Parallel, None).unwrap();
            let deep = minmax_outputs(&nets, op, Stacking::Deep, Some(&unit)).unwrap();
            assert_eq!(deep.depth(), 3 + 2);
            for k in 0..=64 {
                let x = vec![q(k, 64)];
                let vals: Vec<Q> = nets.iter().map(|n| n.eval1(&x).unwrap()).collect();
                let want = op.apply(&vals).unwrap();
                assert_eq!(par.eval1(&x).unwrap(), want);
                assert_eq!(deep.eval1(&x).unwrap(), want);
            }
        }
    }
}
