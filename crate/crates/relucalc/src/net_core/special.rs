//! Special networks: constant-width ReLU networks whose channels carry a role.
//!
//! A *source* channel forwards one input coordinate unchanged through every
//! layer, a *collation* channel accumulates partial sums, and *compute*
//! channels do ordinary ReLU work.  Source and collation nodes may be flagged
//! ReLU-free (pure affine).  On a bounded box every ReLU-free node can be
//! turned into a genuine ReLU node by lifting its bias above the node's
//! lower bound and subtracting the lift again downstream, which is what
//! [`special_to_relu`] does.

use super::net::{Layer, ReluNet};
use super::numeric::Scalar;
use super::NetError;

/// What a hidden channel is used for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoleKind {
    /// Carries input coordinate `i` (0-based) through every layer.
    Source(usize),
    /// Accumulates partial results.
    Collation,
    /// Ordinary ReLU channel.
    Compute,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChannelRole {
    pub kind: RoleKind,
    pub relu_free: bool,
}

impl ChannelRole {
    pub fn source(i: usize) -> Self {
        ChannelRole { kind: RoleKind::Source(i), relu_free: true }
    }
    pub fn collation() -> Self {
        ChannelRole { kind: RoleKind::Collation, relu_free: true }
    }
    pub fn compute() -> Self {
        ChannelRole { kind: RoleKind::Compute, relu_free: false }
    }
}

/// Closed interval with possibly infinite ends (`None`).
#[derive(Debug, Clone, PartialEq)]
pub struct Interval<T> {
    pub lo: Option<T>,
    pub hi: Option<T>,
}

impl<T: Scalar> Interval<T> {
    pub fn new(lo: T, hi: T) -> Self {
        Interval { lo: Some(lo), hi: Some(hi) }
    }

    pub fn unbounded() -> Self {
        Interval { lo: None, hi: None }
    }

    pub fn point(v: T) -> Self {
        Interval { lo: Some(v.clone()), hi: Some(v) }
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_some() && self.hi.is_some()
    }

    /// `c * self`.
    pub fn scale(&self, c: &T) -> Self {
        if c.is_zero() {
            return Interval::point(T::zero());
        }
        let lo = self.lo.as_ref().map(|v| v.clone() * c.clone());
        let hi = self.hi.as_ref().map(|v| v.clone() * c.clone());
        if *c > T::zero() {
            Interval { lo, hi }
        } else {
            Interval { lo: hi, hi: lo }
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let f = |a: &Option<T>, b: &Option<T>| match (a, b) {
            (Some(x), Some(y)) => Some(x.clone() + y.clone()),
            _ => None,
        };
        Interval { lo: f(&self.lo, &o.lo), hi: f(&self.hi, &o.hi) }
    }

    pub fn shift(&self, c: &T) -> Self {
        Interval {
            lo: self.lo.as_ref().map(|v| v.clone() + c.clone()),
            hi: self.hi.as_ref().map(|v| v.clone() + c.clone()),
        }
    }

    pub fn relu(&self) -> Self {
        Interval {
            lo: Some(self.lo.as_ref().map_or(T::zero(), |v| v.relu())),
            hi: self.hi.as_ref().map(|v| v.relu()),
        }
    }
}

/// Axis-aligned box `Π [lo_i, hi_i]` in `R^d`; ends may be infinite.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxDomain<T> {
    pub sides: Vec<Interval<T>>,
}

impl<T: Scalar> BoxDomain<T> {
    pub fn new(lo: Vec<T>, hi: Vec<T>) -> Result<Self, NetError> {
        if lo.len() != hi.len() {
            return Err(NetError::Shape("box corners differ in dimension".into()));
        }
        if lo.iter().zip(&hi).any(|(a, b)| a > b) {
            return Err(NetError::Contract("box has lo > hi".into()));
        }
        Ok(BoxDomain { sides: lo.into_iter().zip(hi).map(|(a, b)| Interval::new(a, b)).collect() })
    }

    /// `[a, b]^d`.
    pub fn cube(d: usize, a: T, b: T) -> Self {
        BoxDomain { sides: vec![Interval::new(a, b); d] }
    }

    /// The unit cube `[0,1]^d`.
    pub fn unit(d: usize) -> Self {
        Self::cube(d, T::zero(), T::one())
    }

    /// All of `R^d`.
    pub fn whole_space(d: usize) -> Self {
        BoxDomain { sides: vec![Interval::unbounded(); d] }
    }

    pub fn dim(&self) -> usize {
        self.sides.len()
    }

    pub fn is_bounded(&self) -> bool {
        self.sides.iter().all(|s| s.is_bounded())
    }

    pub fn lo(&self, i: usize) -> Option<&T> {
        self.sides[i].lo.as_ref()
    }

    pub fn hi(&self, i: usize) -> Option<&T> {
        self.sides[i].hi.as_ref()
    }

    pub fn contains(&self, x: &[T]) -> bool {
        x.len() == self.dim()
            && self.sides.iter().zip(x).all(|(s, v)| {
                s.lo.as_ref().is_none_or(|l| v >= l) && s.hi.as_ref().is_none_or(|h| v <= h)
            })
    }

    /// Tensor grid with `per_axis` equispaced points on each (bounded) side.
    pub fn grid(&self, per_axis: usize) -> Result<Vec<Vec<T>>, NetError> {
        if !self.is_bounded() {
            return Err(NetError::Unbounded("cannot grid an unbounded box".into()));
        }
        let axes: Vec<Vec<T>> = self
            .sides
            .iter()
            .map(|s| {
                let (a, b) = (s.lo.clone().unwrap(), s.hi.clone().unwrap());
                if per_axis <= 1 {
                    return vec![a];
                }
                let m = T::from_i64(per_axis as i64 - 1);
                (0..per_axis)
                    .map(|k| a.clone() + (b.clone() - a.clone()) * T::from_i64(k as i64) / m.clone())
                    .collect()
            })
            .collect();
        let mut pts = vec![Vec::new()];
        for axis in &axes {
            let mut next = Vec::with_capacity(pts.len() * axis.len());
            for p in &pts {
                for v in axis {
                    let mut q = p.clone();
                    q.push(v.clone());
                    next.push(q);
                }
            }
            pts = next;
        }
        Ok(pts)
    }
}

/// Sparse affine expression `c + Σ w_j v_j` over the channels of the
/// previous layer (or over the input coordinates for the first layer).
#[derive(Debug, Clone, PartialEq)]
pub struct Affine<T> {
    pub terms: Vec<(usize, T)>,
    pub c: T,
}

impl<T: Scalar> Affine<T> {
    pub fn zero() -> Self {
        Affine { terms: Vec::new(), c: T::zero() }
    }

    pub fn constant(c: T) -> Self {
        Affine { terms: Vec::new(), c }
    }

    pub fn var(j: usize) -> Self {
        Affine { terms: vec![(j, T::one())], c: T::zero() }
    }

    pub fn term(j: usize, w: T) -> Self {
        Affine { terms: vec![(j, w)], c: T::zero() }
    }

    pub fn scale(&self, a: &T) -> Self {
        Affine {
            terms: self.terms.iter().map(|(j, w)| (*j, w.clone() * a.clone())).collect(),
            c: self.c.clone() * a.clone(),
        }
    }

    pub fn plus(&self, o: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(o.terms.iter().cloned());
        Affine { terms, c: self.c.clone() + o.c.clone() }
    }

    pub fn minus(&self, o: &Self) -> Self {
        self.plus(&o.scale(&-T::one()))
    }

    pub fn add_const(&self, c: &T) -> Self {
        Affine { terms: self.terms.clone(), c: self.c.clone() + c.clone() }
    }

    /// Substitute each variable `j` by `subst[j]`.
    pub fn compose(&self, subst: &[Affine<T>]) -> Self {
        let mut out = Affine::constant(self.c.clone());
        for (j, w) in &self.terms {
            out = out.plus(&subst[*j].scale(w));
        }
        out
    }

    /// Dense coefficient row of length `n` (duplicate terms are summed).
    pub fn dense(&self, n: usize) -> Result<Vec<T>, NetError> {
        let mut row = vec![T::zero(); n];
        for (j, w) in &self.terms {
            if *j >= n {
                return Err(NetError::Shape(format!(
                    "affine term refers to channel {j} but the previous layer has {n}"
                )));
            }
            row[*j] = row[*j].clone() + w.clone();
        }
        Ok(row)
    }

    pub fn eval(&self, v: &[T]) -> T {
        self.terms
            .iter()
            .fold(self.c.clone(), |acc, (j, w)| acc + w.clone() * v[*j].clone())
    }
}

/// A constant-width network with channel roles.
#[derive(Debug, Clone, PartialEq)]
pub struct SpecialNet<T> {
    net: ReluNet<T>,
    roles: Vec<ChannelRole>,
    domain_hint: Option<BoxDomain<T>>,
}

impl<T: Scalar> SpecialNet<T> {
    /// Validate the role annotations against the weights.
    pub fn new(
        net: ReluNet<T>,
        roles: Vec<ChannelRole>,
        domain_hint: Option<BoxDomain<T>>,
    ) -> Result<Self, NetError> {
        if !net.is_constant_width() {
            return Err(NetError::Shape("special networks have constant width".into()));
        }
        let w = net.width();
        if roles.len() != w {
            return Err(NetError::Shape(format!("{} roles for width {}", roles.len(), w)));
        }
        let d = net.input_dim();
        if let Some(h) = &domain_hint {
            if h.dim() != d {
                return Err(NetError::Shape("domain hint dimension differs from input".into()));
            }
        }
        for (ch, role) in roles.iter().enumerate() {
            match role.kind {
                RoleKind::Compute if role.relu_free => {
                    return Err(NetError::Contract(format!(
                        "compute channel {ch} cannot be ReLU-free"
                    )))
                }
                RoleKind::Source(i) => {
                    if i >= d {
                        return Err(NetError::Contract(format!(
                            "source channel {ch} refers to coordinate {} of {d}",
                            i + 1
                        )));
                    }
                    for (li, layer) in net.hidden().iter().enumerate() {
                        let want = if li == 0 { i } else { ch };
                        let ok = layer.b[ch].is_zero()
                            && layer.w[ch]
                                .iter()
                                .enumerate()
                                .all(|(j, v)| if j == want { v.is_one() } else { v.is_zero() });
                        if !ok {
                            return Err(NetError::Contract(format!(
                                "source channel {ch} does not forward x_{} at layer {}",
                                i + 1,
                                li + 1
                            )));
                        }
                    }
                }
                _ => {}
            }
        }
        Ok(SpecialNet { net, roles, domain_hint })
    }

    pub fn net(&self) -> &ReluNet<T> {
        &self.net
    }

    pub fn roles(&self) -> &[ChannelRole] {
        &self.roles
    }

    pub fn domain_hint(&self) -> Option<&BoxDomain<T>> {
        self.domain_hint.as_ref()
    }

    pub fn with_domain_hint(mut self, hint: Option<BoxDomain<T>>) -> Self {
        self.domain_hint = hint;
        self
    }

    pub fn relu_free_mask(&self) -> Vec<bool> {
        self.roles.iter().map(|r| r.relu_free).collect()
    }

    pub fn has_relu_free(&self) -> bool {
        self.roles.iter().any(|r| r.relu_free)
    }

    pub fn input_dim(&self) -> usize {
        self.net.input_dim()
    }

    pub fn stats(&self) -> super::net::NetStats {
        self.net.stats()
    }

    pub fn eval(&self, x: &[T]) -> Result<Vec<T>, NetError> {
        if x.len() != self.net.input_dim() {
            return Err(NetError::Dimension { expected: self.net.input_dim(), got: x.len() });
        }
        Ok(self.net.forward(x, Some(&self.relu_free_mask())))
    }

    pub fn eval1(&self, x: &[T]) -> Result<T, NetError> {
        Ok(self.eval(x)?.swap_remove(0))
    }

    /// Pre-activations with ReLU-free channels left affine.
    pub fn preactivations(&self, x: &[T]) -> Result<Vec<Vec<T>>, NetError> {
        if x.len() != self.net.input_dim() {
            return Err(NetError::Dimension { expected: self.net.input_dim(), got: x.len() });
        }
        Ok(self.net.preactivations_masked(x, Some(&self.relu_free_mask())))
    }

    /// Treat an ordinary network as a special network with only compute
    /// channels (after padding to constant width).
    pub fn from_relu(net: &ReluNet<T>) -> Result<Self, NetError> {
        let padded = net.pad_to_width(net.width())?;
        let w = padded.width();
        SpecialNet::new(padded, vec![ChannelRole::compute(); w], None)
    }

    /// `x ↦ S(a x + c)`: only the first layer changes.  Source channels stop
    /// forwarding the raw coordinate and become collation channels.
    pub fn shift_dilate(&self, a: &T, c: &[T]) -> Result<Self, NetError> {
        let d = self.net.input_dim();
        if c.len() != d {
            return Err(NetError::Dimension { expected: d, got: c.len() });
        }
        let mut layers = self.net.layers().to_vec();
        let first = &mut layers[0];
        for (row, b) in first.w.iter_mut().zip(first.b.iter_mut()) {
            let shift = row.iter().zip(c).fold(T::zero(), |s, (w, ci)| s + w.clone() * ci.clone());
            *b = b.clone() + shift;
            for w in row.iter_mut() {
                *w = w.clone() * a.clone();
            }
        }
        let roles = self
            .roles
            .iter()
            .map(|r| match r.kind {
                RoleKind::Source(_) if !(a.is_one() && c.iter().all(|v| v.is_zero())) => {
                    ChannelRole { kind: RoleKind::Collation, relu_free: r.relu_free }
                }
                _ => *r,
            })
            .collect();
        SpecialNet::new(ReluNet::new(d, self.net.output_dim(), layers)?, roles, None)
    }
}

/// Interval enclosure of every hidden pre-activation over `dom`, with the
/// given channels treated as ReLU-free.
pub fn interval_bounds<T: Scalar>(
    net: &ReluNet<T>,
    relu_free: &[bool],
    dom: &BoxDomain<T>,
) -> Vec<Vec<Interval<T>>> {
    let mut v: Vec<Interval<T>> = dom.sides.clone();
    let mut out = Vec::with_capacity(net.depth());
    for layer in net.hidden() {
        let z: Vec<Interval<T>> = layer
            .w
            .iter()
            .zip(&layer.b)
            .map(|(row, b)| {
                row.iter()
                    .zip(&v)
                    .filter(|(w, _)| !w.is_zero())
                    .fold(Interval::point(b.clone()), |acc, (w, vi)| acc.add(&vi.scale(w)))
            })
            .collect();
        v = z
            .iter()
            .enumerate()
            .map(|(i, zi)| if relu_free.get(i).copied().unwrap_or(false) { zi.clone() } else { zi.relu() })
            .collect();
        out.push(z);
    }
    out
}

/// Realize a special network as a true ReLU network on the bounded box `k`.
///
/// Every ReLU-free node whose pre-activation can go negative on `k` gets its
/// bias raised by `-lo` (so the ReLU acts as the identity there) and every
/// consumer of that node subtracts the same amount through its bias.
pub fn special_to_relu<T: Scalar>(
    snet: &SpecialNet<T>,
    k: &BoxDomain<T>,
) -> Result<ReluNet<T>, NetError> {
    let net = snet.net();
    if k.dim() != net.input_dim() {
        return Err(NetError::Dimension { expected: net.input_dim(), got: k.dim() });
    }
    if !k.is_bounded() {
        return Err(NetError::Unbounded("special_to_relu needs a bounded box".into()));
    }
    if !snet.has_relu_free() {
        return Ok(net.clone());
    }
    let mask = snet.relu_free_mask();
    let lows: Vec<Vec<Option<T>>> = interval_bounds(net, &mask, k)
        .into_iter()
        .map(|layer| layer.into_iter().map(|iv| iv.lo).collect())
        .collect();
    lift_relu_free(snet, &lows)
}

/// Realize a special network as a ReLU network given lower bounds
/// `lows[layer][node]` of every hidden pre-activation on the domain of
/// interest (only the entries of ReLU-free nodes are read).
pub fn lift_relu_free<T: Scalar>(
    snet: &SpecialNet<T>,
    lows: &[Vec<Option<T>>],
) -> Result<ReluNet<T>, NetError> {
    let net = snet.net();
    let mask = snet.relu_free_mask();
    if lows.len() != net.depth() {
        return Err(NetError::Shape("one row of lower bounds per hidden layer required".into()));
    }
    let mut layers: Vec<Layer<T>> = net.layers().to_vec();
    for (li, zb) in lows.iter().enumerate() {
        for (i, free) in mask.iter().enumerate() {
            if !*free {
                continue;
            }
            let lo = zb.get(i).and_then(|v| v.as_ref()).ok_or_else(|| {
                NetError::Unbounded(format!("no lower bound for node {} of layer {}", i + 1, li + 1))
            })?;
            if *lo >= T::zero() {
                continue;
            }
            let lift = -lo.clone();
            layers[li].b[i] = layers[li].b[i].clone() + lift.clone();
            let next = &mut layers[li + 1];
            for r in 0..next.fan_out() {
                if !next.w[r][i].is_zero() {
                    let v = next.b[r].clone() - next.w[r][i].clone() * lift.clone();
                    next.b[r] = v;
                }
            }
        }
    }
    ReluNet::new(net.input_dim(), net.output_dim(), layers)
}

/// Extend a network to depth `target` by carrying each output `y` through
/// the pair `(y)_+`, `(-y)_+`.  Exact on all of `R^d`.
pub fn pad_depth<T: Scalar>(net: &ReluNet<T>, target: usize) -> Result<ReluNet<T>, NetError> {
    let depth = net.depth();
    if target < depth {
        return Err(NetError::Contract(format!("cannot shorten depth {depth} to {target}")));
    }
    if target == depth {
        return Ok(net.clone());
    }
    let m = net.output_dim();
    let mut layers: Vec<Layer<T>> = net.layers().to_vec();
    let out = layers.pop().expect("validated");
    // First carry layer: (±(W y + b))_+.
    let mut w = Vec::with_capacity(2 * m);
    let mut b = Vec::with_capacity(2 * m);
    for (row, bi) in out.w.iter().zip(&out.b) {
        w.push(row.clone());
        b.push(bi.clone());
        w.push(row.iter().map(|v| -v.clone()).collect());
        b.push(-bi.clone());
    }
    layers.push(Layer { w, b });
    let carry = |fan_out: usize| {
        let mut l = Layer::zeros(fan_out, 2 * m);
        for i in 0..fan_out {
            l.w[i][i] = T::one();
        }
        l
    };
    for _ in depth + 1..target {
        layers.push(carry(2 * m));
    }
    let mut last = Layer::zeros(m, 2 * m);
    for i in 0..m {
        last.w[i][2 * i] = T::one();
        last.w[i][2 * i + 1] = -T::one();
    }
    layers.push(last);
    ReluNet::new(net.input_dim(), m, layers)
}

/// Layer-by-layer assembly of a [`SpecialNet`].
///
/// Every layer is given as one [`Affine`] per channel over the previous
/// layer's channels (the input coordinates for layer one).  Source channels
/// are filled in automatically by [`SpecialBuilder::blank`].
#[derive(Debug, Clone)]
pub struct SpecialBuilder<T> {
    d: usize,
    roles: Vec<ChannelRole>,
    layers: Vec<Layer<T>>,
}

impl<T: Scalar> SpecialBuilder<T> {
    pub fn new(d: usize, roles: Vec<ChannelRole>) -> Self {
        SpecialBuilder { d, roles, layers: Vec::new() }
    }

    pub fn width(&self) -> usize {
        self.roles.len()
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn roles(&self) -> &[ChannelRole] {
        &self.roles
    }

    /// Channel index of the source channel carrying coordinate `i`.
    pub fn source_channel(&self, i: usize) -> usize {
        self.roles
            .iter()
            .position(|r| r.kind == RoleKind::Source(i))
            .unwrap_or_else(|| panic!("no source channel for coordinate {i}"))
    }

    /// Expression for coordinate `x_i` as seen by the layer being built.
    pub fn src(&self, i: usize) -> Affine<T> {
        if self.layers.is_empty() {
            Affine::var(i)
        } else {
            Affine::var(self.source_channel(i))
        }
    }

    /// All input coordinates as seen by the layer being built.
    pub fn inputs(&self) -> Vec<Affine<T>> {
        (0..self.d).map(|i| self.src(i)).collect()
    }

    /// A fresh layer: source channels forward their coordinate, every other
    /// channel is zero.
    pub fn blank(&self) -> Vec<Affine<T>> {
        self.roles
            .iter()
            .map(|r| match r.kind {
                RoleKind::Source(i) => self.src(i),
                _ => Affine::zero(),
            })
            .collect()
    }

    pub fn push(&mut self, rows: Vec<Affine<T>>) -> Result<(), NetError> {
        if rows.len() != self.width() {
            return Err(NetError::Shape(format!(
                "layer has {} rows, builder width is {}",
                rows.len(),
                self.width()
            )));
        }
        let fan_in = if self.layers.is_empty() { self.d } else { self.width() };
        let mut w = Vec::with_capacity(rows.len());
        let mut b = Vec::with_capacity(rows.len());
        for r in &rows {
            w.push(r.dense(fan_in)?);
            b.push(r.c.clone());
        }
        self.layers.push(Layer { w, b });
        Ok(())
    }

    pub fn finish(
        self,
        outputs: Vec<Affine<T>>,
        domain_hint: Option<BoxDomain<T>>,
    ) -> Result<SpecialNet<T>, NetError> {
        let fan_in = if self.layers.is_empty() { self.d } else { self.width() };
        let mut layers = self.layers;
        let mut w = Vec::new();
        let mut b = Vec::new();
        for o in &outputs {
            w.push(o.dense(fan_in)?);
            b.push(o.c.clone());
        }
        let d_out = outputs.len();
        layers.push(Layer { w, b });
        let net = ReluNet::new(self.d, d_out, layers)?;
        SpecialNet::new(net, self.roles, domain_hint)
    }
}

/// Rows of hidden layer `li` of `net`, placed on the channels `chans`
/// (the first `fan_out` entries are used).  For the first layer the network
/// inputs are the expressions `first_inputs`; later layers read the previous
/// layer's node `j` from channel `chans[j]`.
pub fn subnet_rows<T: Scalar>(
    net: &ReluNet<T>,
    li: usize,
    chans: &[usize],
    first_inputs: &[Affine<T>],
) -> Vec<(usize, Affine<T>)> {
    let layer = &net.layers()[li];
    let input: Vec<Affine<T>> = if li == 0 {
        first_inputs.to_vec()
    } else {
        (0..layer.fan_in()).map(|j| Affine::var(chans[j])).collect()
    };
    layer
        .w
        .iter()
        .zip(&layer.b)
        .enumerate()
        .map(|(i, (row, b))| {
            let mut a = Affine::constant(b.clone());
            for (j, w) in row.iter().enumerate() {
                if !w.is_zero() {
                    a = a.plus(&input[j].scale(w));
                }
            }
            (chans[i], a)
        })
        .collect()
}

/// Output expressions of `net` read from the channels `chans` of its last
/// hidden layer.
pub fn subnet_output<T: Scalar>(net: &ReluNet<T>, chans: &[usize]) -> Vec<Affine<T>> {
    let out = net.output_layer();
    out.w
        .iter()
        .zip(&out.b)
        .map(|(row, b)| {
            let mut a = Affine::constant(b.clone());
            for (j, w) in row.iter().enumerate() {
                if !w.is_zero() {
                    a.terms.push((chans[j], w.clone()));
                }
            }
            a
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net_core::numeric::{q, qi, Q};

    /// x ↦ x - 1 carried through a ReLU-free channel, then |x| via compute.
    fn sample() -> SpecialNet<Q> {
        let mut b = SpecialBuilder::<Q>::new(
            1,
            vec![ChannelRole::source(0), ChannelRole::collation(), ChannelRole::compute()],
        );
        let mut l1 = b.blank();
        l1[1] = b.src(0).add_const(&qi(-1));
        l1[2] = b.src(0);
        b.push(l1).unwrap();
        let mut l2 = b.blank();
        l2[1] = Affine::var(1).scale(&qi(2));
        l2[2] = Affine::var(1).scale(&qi(-1));
        b.push(l2).unwrap();
        b.finish(vec![Affine::var(1).plus(&Affine::var(2)).plus(&Affine::var(0))], None).unwrap()
    }

    #[test]
    fn special_eval_and_conversion_agree() {
        let s = sample();
        let k = BoxDomain::cube(1, qi(-3), qi(2));
        let r = special_to_relu(&s, &k).unwrap();
        for p in k.grid(101).unwrap() {
            let want = {
                let x = p[0].clone();
                let y = (x.clone() - qi(1)) * qi(2);
                y.clone() + (-(x.clone() - qi(1))).relu() + x
            };
            assert_eq!(s.eval1(&p).unwrap(), want);
            assert_eq!(r.eval1(&p).unwrap(), want);
        }
    }

    #[test]
    fn unbounded_box_is_rejected() {
        let s = sample();
        assert!(matches!(
            special_to_relu(&s, &BoxDomain::whole_space(1)),
            Err(NetError::Unbounded(_))
        ));
    }

    #[test]
    fn source_channel_is_checked() {
        let net = ReluNet::new(
            1,
            1,
            vec![
                Layer::new(vec![vec![q(1, 2)]], vec![qi(0)]).unwrap(),
                Layer::new(vec![vec![qi(1)]], vec![qi(0)]).unwrap(),
            ],
        )
        .unwrap();
        assert!(SpecialNet::new(net.clone(), vec![ChannelRole::source(0)], None).is_err());
        let s = SpecialNet::new(net.clone(), vec![ChannelRole::compute()], None).unwrap();
        assert_eq!(special_to_relu(&s, &BoxDomain::unit(1)).unwrap(), net);
    }

    #[test]
    fn depth_padding_is_exact() {
        let net = ReluNet::new(
            1,
            1,
            vec![
                Layer::new(vec![vec![qi(1)], vec![qi(1)]], vec![qi(0), q(-1, 2)]).unwrap(),
                Layer::new(vec![vec![qi(2), qi(-4)]], vec![qi(-1)]).unwrap(),
            ],
        )
        .unwrap();
        let p = pad_depth(&net, 4).unwrap();
        assert_eq!(p.depth(), 4);
        for k in -20..=40 {
            let x = [q(k, 20)];
            assert_eq!(net.eval(&x).unwrap(), p.eval(&x).unwrap());
        }
    }

    #[test]
    fn shift_dilate_special() {
        let s = sample();
        let t = s.shift_dilate(&qi(2), &[qi(1)]).unwrap();
        for k in -10..=10 {
            let x = q(k, 7);
            let y = qi(2) * x.clone() + qi(1);
            assert_eq!(t.eval1(&[x]).unwrap(), s.eval1(&[y]).unwrap());
        }
    }
}
