//! Structural operations on networks: parallel sums, composition, addition
//! by depth, shifted dilates, composition sums and translate-dilate sums.
//! Each operation returns a network whose width and depth match the
//! advertised contract exactly.

use crate::net_core::special::{subnet_output, subnet_rows};
use crate::net_core::{
    special_to_relu, Affine, BoxDomain, ChannelRole, Layer, NetError, ReluNet, Scalar,
    SpecialBuilder, SpecialNet,
};

/// `x ↦ A x + b` on `R^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMap<T> {
    pub a: Vec<Vec<T>>,
    pub b: Vec<T>,
}

impl<T: Scalar> AffineMap<T> {
    pub fn new(a: Vec<Vec<T>>, b: Vec<T>) -> Result<Self, NetError> {
        let d = b.len();
        if a.len() != d || a.iter().any(|r| r.len() != d) {
            return Err(NetError::Shape(format!("affine map must be {d}x{d} with a length-{d} shift")));
        }
        Ok(AffineMap { a, b })
    }

    pub fn identity(d: usize) -> Self {
        Self::scalar(d, T::one(), vec![T::zero(); d])
    }

    /// `x ↦ s x + c`.
    pub fn scalar(d: usize, s: T, c: Vec<T>) -> Self {
        let a = (0..d)
            .map(|i| (0..d).map(|j| if i == j { s.clone() } else { T::zero() }).collect())
            .collect();
        AffineMap { a, b: c }
    }

    /// `x ↦ A x + b` from `R^m` to `R^k` (`A` is `k × m`).
    pub fn rect(a: Vec<Vec<T>>, b: Vec<T>) -> Result<Self, NetError> {
        let m = a.first().map_or(0, |r| r.len());
        if a.len() != b.len() || m == 0 || a.iter().any(|r| r.len() != m) {
            return Err(NetError::Shape("affine map needs a nonempty k×m matrix and a length-k shift".into()));
        }
        Ok(AffineMap { a, b })
    }

    /// Output dimension `k`.
    pub fn dim(&self) -> usize {
        self.b.len()
    }

    /// Input dimension `m`.
    pub fn input_dim(&self) -> usize {
        self.a.first().map_or(0, |r| r.len())
    }

    pub fn apply(&self, x: &[T]) -> Vec<T> {
        self.a
            .iter()
            .zip(&self.b)
            .map(|(row, bi)| row.iter().zip(x).fold(bi.clone(), |s, (a, v)| s + a.clone() * v.clone()))
            .collect()
    }
}

fn check_same_io<T: Scalar>(nets: &[ReluNet<T>]) -> Result<(usize, usize), NetError> {
    let first = nets.first().ok_or_else(|| NetError::Contract("need at least one network".into()))?;
    let (d, dp) = (first.input_dim(), first.output_dim());
    for n in nets {
        if n.input_dim() != d || n.output_dim() != dp {
            return Err(NetError::Shape("networks differ in input or output dimension".into()));
        }
    }
    Ok((d, dp))
}

/// Hidden layers placed side by side (block-diagonal), outputs stacked.
fn block_parallel<T: Scalar>(nets: &[ReluNet<T>]) -> Result<Vec<Layer<T>>, NetError> {
    let depth = nets[0].depth();
    if nets.iter().any(|n| n.depth() != depth) {
        return Err(NetError::Contract("parallelization requires equal depth".into()));
    }
    let mut layers = Vec::with_capacity(depth + 1);
    for li in 0..=depth {
        let fan_in_total: usize = if li == 0 {
            nets[0].input_dim()
        } else {
            nets.iter().map(|n| n.layers()[li].fan_in()).sum()
        };
        let mut w = Vec::new();
        let mut b = Vec::new();
        let mut offset = 0;
        for n in nets {
            let l = &n.layers()[li];
            for (row, bi) in l.w.iter().zip(&l.b) {
                let mut full = vec![T::zero(); fan_in_total];
                if li == 0 {
                    full.clone_from(row);
                } else {
                    for (j, v) in row.iter().enumerate() {
                        full[offset + j] = v.clone();
                    }
                }
                w.push(full);
                b.push(bi.clone());
            }
            if li > 0 {
                offset += l.fan_in();
            }
        }
        layers.push(Layer::new(w, b)?);
    }
    Ok(layers)
}

/// Networks of equal depth run side by side on the same input; the outputs
/// are stacked into a vector of dimension `Σ d'_j`.
pub fn parallel_stack<T: Scalar>(nets: &[ReluNet<T>]) -> Result<ReluNet<T>, NetError> {
    let d = nets.first().ok_or_else(|| NetError::Contract("need at least one network".into()))?.input_dim();
    if nets.iter().any(|n| n.input_dim() != d) {
        return Err(NetError::Shape("networks differ in input dimension".into()));
    }
    let layers = block_parallel(nets)?;
    let d_out = nets.iter().map(|n| n.output_dim()).sum();
    ReluNet::new(d, d_out, layers)
}

/// `Σ α_j S_j` for networks sharing `d`, `d'` and depth; width `Σ W_j`.
pub fn parallelize_sum<T: Scalar>(nets: &[ReluNet<T>], alpha: &[T]) -> Result<ReluNet<T>, NetError> {
    let (d, dp) = check_same_io(nets)?;
    if alpha.len() != nets.len() {
        return Err(NetError::Shape("one coefficient per network required".into()));
    }
    let mut layers = block_parallel(nets)?;
    let stacked = layers.pop().expect("output layer");
    let fan_in = stacked.fan_in();
    let mut w = vec![vec![T::zero(); fan_in]; dp];
    let mut b = vec![T::zero(); dp];
    for (j, a) in alpha.iter().enumerate() {
        for r in 0..dp {
            let src = j * dp + r;
            for (c, v) in stacked.w[src].iter().enumerate() {
                w[r][c] = w[r][c].clone() + a.clone() * v.clone();
            }
            b[r] = b[r].clone() + a.clone() * stacked.b[src].clone();
        }
    }
    layers.push(Layer::new(w, b)?);
    ReluNet::new(d, dp, layers)
}

/// `outer ∘ inner`: depth `L₁ + L₂`; the splice layer multiplies the inner
/// output map into the outer input map.
pub fn concatenate_compose<T: Scalar>(outer: &ReluNet<T>, inner: &ReluNet<T>) -> Result<ReluNet<T>, NetError> {
    if inner.output_dim() != outer.input_dim() {
        return Err(NetError::Shape(format!(
            "inner network outputs {} values, outer expects {}",
            inner.output_dim(),
            outer.input_dim()
        )));
    }
    let mut layers: Vec<Layer<T>> = inner.hidden().to_vec();
    let io = inner.output_layer();
    let o1 = &outer.layers()[0];
    let mut w = Vec::with_capacity(o1.fan_out());
    let mut b = Vec::with_capacity(o1.fan_out());
    for (row, bi) in o1.w.iter().zip(&o1.b) {
        let mut r = vec![T::zero(); io.fan_in()];
        let mut c = bi.clone();
        for (k, wk) in row.iter().enumerate() {
            if wk.is_zero() {
                continue;
            }
            for (j, v) in io.w[k].iter().enumerate() {
                r[j] = r[j].clone() + wk.clone() * v.clone();
            }
            c = c + wk.clone() * io.b[k].clone();
        }
        w.push(r);
        b.push(c);
    }
    layers.push(Layer::new(w, b)?);
    layers.extend(outer.layers()[1..].iter().cloned());
    ReluNet::new(inner.input_dim(), outer.output_dim(), layers)
}

/// `x ↦ (S(x))_+` componentwise: the output map becomes a hidden layer and
/// one layer (of width `d'`) is added.
pub fn relu_output<T: Scalar>(net: &ReluNet<T>) -> Result<ReluNet<T>, NetError> {
    let m = net.output_dim();
    let mut layers = net.layers().to_vec();
    let mut last = Layer::zeros(m, m);
    for i in 0..m {
        last.w[i][i] = T::one();
    }
    layers.push(last);
    ReluNet::new(net.input_dim(), m, layers)
}

/// `x ↦ S(a x + c)`; only the first layer changes.
pub fn shift_dilate<T: Scalar>(net: &ReluNet<T>, a: &T, c: &[T]) -> Result<ReluNet<T>, NetError> {
    let d = net.input_dim();
    let map = AffineMap::scalar(d, a.clone(), c.to_vec());
    if c.len() != d {
        return Err(NetError::Dimension { expected: d, got: c.len() });
    }
    precompose_affine(net, &map)
}

/// `x ↦ S(A x + b)`; only the first layer changes.  The map may change the
/// input dimension (`A` is `d × m` for a network with `d` inputs).
pub fn precompose_affine<T: Scalar>(net: &ReluNet<T>, map: &AffineMap<T>) -> Result<ReluNet<T>, NetError> {
    if map.dim() != net.input_dim() {
        return Err(NetError::Dimension { expected: net.input_dim(), got: map.dim() });
    }
    let d = map.input_dim();
    let mut layers = net.layers().to_vec();
    let first = &mut layers[0];
    for (row, bi) in first.w.iter_mut().zip(first.b.iter_mut()) {
        let mut new_row = vec![T::zero(); d];
        let mut shift = T::zero();
        for (k, wk) in row.iter().enumerate() {
            if wk.is_zero() {
                continue;
            }
            for (j, a) in map.a[k].iter().enumerate() {
                new_row[j] = new_row[j].clone() + wk.clone() * a.clone();
            }
            shift = shift + wk.clone() * map.b[k].clone();
        }
        *row = new_row;
        *bi = bi.clone() + shift;
    }
    ReluNet::new(d, net.output_dim(), layers)
}

/// `Σ α_j S_j` by stacking the networks in depth.  Channels: `d` source
/// channels, one collation channel, then `max W_j` compute channels.
/// Width `max W_j + d + 1`, depth `Σ L_j`.
pub fn add_by_depth<T: Scalar>(
    nets: &[ReluNet<T>],
    alpha: &[T],
    region: &BoxDomain<T>,
) -> Result<SpecialNet<T>, NetError> {
    let (d, dp) = check_same_io(nets)?;
    if dp != 1 {
        return Err(NetError::Shape("addition by depth needs scalar outputs".into()));
    }
    if alpha.len() != nets.len() {
        return Err(NetError::Shape("one coefficient per network required".into()));
    }
    if region.dim() != d {
        return Err(NetError::Dimension { expected: d, got: region.dim() });
    }
    if !region.is_bounded() {
        return Err(NetError::Unbounded("addition by depth needs a bounded region".into()));
    }
    let w = nets.iter().map(|n| n.width()).max().unwrap_or(0);
    let coll = d;
    let compute: Vec<usize> = (d + 1..d + 1 + w).collect();
    let mut roles: Vec<ChannelRole> = (0..d).map(ChannelRole::source).collect();
    roles.push(ChannelRole::collation());
    roles.extend(std::iter::repeat_n(ChannelRole::compute(), w));
    let mut b = SpecialBuilder::new(d, roles);
    let mut pending: Option<Affine<T>> = None; // α_{j-1} · output of previous net
    for (net, a) in nets.iter().zip(alpha) {
        for li in 0..net.depth() {
            let mut rows = b.blank();
            let inputs = b.inputs();
            for (ch, row) in subnet_rows(net, li, &compute, &inputs) {
                rows[ch] = row;
            }
            if b.depth() > 0 {
                let mut c = Affine::var(coll);
                if li == 0 {
                    if let Some(p) = pending.take() {
                        c = c.plus(&p);
                    }
                }
                rows[coll] = c;
            }
            b.push(rows)?;
        }
        pending = Some(subnet_output(net, &compute)[0].scale(a));
    }
    let out = Affine::var(coll).plus(&pending.expect("at least one network"));
    b.finish(vec![out], Some(region.clone()))
}

/// `Σ_{i=1}^m α_i T^{∘i}` as a special network of width `W(T) + 1` and
/// depth `m L₀`: `T` is concatenated with itself and one collation channel
/// (the last) accumulates the partial sums.
pub fn power_sum_special<T: Scalar>(t: &ReluNet<T>, alpha: &[T]) -> Result<SpecialNet<T>, NetError> {
    if t.input_dim() != 1 || t.output_dim() != 1 {
        return Err(NetError::Shape("composition sums need a univariate network".into()));
    }
    if alpha.is_empty() {
        return Err(NetError::Contract("need at least one coefficient".into()));
    }
    let w0 = t.width();
    let compute: Vec<usize> = (0..w0).collect();
    let coll = w0;
    let mut roles = vec![ChannelRole::compute(); w0];
    roles.push(ChannelRole::collation());
    let mut b = SpecialBuilder::new(1, roles);
    // Output of the previous copy of T, as an affine expression of the
    // previous layer.
    let mut prev_out: Option<Affine<T>> = None;
    for a_prev in std::iter::once(None).chain(alpha[..alpha.len() - 1].iter().map(Some)) {
        for li in 0..t.depth() {
            let mut rows = b.blank();
            let inputs = match (&prev_out, li) {
                (Some(p), 0) => vec![p.clone()],
                _ => vec![Affine::var(0)],
            };
            for (ch, row) in subnet_rows(t, li, &compute, &inputs) {
                rows[ch] = row;
            }
            if li == 0 {
                if let (Some(p), Some(a)) = (&prev_out, a_prev) {
                    rows[coll] = Affine::var(coll).plus(&p.scale(a));
                }
            } else {
                rows[coll] = Affine::var(coll);
            }
            b.push(rows)?;
        }
        prev_out = Some(subnet_output(t, &compute).swap_remove(0));
    }
    let last = alpha.last().expect("nonempty");
    let out = Affine::var(coll).plus(&prev_out.expect("one copy").scale(last));
    b.finish(vec![out], None)
}

/// [`power_sum_special`] realized as a ReLU network on the interval `dom`.
pub fn power_sum<T: Scalar>(t: &ReluNet<T>, alpha: &[T], dom: &BoxDomain<T>) -> Result<ReluNet<T>, NetError> {
    special_to_relu(&power_sum_special(t, alpha)?, dom)
}

/// `Σ_j c_j φ(A_j x + b_j)` as a special network of width `d + 1 + W₀` and
/// depth `n L₀`: `d` source channels, the copies of `φ`, one collation
/// channel (last).
pub fn translate_dilate_sum_special<T: Scalar>(
    phi: &ReluNet<T>,
    terms: &[(AffineMap<T>, T)],
) -> Result<SpecialNet<T>, NetError> {
    if phi.output_dim() != 1 {
        return Err(NetError::Shape("translate-dilate sums need a scalar network".into()));
    }
    if terms.is_empty() {
        return Err(NetError::Contract("need at least one term".into()));
    }
    let d = phi.input_dim();
    let w0 = phi.width();
    let compute: Vec<usize> = (d..d + w0).collect();
    let coll = d + w0;
    let mut roles: Vec<ChannelRole> = (0..d).map(ChannelRole::source).collect();
    roles.extend(std::iter::repeat_n(ChannelRole::compute(), w0));
    roles.push(ChannelRole::collation());
    let mut b = SpecialBuilder::new(d, roles);
    let mut pending: Option<Affine<T>> = None;
    for (map, c) in terms {
        if map.dim() != d {
            return Err(NetError::Dimension { expected: d, got: map.dim() });
        }
        for li in 0..phi.depth() {
            let mut rows = b.blank();
            let src = b.inputs();
            let inputs: Vec<Affine<T>> = (0..d)
                .map(|k| {
                    let mut e = Affine::constant(map.b[k].clone());
                    for (j, a) in map.a[k].iter().enumerate() {
                        if !a.is_zero() {
                            e = e.plus(&src[j].scale(a));
                        }
                    }
                    e
                })
                .collect();
            for (ch, row) in subnet_rows(phi, li, &compute, &inputs) {
                rows[ch] = row;
            }
            if b.depth() > 0 {
                let mut acc = Affine::var(coll);
                if li == 0 {
                    if let Some(p) = pending.take() {
                        acc = acc.plus(&p);
                    }
                }
                rows[coll] = acc;
            }
            b.push(rows)?;
        }
        pending = Some(subnet_output(phi, &compute).swap_remove(0).scale(c));
    }
    let out = Affine::var(coll).plus(&pending.expect("one term"));
    b.finish(vec![out], None)
}

/// [`translate_dilate_sum_special`] realized as a ReLU network on `dom`.
pub fn translate_dilate_sum<T: Scalar>(
    phi: &ReluNet<T>,
    terms: &[(AffineMap<T>, T)],
    dom: &BoxDomain<T>,
) -> Result<ReluNet<T>, NetError> {
    special_to_relu(&translate_dilate_sum_special(phi, terms)?, dom)
}
