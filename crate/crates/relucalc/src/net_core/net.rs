//! Fully connected feed-forward ReLU networks.

use serde::{Deserialize, Serialize};

use super::numeric::{convert, Scalar};
use super::NetError;

/// Weights and bias of one layer.  `w` has one row per output node and one
/// column per input node.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer<T> {
    pub w: Vec<Vec<T>>,
    pub b: Vec<T>,
}

impl<T: Scalar> Layer<T> {
    pub fn new(w: Vec<Vec<T>>, b: Vec<T>) -> Result<Self, NetError> {
        if w.len() != b.len() {
            return Err(NetError::Shape(format!(
                "layer has {} weight rows but {} biases",
                w.len(),
                b.len()
            )));
        }
        if let Some(first) = w.first() {
            if w.iter().any(|r| r.len() != first.len()) {
                return Err(NetError::Shape("ragged weight matrix".into()));
            }
        }
        Ok(Layer { w, b })
    }

    pub fn zeros(fan_out: usize, fan_in: usize) -> Self {
        Layer {
            w: vec![vec![T::zero(); fan_in]; fan_out],
            b: vec![T::zero(); fan_out],
        }
    }

    pub fn fan_out(&self) -> usize {
        self.b.len()
    }

    pub fn fan_in(&self) -> usize {
        self.w.first().map_or(0, |r| r.len())
    }

    /// Pre-activation `W x + b`.
    pub fn apply(&self, x: &[T]) -> Vec<T> {
        self.w
            .iter()
            .zip(&self.b)
            .map(|(row, b)| {
                let mut s = b.clone();
                for (wi, xi) in row.iter().zip(x) {
                    if !wi.is_zero() && !xi.is_zero() {
                        s = s + wi.clone() * xi.clone();
                    }
                }
                s
            })
            .collect()
    }

    pub fn to_mode<U: Scalar>(&self) -> Layer<U> {
        Layer {
            w: self.w.iter().map(|r| r.iter().map(convert).collect()).collect(),
            b: self.b.iter().map(convert).collect(),
        }
    }
}

/// Width, depth and parameter count of a network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetStats {
    pub width: usize,
    pub depth: usize,
    pub param_count: usize,
}

/// Number of parameters of a constant-width network:
/// `(d+1)W + W(W+1)(L-1) + d'(W+1)`.
pub fn param_count(d: usize, d_out: usize, width: usize, depth: usize) -> usize {
    (d + 1) * width + width * (width + 1) * depth.saturating_sub(1) + d_out * (width + 1)
}

/// A ReLU network: hidden layers `1..=L` apply ReLU coordinatewise, the final
/// layer is affine.
#[derive(Debug, Clone, PartialEq)]
pub struct ReluNet<T> {
    d: usize,
    d_out: usize,
    layers: Vec<Layer<T>>,
}

impl<T: Scalar> ReluNet<T> {
    /// Validate layer chaining and build the network.
    pub fn new(d: usize, d_out: usize, layers: Vec<Layer<T>>) -> Result<Self, NetError> {
        if d == 0 || d_out == 0 {
            return Err(NetError::Shape("input and output dimensions must be positive".into()));
        }
        if layers.len() < 2 {
            return Err(NetError::Shape("a network needs at least one hidden layer".into()));
        }
        let mut fan_in = d;
        for (i, l) in layers.iter().enumerate() {
            if l.w.len() != l.b.len() {
                return Err(NetError::Shape(format!("layer {} weight/bias length mismatch", i + 1)));
            }
            if l.fan_out() == 0 {
                return Err(NetError::Shape(format!("layer {} has no nodes", i + 1)));
            }
            if l.w.iter().any(|r| r.len() != fan_in) {
                return Err(NetError::Shape(format!(
                    "layer {} expects fan-in {} from the previous layer",
                    i + 1,
                    fan_in
                )));
            }
            fan_in = l.fan_out();
        }
        if fan_in != d_out {
            return Err(NetError::Shape(format!(
                "output layer has {} rows, expected {}",
                fan_in, d_out
            )));
        }
        Ok(ReluNet { d, d_out, layers })
    }

    pub fn input_dim(&self) -> usize {
        self.d
    }

    pub fn output_dim(&self) -> usize {
        self.d_out
    }

    pub fn layers(&self) -> &[Layer<T>] {
        &self.layers
    }

    pub fn into_layers(self) -> Vec<Layer<T>> {
        self.layers
    }

    pub fn hidden(&self) -> &[Layer<T>] {
        &self.layers[..self.layers.len() - 1]
    }

    pub fn output_layer(&self) -> &Layer<T> {
        self.layers.last().expect("validated")
    }

    /// Number of hidden layers.
    pub fn depth(&self) -> usize {
        self.layers.len() - 1
    }

    /// Largest hidden fan-out.
    pub fn width(&self) -> usize {
        self.hidden().iter().map(|l| l.fan_out()).max().unwrap_or(0)
    }

    pub fn is_constant_width(&self) -> bool {
        let w = self.width();
        self.hidden().iter().all(|l| l.fan_out() == w)
    }

    pub fn stats(&self) -> NetStats {
        NetStats {
            width: self.width(),
            depth: self.depth(),
            param_count: param_count(self.d, self.d_out, self.width(), self.depth()),
        }
    }

    /// Count of weight and bias entries actually stored.
    pub fn stored_param_count(&self) -> usize {
        self.layers.iter().map(|l| l.fan_out() * (l.fan_in() + 1)).sum()
    }

    fn check_input(&self, x: &[T]) -> Result<(), NetError> {
        if x.len() != self.d {
            return Err(NetError::Dimension { expected: self.d, got: x.len() });
        }
        Ok(())
    }

    /// Output of the network at `x`.
    pub fn eval(&self, x: &[T]) -> Result<Vec<T>, NetError> {
        self.check_input(x)?;
        Ok(self.forward(x, None))
    }

    /// Scalar output of a `d' = 1` network.
    pub fn eval1(&self, x: &[T]) -> Result<T, NetError> {
        Ok(self.eval(x)?.swap_remove(0))
    }

    /// Forward pass; nodes `i` with `relu_free[i]` skip the activation.
    pub(crate) fn forward(&self, x: &[T], relu_free: Option<&[bool]>) -> Vec<T> {
        let mut v = x.to_vec();
        let last = self.layers.len() - 1;
        for (li, layer) in self.layers.iter().enumerate() {
            let mut z = layer.apply(&v);
            if li < last {
                for (i, zi) in z.iter_mut().enumerate() {
                    let free = relu_free.is_some_and(|m| m.get(i).copied().unwrap_or(false));
                    if !free {
                        *zi = zi.relu();
                    }
                }
            }
            v = z;
        }
        v
    }

    /// Pre-activation values of every hidden node, layer by layer.
    pub fn preactivations(&self, x: &[T]) -> Result<Vec<Vec<T>>, NetError> {
        self.check_input(x)?;
        Ok(self.preactivations_masked(x, None))
    }

    pub(crate) fn preactivations_masked(&self, x: &[T], relu_free: Option<&[bool]>) -> Vec<Vec<T>> {
        let mut out = Vec::with_capacity(self.depth());
        let mut v = x.to_vec();
        for layer in self.hidden() {
            let z = layer.apply(&v);
            v = z
                .iter()
                .enumerate()
                .map(|(i, zi)| {
                    if relu_free.is_some_and(|m| m.get(i).copied().unwrap_or(false)) {
                        zi.clone()
                    } else {
                        zi.relu()
                    }
                })
                .collect();
            out.push(z);
        }
        out
    }

    /// Pad every hidden layer to `target` nodes with zero-weight, zero-bias
    /// nodes; the realised function is unchanged.
    pub fn pad_to_width(&self, target: usize) -> Result<Self, NetError> {
        let w = self.width();
        if target < w {
            return Err(NetError::Contract(format!(
                "cannot pad a width-{w} network down to width {target}"
            )));
        }
        let mut layers = self.layers.clone();
        let last = layers.len() - 1;
        for li in 0..last {
            let extra = target - layers[li].fan_out();
            if extra == 0 {
                continue;
            }
            let fan_in = layers[li].fan_in();
            for _ in 0..extra {
                layers[li].w.push(vec![T::zero(); fan_in]);
                layers[li].b.push(T::zero());
            }
            for row in layers[li + 1].w.iter_mut() {
                row.extend(std::iter::repeat_n(T::zero(), extra));
            }
        }
        ReluNet::new(self.d, self.d_out, layers)
    }

    /// Rescale every first-layer neuron to a unit-norm incoming weight
    /// vector, absorbing the norm into the outgoing weights.  Neurons with a
    /// zero weight vector contribute the constant `(b)_+`, which is folded
    /// into the next layer's biases (the neuron is kept with zero bias).
    pub fn normalize_first_layer(&self) -> Result<Self, NetError> {
        let mut layers = self.layers.clone();
        let n1 = layers[0].fan_out();
        for i in 0..n1 {
            let norm2 = layers[0].w[i]
                .iter()
                .fold(T::zero(), |acc, w| acc + w.clone() * w.clone());
            if norm2.is_zero() {
                let c = layers[0].b[i].relu();
                layers[0].b[i] = T::zero();
                if !c.is_zero() {
                    let next = &mut layers[1];
                    for r in 0..next.fan_out() {
                        let add = next.w[r][i].clone() * c.clone();
                        next.b[r] = next.b[r].clone() + add;
                    }
                }
                continue;
            }
            let norm = norm2.sqrt_opt().ok_or_else(|| {
                NetError::NotRepresentable(format!(
                    "norm of neuron {} is irrational; use float mode",
                    i + 1
                ))
            })?;
            if norm == T::one() {
                continue;
            }
            for w in layers[0].w[i].iter_mut() {
                *w = w.clone() / norm.clone();
            }
            layers[0].b[i] = layers[0].b[i].clone() / norm.clone();
            for row in layers[1].w.iter_mut() {
                row[i] = row[i].clone() * norm.clone();
            }
        }
        ReluNet::new(self.d, self.d_out, layers)
    }

    /// Same network with every parameter converted to another scalar mode.
    pub fn to_mode<U: Scalar>(&self) -> ReluNet<U> {
        ReluNet {
            d: self.d,
            d_out: self.d_out,
            layers: self.layers.iter().map(|l| l.to_mode()).collect(),
        }
    }

    /// Multiply the output by `a` and add `c` (output layer only).
    pub fn affine_output(&self, a: &T, c: &T) -> Self {
        let mut layers = self.layers.clone();
        let out = layers.last_mut().expect("validated");
        for row in out.w.iter_mut() {
            for w in row.iter_mut() {
                *w = w.clone() * a.clone();
            }
        }
        for b in out.b.iter_mut() {
            *b = b.clone() * a.clone() + c.clone();
        }
        ReluNet { d: self.d, d_out: self.d_out, layers }
    }

    /// The all-zero network of the given shape.
    pub fn zero(d: usize, d_out: usize, width: usize, depth: usize) -> Self {
        let mut layers = Vec::with_capacity(depth + 1);
        let mut fan_in = d;
        for _ in 0..depth {
            layers.push(Layer::zeros(width, fan_in));
            fan_in = width;
        }
        layers.push(Layer::zeros(d_out, fan_in));
        ReluNet { d, d_out, layers }
    }

    /// Constant function `c` on `R^d` (one zero-weight hidden node).
    pub fn constant(d: usize, c: T) -> Self {
        let mut net = Self::zero(d, 1, 1, 1);
        net.layers[1].b[0] = c;
        net
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net_core::numeric::{q, qi, Q};

    fn hat01() -> ReluNet<Q> {
        ReluNet::new(
            1,
            1,
            vec![
                Layer::new(vec![vec![qi(1)], vec![qi(1)]], vec![qi(0), q(-1, 2)]).unwrap(),
                Layer::new(vec![vec![qi(2), qi(-4)]], vec![qi(0)]).unwrap(),
            ],
        )
        .unwrap()
    }

    #[test]
    fn hat_peak_and_preactivations() {
        let h = hat01();
        assert_eq!(h.eval1(&[q(1, 2)]).unwrap(), qi(1));
        assert_eq!(h.preactivations(&[q(3, 4)]).unwrap(), vec![vec![q(3, 4), q(1, 4)]]);
        assert!(matches!(h.eval(&[qi(1), qi(2)]), Err(NetError::Dimension { .. })));
    }

    #[test]
    fn param_formula_examples() {
        assert_eq!(param_count(2, 1, 3, 2), 25);
        assert_eq!(param_count(1, 1, 2, 1), 7);
    }

    #[test]
    fn padding_preserves_function_and_counts() {
        let h = hat01();
        let p = h.pad_to_width(4).unwrap();
        assert_eq!(p.stats().param_count, param_count(1, 1, 4, 1));
        assert_eq!(p.stored_param_count(), p.stats().param_count);
        for k in -10..=30 {
            let t = q(k, 20);
            assert_eq!(h.eval(std::slice::from_ref(&t)).unwrap(), p.eval(&[t]).unwrap());
        }
        assert!(h.pad_to_width(1).is_err());
    }

    #[test]
    fn normalize_example_neuron() {
        let net = ReluNet::new(
            2,
            1,
            vec![
                Layer::new(vec![vec![qi(3), qi(4)], vec![qi(0), qi(0)]], vec![qi(5), qi(2)]).unwrap(),
                Layer::new(vec![vec![qi(1), qi(3)]], vec![qi(0)]).unwrap(),
            ],
        )
        .unwrap();
        let n = net.normalize_first_layer().unwrap();
        assert_eq!(n.layers()[0].w[0], vec![q(3, 5), q(4, 5)]);
        assert_eq!(n.layers()[0].b[0], qi(1));
        assert_eq!(n.layers()[1].w[0][0], qi(5));
        // zero neuron folded: (2)_+ * 3 = 6 added to the output bias
        assert_eq!(n.layers()[0].b[1], qi(0));
        assert_eq!(n.layers()[1].b[0], qi(6));
        for (a, b) in [(1, 2), (-3, 1), (0, 0), (-1, -1)] {
            let x = [qi(a), qi(b)];
            assert_eq!(net.eval(&x).unwrap(), n.eval(&x).unwrap());
        }
    }

    #[test]
    fn zero_net_is_zero() {
        let z = ReluNet::<Q>::zero(3, 2, 4, 3);
        assert_eq!(z.eval(&[qi(1), qi(-2), q(1, 3)]).unwrap(), vec![qi(0), qi(0)]);
    }
}
