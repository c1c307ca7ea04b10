//! Parameter gradients by backpropagation and full-batch gradient descent
//! on the squared loss.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::net_core::{Layer, NetError, ReluNet};

/// All parameters of `net` in a flat vector: layer by layer, row-major
/// weights followed by the biases.
pub fn flatten_params(net: &ReluNet<f64>) -> Vec<f64> {
    net.layers().iter().flat_map(|l| l.w.iter().flatten().chain(&l.b).copied()).collect()
}

/// Inverse of [`flatten_params`] for a network of the same shape.
pub fn with_params(net: &ReluNet<f64>, params: &[f64]) -> Result<ReluNet<f64>, NetError> {
    let total: usize = net.layers().iter().map(|l| l.fan_out() * (l.fan_in() + 1)).sum();
    if params.len() != total {
        return Err(NetError::Dimension { expected: total, got: params.len() });
    }
    let mut it = params.iter().copied();
    let layers = net
        .layers()
        .iter()
        .map(|l| {
            let w = (0..l.fan_out()).map(|_| it.by_ref().take(l.fan_in()).collect()).collect();
            let b = it.by_ref().take(l.fan_out()).collect();
            Layer::new(w, b)
        })
        .collect::<Result<Vec<_>, _>>()?;
    ReluNet::new(net.input_dim(), net.output_dim(), layers)
}

/// Value of the first output at `x` and its gradient with respect to every
/// parameter (in [`flatten_params`] order).  The ReLU derivative at `0` is
/// taken to be `0`.
pub fn param_gradient(net: &ReluNet<f64>, x: &[f64]) -> Result<(f64, Vec<f64>), NetError> {
    if x.len() != net.input_dim() {
        return Err(NetError::Dimension { expected: net.input_dim(), got: x.len() });
    }
    let layers = net.layers();
    // inputs[l] is the input of layer l; pre[l] its pre-activation.
    let mut inputs = Vec::with_capacity(layers.len());
    let mut pre = Vec::with_capacity(layers.len());
    let mut v = x.to_vec();
    for (li, l) in layers.iter().enumerate() {
        inputs.push(v.clone());
        let z = l.apply(&v);
        v = if li + 1 < layers.len() { z.iter().map(|t| t.max(0.0)).collect() } else { z.clone() };
        pre.push(z);
    }
    let value = v[0];
    let mut grads: Vec<Vec<f64>> = vec![Vec::new(); layers.len()];
    let mut delta: Vec<f64> = (0..net.output_dim()).map(|i| if i == 0 { 1.0 } else { 0.0 }).collect();
    for li in (0..layers.len()).rev() {
        let l = &layers[li];
        let mut g = Vec::with_capacity(l.fan_out() * (l.fan_in() + 1));
        for di in &delta {
            g.extend(inputs[li].iter().map(|a| di * a));
        }
        g.extend(delta.iter().copied());
        grads[li] = g;
        if li > 0 {
            delta = (0..l.fan_in())
                .map(|j| {
                    if pre[li - 1][j] > 0.0 {
                        l.w.iter().zip(&delta).map(|(row, d)| row[j] * d).sum()
                    } else {
                        0.0
                    }
                })
                .collect();
        }
    }
    Ok((value, grads.concat()))
}

/// `ℒ(θ) = Σ_i (y_i - S(x_i; θ))²`.
pub fn squared_loss(net: &ReluNet<f64>, data: &[(Vec<f64>, f64)]) -> Result<f64, NetError> {
    data.iter().map(|(x, y)| Ok((y - net.eval1(x)?).powi(2))).sum()
}

/// Outcome of [`gd_train_net`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainReport {
    #[serde(skip)]
    pub net: ReluNet<f64>,
    /// Loss before each step and after the last one.
    pub loss_curve: Vec<f64>,
    /// The loss became non-finite or grew past `10⁶` times its start value;
    /// training stopped there.
    pub diverged: bool,
}

/// Full-batch gradient descent with a fixed step size.  Deterministic.
pub fn gd_train_net(net: &ReluNet<f64>, data: &[(Vec<f64>, f64)], eta: f64, steps: usize) -> Result<TrainReport, NetError> {
    let mut theta = flatten_params(net);
    let mut cur = net.clone();
    let mut curve = Vec::with_capacity(steps + 1);
    let mut diverged = false;
    for step in 0..=steps {
        let mut loss = 0.0;
        let mut grad = vec![0.0; theta.len()];
        for (x, y) in data {
            let (v, g) = param_gradient(&cur, x)?;
            let r = y - v;
            loss += r * r;
            for (gi, d) in grad.iter_mut().zip(g) {
                *gi -= 2.0 * r * d;
            }
        }
        curve.push(loss);
        if !loss.is_finite() || loss > 1e6 * curve[0].max(1e-300) {
            diverged = true;
            break;
        }
        if step == steps {
            break;
        }
        for (t, g) in theta.iter_mut().zip(&grad) {
            *t -= eta * g;
        }
        cur = with_params(&cur, &theta)?;
    }
    Ok(TrainReport { net: cur, loss_curve: curve, diverged })
}

/// Weight scaling of a randomly initialized network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum InitScheme {
    /// Weights `N(0, 2/fan_in)`, biases zero.
    He,
    /// Raw parameters `N(0, 1)`; weights act through a factor
    /// `1/√fan_in` (the scaling under which the tangent kernel has a
    /// deterministic infinite-width limit).  Biases act unscaled.
    NeuralTangent,
}

impl InitScheme {
    /// Factor between raw and effective weights of a layer.
    pub fn weight_multiplier(&self, fan_in: usize) -> f64 {
        match self {
            InitScheme::He => 1.0,
            InitScheme::NeuralTangent => 1.0 / (fan_in as f64).sqrt(),
        }
    }
}

/// Random fully connected network with the given layer widths
/// (`widths = [d, W_1, …, W_L, d']`), reproducible from `seed`.  Stored
/// weights are the effective ones.
pub fn init_net(widths: &[usize], scheme: InitScheme, seed: u64) -> Result<ReluNet<f64>, NetError> {
    if widths.len() < 3 {
        return Err(NetError::Shape("need input, at least one hidden and an output width".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let std_normal = Normal::new(0.0, 1.0).expect("valid normal");
    let layers = widths
        .windows(2)
        .map(|p| {
            let (fan_in, fan_out) = (p[0], p[1]);
            let (ws, bs) = match scheme {
                InitScheme::He => ((2.0 / fan_in as f64).sqrt(), 0.0),
                InitScheme::NeuralTangent => (scheme.weight_multiplier(fan_in), 1.0),
            };
            let w = (0..fan_out).map(|_| (0..fan_in).map(|_| ws * std_normal.sample(&mut rng)).collect()).collect();
            let b = (0..fan_out).map(|_| bs * std_normal.sample(&mut rng)).collect();
            Layer::new(w, b)
        })
        .collect::<Result<Vec<_>, _>>()?;
    ReluNet::new(widths[0], *widths.last().unwrap(), layers)
}

/// `step,value` lines.
pub fn curve_csv<V: std::fmt::Display>(values: impl IntoIterator<Item = (usize, V)>) -> String {
    let mut s = String::from("step,value\n");
    for (k, v) in values {
        s.push_str(&format!("{k},{v}\n"));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data() -> Vec<(Vec<f64>, f64)> {
        (0..10).map(|i| i as f64 / 9.0).map(|t| (vec![t], (3.0 * t).sin())).collect()
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let net = init_net(&[2, 5, 4, 1], InitScheme::He, 3).unwrap();
        let x = [0.3, -0.7];
        let (v, g) = param_gradient(&net, &x).unwrap();
        assert_eq!(v, net.eval1(&x).unwrap());
        let p = flatten_params(&net);
        for k in 0..p.len() {
            let h = 1e-6;
            let mut q = p.clone();
            q[k] += h;
            let up = with_params(&net, &q).unwrap().eval1(&x).unwrap();
            q[k] -= 2.0 * h;
            let dn = with_params(&net, &q).unwrap().eval1(&x).unwrap();
            assert!(((up - dn) / (2.0 * h) - g[k]).abs() < 1e-5, "parameter {k}");
        }
    }

    #[test]
    fn zero_residual_leaves_parameters_unchanged() {
        let net = init_net(&[1, 4, 1], InitScheme::He, 1).unwrap();
        let d: Vec<(Vec<f64>, f64)> = data().into_iter().map(|(x, _)| (x.clone(), net.eval1(&x).unwrap())).collect();
        let r = gd_train_net(&net, &d, 0.01, 5).unwrap();
        assert_eq!(r.net, net);
    }

    #[test]
    fn small_steps_descend_and_are_deterministic() {
        let net = init_net(&[1, 8, 8, 1], InitScheme::He, 11).unwrap();
        let r = gd_train_net(&net, &data(), 1e-3, 1000).unwrap();
        assert!(!r.diverged);
        assert!(r.loss_curve.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        let again = gd_train_net(&init_net(&[1, 8, 8, 1], InitScheme::He, 11).unwrap(), &data(), 1e-3, 1000).unwrap();
        assert_eq!(r, again);
        assert!(curve_csv(r.loss_curve.iter().copied().enumerate()).starts_with("step,value\n0,"));
    }
}
