//! Exact piecewise-linear form of univariate networks.

use crate::constructions_1d::Cpwl1D;
use crate::net_core::{lift_relu_free, NetError, ReluNet, Scalar, SpecialNet};

/// Pre-activation of every hidden node as a function of `t`, layer by
/// layer, plus the outputs.  Nodes flagged in `relu_free` skip the ReLU.
pub fn layer_cpwls<T: Scalar>(
    net: &ReluNet<T>,
    relu_free: Option<&[bool]>,
) -> Result<(Vec<Vec<Cpwl1D<T>>>, Vec<Cpwl1D<T>>), NetError> {
    if net.input_dim() != 1 {
        return Err(NetError::Shape("exact piecewise-linear extraction needs d = 1".into()));
    }
    let mut v = vec![Cpwl1D::affine(T::one(), T::zero())];
    let mut pre = Vec::with_capacity(net.depth());
    let last = net.layers().len() - 1;
    let mut outputs = Vec::new();
    for (li, layer) in net.layers().iter().enumerate() {
        let z: Vec<Cpwl1D<T>> = layer
            .w
            .iter()
            .zip(&layer.b)
            .map(|(row, b)| {
                let parts: Vec<(T, &Cpwl1D<T>)> = row
                    .iter()
                    .zip(&v)
                    .filter(|(w, _)| !w.is_zero())
                    .map(|(w, f)| (w.clone(), f))
                    .collect();
                Cpwl1D::linear_combination(&parts, b).simplify()
            })
            .collect();
        if li == last {
            outputs = z;
            break;
        }
        v = z
            .iter()
            .enumerate()
            .map(|(i, f)| {
                if relu_free.is_some_and(|m| m.get(i).copied().unwrap_or(false)) {
                    f.clone()
                } else {
                    f.relu().simplify()
                }
            })
            .collect();
        pre.push(z);
    }
    Ok((pre, outputs))
}

/// The function computed by a univariate, scalar-output network as an exact
/// [`Cpwl1D`] on all of `R`.
pub fn exact_cpwl_1d<T: Scalar>(net: &ReluNet<T>) -> Result<Cpwl1D<T>, NetError> {
    if net.output_dim() != 1 {
        return Err(NetError::Shape("exact piecewise-linear extraction needs d' = 1".into()));
    }
    let (_, mut out) = layer_cpwls(net, None)?;
    Ok(out.swap_remove(0))
}

/// [`exact_cpwl_1d`] for a special network (ReLU-free nodes stay affine).
pub fn special_cpwl_1d<T: Scalar>(snet: &SpecialNet<T>) -> Result<Cpwl1D<T>, NetError> {
    if snet.net().output_dim() != 1 {
        return Err(NetError::Shape("exact piecewise-linear extraction needs d' = 1".into()));
    }
    let mask = snet.relu_free_mask();
    let (_, mut out) = layer_cpwls(snet.net(), Some(&mask))?;
    Ok(out.swap_remove(0))
}

/// Realize a univariate special network as a ReLU network on `[a, b]`
/// using exact pre-activation minima (tightest possible bias lifts).
pub fn special_to_relu_exact_1d<T: Scalar>(snet: &SpecialNet<T>, a: &T, b: &T) -> Result<ReluNet<T>, NetError> {
    let mask = snet.relu_free_mask();
    let (pre, _) = layer_cpwls(snet.net(), Some(&mask))?;
    let lows: Vec<Vec<Option<T>>> = pre
        .iter()
        .map(|layer| {
            layer
                .iter()
                .zip(&mask)
                .map(|(f, free)| if *free { Some(f.range_on(a, b).0) } else { None })
                .collect()
        })
        .collect();
    lift_relu_free(snet, &lows)
}

/// Number of breakpoints of `f` in the open interval `(a, b)`.
pub fn count_breakpoints_in<T: Scalar>(f: &Cpwl1D<T>, a: &T, b: &T) -> usize {
    f.breakpoints_in(a, b).len()
}
