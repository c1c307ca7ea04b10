//! Hats, sawtooths and univariate interpolating networks.

use super::cpwl::Cpwl1D;
use crate::net_core::{
    special_to_relu, Affine, BoxDomain, ChannelRole, Layer, NetError, ReluNet, RoleKind, Scalar,
    SpecialBuilder,
};

fn one_layer<T: Scalar>(w: Vec<T>, b: Vec<T>, out: Vec<T>, c: T) -> ReluNet<T> {
    let rows = w.into_iter().map(|v| vec![v]).collect();
    ReluNet::new(1, 1, vec![Layer { w: rows, b }, Layer { w: vec![out], b: vec![c] }])
        .expect("well-formed one-layer network")
}

/// Hat function with knots `p1 < p2 < p3`: zero outside `[p1, p3]`, one at
/// `p2`, linear in between.  Width 3, depth 1.
pub fn hat<T: Scalar>(p1: &T, p2: &T, p3: &T) -> Result<ReluNet<T>, NetError> {
    if !(p1 < p2 && p2 < p3) {
        return Err(NetError::Contract("hat knots must be strictly increasing".into()));
    }
    let l = T::one() / (p2.clone() - p1.clone());
    let r = T::one() / (p3.clone() - p2.clone());
    Ok(one_layer(
        vec![T::one(), T::one(), T::one()],
        vec![-p1.clone(), -p2.clone(), -p3.clone()],
        vec![l.clone(), -(l + r.clone()), r],
        T::zero(),
    ))
}

/// `H(t) = 2 t_+ - 4 (t - 1/2)_+`, the hat on `[0, 1]` (width 2).
pub fn hat01<T: Scalar>() -> ReluNet<T> {
    one_layer(
        vec![T::one(), T::one()],
        vec![T::zero(), -T::from_ratio(1, 2)],
        vec![T::from_i64(2), T::from_i64(-4)],
        T::zero(),
    )
}

/// `H^{∘L}`: a sawtooth with `2^{L-1}` teeth on `[0,1]`; width 2, depth `L`.
pub fn sawtooth<T: Scalar>(depth: usize) -> ReluNet<T> {
    assert!(depth >= 1, "sawtooth depth must be positive");
    let half = T::from_ratio(1, 2);
    let (two, four) = (T::from_i64(2), T::from_i64(-4));
    let mut layers = vec![Layer {
        w: vec![vec![T::one()], vec![T::one()]],
        b: vec![T::zero(), -half.clone()],
    }];
    for _ in 1..depth {
        layers.push(Layer {
            w: vec![vec![two.clone(), four.clone()], vec![two.clone(), four.clone()]],
            b: vec![T::zero(), -half.clone()],
        });
    }
    layers.push(Layer { w: vec![vec![two, four]], b: vec![T::zero()] });
    ReluNet::new(1, 1, layers).expect("well-formed sawtooth")
}

fn check_sites<T: Scalar>(points: &[T], values: &[T]) -> Result<(), NetError> {
    if points.is_empty() {
        return Err(NetError::Contract("need at least one data site".into()));
    }
    if points.len() != values.len() {
        return Err(NetError::Shape("one value per data site required".into()));
    }
    if points.windows(2).any(|w| w[0] >= w[1]) {
        return Err(NetError::Contract("data sites must be distinct and sorted".into()));
    }
    Ok(())
}

/// Coefficients of `S(t) = c + Σ_j a_j (t - ξ_j)_+` interpolating the data,
/// with `ξ_j` the midpoints of consecutive sites.  Returns `(c, ξ, a)`.
pub fn interpolation_coefficients<T: Scalar>(points: &[T], values: &[T]) -> (T, Vec<T>, Vec<T>) {
    let half = T::from_ratio(1, 2);
    let xi: Vec<T> = points.windows(2).map(|w| (w[0].clone() + w[1].clone()) * half.clone()).collect();
    let c = values[0].clone();
    let mut a: Vec<T> = Vec::with_capacity(xi.len());
    for j in 0..xi.len() {
        let t = &points[j + 1];
        let s0 = a
            .iter()
            .zip(&xi)
            .fold(c.clone(), |s, (aj, x)| s + aj.clone() * (t.clone() - x.clone()).relu());
        a.push((values[j + 1].clone() - s0) / (t.clone() - xi[j].clone()));
    }
    (c, xi, a)
}

/// Shallow interpolant in `Υ^{D-1,1}` through `D` sorted data sites, with
/// knots at the midpoints.  For `D = 1` the constant network.
pub fn shallow_interpolant<T: Scalar>(points: &[T], values: &[T]) -> Result<ReluNet<T>, NetError> {
    check_sites(points, values)?;
    if points.len() == 1 {
        return Ok(ReluNet::constant(1, values[0].clone()));
    }
    let (c, xi, a) = interpolation_coefficients(points, values);
    let w = vec![T::one(); xi.len()];
    let b = xi.iter().map(|x| -x.clone()).collect();
    Ok(one_layer(w, b, a, c))
}

/// Deep interpolant in `Υ^{3,D-1}` for `D ≥ 2` sites in `[0,1]`: one source
/// channel forwarding `t`, one compute channel producing `(t - ξ_j)_+` at
/// layer `j`, one collation channel accumulating `c + Σ a_i (t - ξ_i)_+`.
pub fn deep_interpolant<T: Scalar>(points: &[T], values: &[T]) -> Result<ReluNet<T>, NetError> {
    check_sites(points, values)?;
    if points.iter().any(|t| *t < T::zero() || *t > T::one()) {
        return Err(NetError::Contract("deep interpolation sites must lie in [0,1]".into()));
    }
    if points.len() == 1 {
        return Ok(ReluNet::constant(1, values[0].clone()));
    }
    let (c, xi, a) = if points.len() == 2 {
        // Single knot at 0: the interpolant is affine on [0, 1].
        let slope = (values[1].clone() - values[0].clone()) / (points[1].clone() - points[0].clone());
        (values[0].clone() - slope.clone() * points[0].clone(), vec![T::zero()], vec![slope])
    } else {
        interpolation_coefficients(points, values)
    };
    // The source channel needs no ReLU-free flag: t ≥ 0 on [0,1].
    let roles = vec![
        ChannelRole { kind: RoleKind::Source(0), relu_free: false },
        ChannelRole::compute(),
        ChannelRole::collation(),
    ];
    let mut b = SpecialBuilder::new(1, roles);
    for j in 0..xi.len() {
        let mut rows = b.blank();
        rows[1] = b.src(0).add_const(&-xi[j].clone());
        if j == 0 {
            rows[2] = Affine::constant(c.clone());
        } else {
            rows[2] = Affine::var(2).plus(&Affine::term(1, a[j - 1].clone()));
        }
        b.push(rows)?;
    }
    let out = Affine::var(2).plus(&Affine::term(1, a.last().expect("one knot").clone()));
    let snet = b.finish(vec![out], Some(BoxDomain::unit(1)))?;
    special_to_relu(&snet, &BoxDomain::unit(1))
}

/// One-hidden-layer network equal to `g` on all of `R`:
/// `g(ξ_1) - s_L (ξ_1 - t)_+ + Σ_j (s_j - s_{j-1}) (t - ξ_j)_+`.
/// The left-ray neuron is omitted when `s_L = 0`, so a function with `k`
/// breakpoints needs `k + 1` neurons (`k` when it is constant on the left).
pub fn cpwl_to_net<T: Scalar>(g: &Cpwl1D<T>) -> ReluNet<T> {
    let g = g.simplify();
    let bps = g.breakpoints();
    if bps.is_empty() {
        let s = g.left_slope().clone();
        if s.is_zero() {
            return ReluNet::constant(1, g.values()[0].clone());
        }
        // s t + c = s (t)_+ - s (-t)_+ + c
        let c = g.eval(&T::zero());
        return one_layer(vec![T::one(), -T::one()], vec![T::zero(), T::zero()], vec![s.clone(), -s], c);
    }
    let slopes = g.slopes();
    let sl = g.left_slope().clone();
    let mut w = Vec::new();
    let mut b = Vec::new();
    let mut out = Vec::new();
    if !sl.is_zero() {
        w.push(-T::one());
        b.push(bps[0].clone());
        out.push(-sl.clone());
    }
    // Every node of the simplified function is a breakpoint.
    for (j, x) in bps.iter().enumerate() {
        let jump = if j == 0 { slopes[1].clone() } else { slopes[j + 1].clone() - slopes[j].clone() };
        w.push(T::one());
        b.push(-x.clone());
        out.push(jump);
    }
    one_layer(w, b, out, g.eval(&bps[0]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net_core::{q, qi, Q};

    #[test]
    fn hat_values_and_errors() {
        let h = hat(&qi(1), &qi(2), &qi(4)).unwrap();
        assert_eq!(h.width(), 3);
        assert_eq!(h.eval1(&[qi(2)]).unwrap(), qi(1));
        assert_eq!(h.eval1(&[qi(1)]).unwrap(), qi(0));
        assert_eq!(h.eval1(&[qi(4)]).unwrap(), qi(0));
        assert_eq!(h.eval1(&[qi(9)]).unwrap(), qi(0));
        assert_eq!(h.eval1(&[qi(3)]).unwrap(), q(1, 2));
        assert!(hat(&qi(1), &qi(1), &qi(2)).is_err());
        assert_eq!(hat01::<Q>().width(), 2);
    }

    #[test]
    fn sawtooth_peaks() {
        for l in 1..=5 {
            let s = sawtooth::<Q>(l);
            assert_eq!(s.stats().width, 2);
            assert_eq!(s.stats().depth, l);
            assert_eq!(s.eval1(&[Q::pow2(-(l as i64))]).unwrap(), qi(1));
        }
        let s2 = sawtooth::<Q>(2);
        assert_eq!(s2.preactivations(&[q(1, 4)]).unwrap()[1], vec![q(1, 2), qi(0)]);
    }

    #[test]
    fn shallow_three_points() {
        let n = shallow_interpolant(&[qi(0), q(1, 2), qi(1)], &[qi(0), qi(1), qi(0)]).unwrap();
        assert_eq!(n.width(), 2);
        assert_eq!(n.eval1(&[q(1, 2)]).unwrap(), qi(1));
        assert_eq!(n.eval1(&[qi(1)]).unwrap(), qi(0));
        assert_eq!(n.eval1(&[qi(0)]).unwrap(), qi(0));
        let c = shallow_interpolant(&[qi(3)], &[q(2, 7)]).unwrap();
        assert_eq!(c.eval1(&[qi(-5)]).unwrap(), q(2, 7));
        assert!(shallow_interpolant(&[qi(0), qi(0)], &[qi(0), qi(1)]).is_err());
    }

    #[test]
    fn deep_interpolant_shape() {
        let pts = [qi(0), q(1, 5), q(1, 2), q(3, 4), qi(1)];
        let vals = [qi(3), qi(-2), q(7, 3), qi(0), qi(-5)];
        let n = deep_interpolant(&pts, &vals).unwrap();
        assert_eq!((n.width(), n.depth()), (3, 4));
        for (p, v) in pts.iter().zip(&vals) {
            assert_eq!(n.eval1(std::slice::from_ref(p)).unwrap(), *v);
        }
        let aff = deep_interpolant(&[q(1, 4), q(3, 4)], &[qi(1), qi(2)]).unwrap();
        assert_eq!(aff.depth(), 1);
        assert_eq!(aff.eval1(&[qi(0)]).unwrap(), q(1, 2));
        assert_eq!(aff.eval1(&[qi(1)]).unwrap(), q(5, 2));
        assert!(deep_interpolant(&[qi(0), qi(2)], &[qi(0), qi(1)]).is_err());
    }

    #[test]
    fn cpwl_to_net_hat_and_constant() {
        let g = Cpwl1D::interpolant(vec![qi(0), q(1, 2), qi(1)], vec![qi(0), qi(1), qi(0)]).unwrap();
        let n = cpwl_to_net(&g);
        assert_eq!(n.width(), 3);
        for k in -8..=16 {
            let t = q(k, 8);
            assert_eq!(n.eval1(std::slice::from_ref(&t)).unwrap(), g.eval(&t));
        }
        let c = cpwl_to_net(&Cpwl1D::constant(q(3, 2)));
        assert_eq!(c.width(), 1);
        let a = Cpwl1D::affine(qi(-3), qi(1));
        let an = cpwl_to_net(&a);
        assert_eq!(an.eval1(&[qi(-2)]).unwrap(), qi(7));
    }
}
