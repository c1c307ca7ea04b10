//! Exponentially accurate emulation of squares, products, polynomials,
//! tensor products and B-splines, and the coefficient-budgeted B-spline
//! approximant for Besov-type coefficient sequences.

pub mod besov;
pub mod bspline;
pub mod poly;
pub mod square;
pub mod tensor;

pub use besov::{besov_approximant, BesovBudget, BesovReport, BsplineCoeffs, DyadicIndex};
pub use bspline::{bspline_net, bspline_ref, bspline_ref_1d, pyramid_net, univariate_spline_net};
pub use poly::{min_accuracy_level, polynomial_eval, polynomial_net};
pub use square::{
    kproduct_net, kproduct_scaled, monomial_net, product_constant, product_net, square_net, square_series, MultiIndex,
};
pub use tensor::{tensor_net, tensor_net_scaled};
