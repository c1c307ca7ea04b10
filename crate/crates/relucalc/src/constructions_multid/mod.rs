//! Multivariate constructions: min/max networks, tents, compilers for
//! signed sums of convex pieces, finite-element nodal bases on the Kuhn
//! grid and ridge interpolation.

pub mod fem;
pub mod minmax;
pub mod ridge;
pub mod tent;

pub use fem::{fem_basis_net, fem_combination, KuhnGrid};
pub use minmax::{ceil_log2, minmax_affine, minmax_outputs, AffineFamily, Extremum, MinMaxStrategy, Stacking};
pub use ridge::{ridge_interpolant, separating_direction};
pub use tent::{barycentric_family, cpwl_compile, tent_net, CompileMode, ConvexPieceDecomposition};
