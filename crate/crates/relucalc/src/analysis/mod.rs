//! Analysis of networks: exact piecewise-linear forms, uniform errors,
//! activation-region censuses, hyperplane arrangements, shattering checks
//! and the parameter-to-function Lipschitz probe.

pub mod arrangement;
pub mod census;
pub mod cpwl_extract;
pub mod error;
pub mod lipschitz;
pub mod polyhedra;
pub mod sampled;
pub mod shatter;

pub use arrangement::{
    directional_derivative, one_layer_representable, zaslavsky_bound, Arrangement, ArrangementCellReport, Cell,
    CellGradient, JumpSpec, Representability,
};
pub use census::{region_census, sample_box, ActivationPattern, CensusReport};
pub use cpwl_extract::{count_breakpoints_in, exact_cpwl_1d, layer_cpwls, special_cpwl_1d, special_to_relu_exact_1d};
pub use error::{sup_dist_quadratic, sup_error, Reference, SupError, SupMode};
pub use lipschitz::{lipschitz_probe, realization_ratio, Architecture, LipschitzRow};
pub use polyhedra::{feasible_point, LinearForm};
pub use sampled::{eval_sorted, eval_sorted1, special_eval_sorted};
pub use shatter::{bit_extract_sites, shatter_check, shatters, ShatterBuilder, ShatterOutcome};
