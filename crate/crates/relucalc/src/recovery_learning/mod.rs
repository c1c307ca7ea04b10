//! Data-side procedures: minimum-norm regression and the gradient-descent
//! limit, training small networks, the empirical tangent kernel, optimal
//! recovery from linear measurements and orthogonal greedy approximation.

pub mod greedy;
pub mod ntk;
pub mod recovery;
pub mod regression;
pub mod train;

pub use greedy::{greedy_hull_approx, loglog_slope, GreedyReport};
pub use ntk::{empirical_ntk, min_eigenvalue, ntk_init_variance, NtkVarianceRow};
pub use recovery::{optimal_recovery_linear, RecoveryResult, RecoverySetup};
pub use regression::{
    gd_linear_regression, lambda_max, min_norm_solution, null_projection, GdOptions, GdReport, RegressionInstance,
};
pub use train::{
    curve_csv, flatten_params, gd_train_net, init_net, param_gradient, squared_loss, with_params, InitScheme, TrainReport,
};
