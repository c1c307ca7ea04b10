//! Network data model: scalars, layered ReLU networks, special networks with
//! source/collation channels, and the versioned JSON file format.

pub mod io;
pub mod linalg;
pub mod net;
pub mod numeric;
pub mod special;

pub use io::{load, load_str, save, to_json_string, NetFile, StoredNet};
pub use net::{param_count, Layer, NetStats, ReluNet};
pub use numeric::{convert, q_to_f64, format_scalar, parse_scalar, q, qi, Mode, Numeric, Scalar, Q};
pub use special::{
    interval_bounds, lift_relu_free, pad_depth, special_to_relu, Affine, BoxDomain, ChannelRole, Interval,
    RoleKind, SpecialBuilder, SpecialNet,
};

/// Errors raised by network construction, evaluation and I/O.
#[derive(Debug, thiserror::Error)]
pub enum NetError {
    #[error("input has dimension {got}, expected {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("shape error: {0}")]
    Shape(String),
    #[error("precondition violated: {0}")]
    Contract(String),
    #[error("unbounded domain: {0}")]
    Unbounded(String),
    #[error("value not representable in exact arithmetic: {0}")]
    NotRepresentable(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unsupported file version {0}")]
    Version(u32),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
