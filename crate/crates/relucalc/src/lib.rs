//! Constructive calculus for ReLU networks.
//!
//! Build explicit networks (hats, sawtooths, interpolants, products,
//! polynomials, B-splines, bit extraction, min/max and finite-element
//! networks), combine them with structural operations, and verify their
//! width, depth and approximation guarantees in exact rational arithmetic.

pub mod analysis;
pub mod claims;
pub mod constructions_1d;
pub mod constructions_multid;
pub mod constructions_product;
pub mod net_calculus;
pub mod net_core;
pub mod recovery_learning;

pub use net_core::{NetError, Q};
