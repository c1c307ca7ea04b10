//! Univariate constructions: hats, sawtooths, interpolants, bit extraction
//! and the super-convergent Lipschitz approximant.

pub mod bitextract;
pub mod cpwl;
pub mod interp;
pub mod yarotsky;

pub use bitextract::{bit_extract_net, bit_extract_special, BitExtractPlan};
pub use cpwl::Cpwl1D;
pub use interp::{cpwl_to_net, deep_interpolant, hat, hat01, sawtooth, shallow_interpolant};
pub use yarotsky::{greedy_signs, yarotsky_approx, YarotskyResult};
