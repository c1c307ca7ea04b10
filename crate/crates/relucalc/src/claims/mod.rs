//! Executable claims: each entry builds the relevant constructions, measures
//! them against their width/depth/error contracts and reports the outcome.
//!
//! Claims are identified by a short kebab-case id and a number; the number
//! fixes the order in which reports are emitted.  Independent claims run in
//! parallel.

mod approx;
mod learning;
mod structure;

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use crate::net_core::NetError;

/// Knobs shared by all claims.  Every field has a default that reproduces
/// the canonical run; claims ignore options that do not apply to them.
#[derive(Debug, Clone, PartialEq)]
pub struct ClaimOptions {
    /// Override of the construction parameter swept by the claim (`n`, or
    /// `L` for the sawtooth).
    pub n: Option<Vec<usize>>,
    /// Target function for the super-convergence claim.
    pub f: Option<String>,
    /// Override of the grid resolution (points per axis, or sample count
    /// for sampled claims).
    pub grid: Option<usize>,
    /// Additive slack granted to every error bound.
    pub tolerance: f64,
    pub seed: u64,
    /// Evaluate grid errors in exact rational arithmetic instead of `f64`.
    pub exact: bool,
}

impl Default for ClaimOptions {
    fn default() -> Self {
        ClaimOptions { n: None, f: None, grid: None, tolerance: 0.0, seed: 0, exact: false }
    }
}

/// Failure to run a claim.
#[derive(Debug, thiserror::Error)]
pub enum ClaimError {
    /// Bad options: unknown target name, out-of-range parameter.
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Net(#[from] NetError),
}

/// What a claim produced: the contract it checked, the measurements and
/// whether they satisfy the contract.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Outcome {
    pub contract: String,
    pub measured: Value,
    pub pass: bool,
}

/// One registered claim.
pub struct Claim {
    pub number: usize,
    pub id: &'static str,
    pub title: &'static str,
    run: fn(&ClaimOptions) -> Result<Outcome, ClaimError>,
}

impl std::fmt::Debug for Claim {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Claim").field("number", &self.number).field("id", &self.id).finish()
    }
}

impl Claim {
    /// Run the claim and time it.  Construction errors become failed
    /// reports; usage errors are returned.
    pub fn run(&self, opts: &ClaimOptions) -> Result<VerificationReport, ClaimError> {
        let start = Instant::now();
        let res = (self.run)(opts);
        let runtime_ms = start.elapsed().as_secs_f64() * 1e3;
        let mut report = VerificationReport {
            claim_id: self.id.to_string(),
            number: self.number,
            title: self.title.to_string(),
            contract: String::new(),
            measured: Value::Null,
            pass: false,
            runtime_ms,
            error: None,
        };
        match res {
            Ok(o) => {
                report.contract = o.contract;
                report.measured = o.measured;
                report.pass = o.pass;
            }
            Err(ClaimError::Usage(m)) => return Err(ClaimError::Usage(m)),
            Err(ClaimError::Net(e)) => report.error = Some(e.to_string()),
        }
        Ok(report)
    }
}

/// Result of running one claim.  `pass` holds iff the measurements satisfy
/// the contract within the declared tolerance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub claim_id: String,
    pub number: usize,
    pub title: String,
    pub contract: String,
    pub measured: Value,
    pub pass: bool,
    pub runtime_ms: f64,
    /// Set when the claim could not be carried out.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl VerificationReport {
    /// `[PASS] 1 square-error (12.3 ms)` style summary line.
    pub fn summary_line(&self) -> String {
        let tag = if self.pass { "PASS" } else { "FAIL" };
        let mut s = format!("[{tag}] {:>2} {} ({:.1} ms)", self.number, self.claim_id, self.runtime_ms);
        if let Some(e) = &self.error {
            s.push_str(&format!(": {e}"));
        }
        s
    }
}

static REGISTRY: &[Claim] = &[
    Claim { number: 1, id: "square-error", title: "squaring network error", run: approx::square_error },
    Claim { number: 2, id: "product-error", title: "two-factor product error and range", run: approx::product_error },
    Claim { number: 3, id: "kproduct-error", title: "k-factor product error", run: approx::kproduct_error },
    Claim { number: 4, id: "sawtooth", title: "sawtooth breakpoints and shape", run: structure::sawtooth },
    Claim { number: 5, id: "breakpoint-bound", title: "breakpoint count of random networks", run: structure::breakpoint_bound },
    Claim { number: 6, id: "bit-extraction", title: "bit-extraction interpolation", run: structure::bit_extraction },
    Claim { number: 7, id: "yarotsky", title: "super-convergent Lipschitz approximation", run: approx::yarotsky },
    Claim { number: 8, id: "minmax", title: "min/max network exactness and shape", run: structure::minmax },
    Claim { number: 9, id: "arrangement-cells", title: "cells of generic line arrangements", run: structure::arrangement_cells },
    Claim { number: 10, id: "fem-nodal", title: "finite-element nodal basis", run: structure::fem_nodal },
    Claim { number: 11, id: "bspline", title: "B-spline emulation", run: approx::bspline },
    Claim { number: 12, id: "besov-budget", title: "Besov accuracy-level budget", run: approx::besov_budget },
    Claim { number: 13, id: "gd-limit", title: "gradient-descent limit of least squares", run: learning::gd_limit },
    Claim { number: 14, id: "optimal-recovery", title: "optimal recovery from linear data", run: learning::optimal_recovery },
    Claim { number: 15, id: "ntk", title: "tangent kernel structure", run: learning::ntk },
    Claim { number: 16, id: "greedy-rate", title: "greedy approximation rate", run: learning::greedy_rate },
    Claim { number: 17, id: "shattering", title: "shattering capacity", run: structure::shattering },
    Claim { number: 18, id: "realization", title: "eval-preserving calculus and Lipschitz probe", run: structure::realization },
];

/// All claims, ordered by number.
pub fn registry() -> &'static [Claim] {
    REGISTRY
}

/// Look a claim up by id or by number.
pub fn find(key: &str) -> Option<&'static Claim> {
    REGISTRY.iter().find(|c| c.id == key || key.parse::<usize>().is_ok_and(|k| k == c.number))
}

/// Run `claims` in parallel; reports come back ordered by claim number.
pub fn run_claims(claims: &[&Claim], opts: &ClaimOptions) -> Result<Vec<VerificationReport>, ClaimError> {
    let mut sorted = claims.to_vec();
    sorted.sort_by_key(|c| c.number);
    sorted.dedup_by_key(|c| c.number);
    sorted.par_iter().map(|c| c.run(opts)).collect()
}

/// `err ≤ bound + tol` on `f64` values, treating NaN as a failure.
pub(crate) fn within(err: f64, bound: f64, tol: f64) -> bool {
    err <= bound + tol
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_is_numbered_consecutively_with_unique_ids() {
        for (i, c) in registry().iter().enumerate() {
            assert_eq!(c.number, i + 1);
            assert_eq!(registry().iter().filter(|d| d.id == c.id).count(), 1);
        }
        assert_eq!(registry().len(), 18);
        assert_eq!(find("sawtooth").unwrap().number, 4);
        assert_eq!(find("7").unwrap().id, "yarotsky");
        assert!(find("nosuch").is_none());
    }

    #[test]
    fn quick_claims_pass() {
        let opts = ClaimOptions::default();
        let claims: Vec<&Claim> = ["square-error", "sawtooth", "besov-budget"].iter().map(|k| find(k).unwrap()).collect();
        let reports = run_claims(&claims, &opts).unwrap();
        assert_eq!(reports.iter().map(|r| r.number).collect::<Vec<_>>(), vec![1, 4, 12]);
        assert!(reports.iter().all(|r| r.pass), "{reports:#?}");
    }

    #[test]
    fn unknown_target_is_a_usage_error() {
        let opts = ClaimOptions { f: Some("nosuch".into()), ..ClaimOptions::default() };
        assert!(matches!(find("yarotsky").unwrap().run(&opts), Err(ClaimError::Usage(_))));
    }
}
