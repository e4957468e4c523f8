//! Exact-arithmetic auditing of binary decision data for group fairness,
//! plus two analysis engines built on the same machinery:
//!
//! * [`fairness`] — nine pairwise fairness checks (anti-classification,
//!   predictive parity and its one-sided halves, error-rate balance and its
//!   halves, demographic parity, conditional demographic parity) evaluated
//!   over arbitrary-precision rationals, with explicit handling of rates
//!   whose conditioning event has zero mass.
//! * [`impossibility`] — exhaustive small-space enumeration showing that
//!   predictive parity and error-rate balance can only hold together under
//!   a perfect predictor or equal base rates; every examined instance is
//!   re-derived through an independent code path and cross-checked.
//! * [`sdmodel`] — a two-gender, three-signal statistical-discrimination
//!   hiring model with closed-form rates, optimal-policy derivation,
//!   feasibility search over policy space, and a seeded Monte Carlo
//!   simulator that reproduces the closed forms.
//!
//! Supporting modules: [`rational`] (exact numbers and the
//! defined/undefined rate wrapper), [`core`] (datasets, schemas, CSV/JSON
//! ingestion, joint distributions, randomized decision tables) and
//! [`metrics`] (confusion counts and rate bundles).
//!
//! The `parallel` feature (on by default) runs the enumeration, the
//! simulator and the feasibility scan on a rayon thread pool; the same
//! entry points fall back to sequential loops when it is disabled, and the
//! sequential implementations stay available under either configuration
//! for comparison.

pub mod core;
pub mod fairness;
pub mod impossibility;
pub mod metrics;
pub mod rational;
pub mod sdmodel;

pub use crate::core::{ingest_csv_path, ingest_json_path, Dataset};
pub use fairness::{audit_dataset, FairnessVerdict};
pub use rational::{RateValue, Rational};

/// Sizes the global worker pool used by the parallel entry points.
///
/// `Some(n)` pins the pool to `n` worker threads; `None` lets the pool pick
/// its own size. Calling it more than once, or after the pool has already
/// started, has no effect beyond the first initialization. Without the
/// `parallel` feature this is a no-op.
pub fn init_thread_pool(workers: Option<usize>) {
    #[cfg(feature = "parallel")]
    if let Some(n) = workers {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global();
    }
    #[cfg(not(feature = "parallel"))]
    let _ = workers;
}
