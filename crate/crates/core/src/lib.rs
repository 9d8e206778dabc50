//! k-means++ seeding and its greedy and rule-driven variants, the adversarial
//! instances that defeat them, and the tooling that measures what happens
//! during a run.
//!
//! The crate is organised bottom-up:
//!
//! - [`geometry`]: weighted point sets, costs, centroids, simplex directions.
//! - [`seeding`]: D² sampling, k-means++, greedy and rule-based seeding, Lloyd.
//! - [`instrumentation`]: per-cluster diagnostics replayed from a run trace.
//! - [`oracle`]: exact optima by enumeration and closed-form expectations.
//! - [`instances`]: generators and instance-level reductions.
//! - [`process`]: the ℓ-point adversarial sampling process.
//! - [`harness`]: experiment configuration, parallel trials, CSV and summaries.

pub mod error;
pub mod format;
pub mod geometry;
pub mod harness;
pub mod instances;
pub mod instrumentation;
pub mod oracle;
pub mod process;
pub mod rng;
pub mod seeding;
pub mod stats;

pub use error::{Error, Result};
pub use geometry::{
    centroid_and_opt1, point_cost, simplex_vectors, total_cost, CenterSet, ClusterRef, Coords,
    WeightedPoint, WeightedPointSet,
};
