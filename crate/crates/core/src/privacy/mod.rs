//! Reconciliation and privacy amplification.

mod plan;
mod reconcile;
mod toeplitz;

pub use plan::{leakage_bound, make_plan, AmplificationPlan};
pub use reconcile::{bisect_error, reconcile, reconcile_with, ReconcileConfig, ReconcileOutcome};
pub use toeplitz::{
    apply_hash, exhaustive_worst_collision, sample_toeplitz, sampled_collision_rate, ToeplitzHash,
};
