//! Ground-truth validation: synthetic networks with a known Markov blanket,
//! recovery scoring, and the cross-validated benchmark harness.

mod bench;
mod bn;
mod recovery;
pub mod standin;
mod validate;

pub use bench::{benchmark, benchmark_observed, evaluate_subset, BenchFold, BenchReport, OuterFold};
pub use bn::{generate_bn, BnSpec, TargetLink};
pub use recovery::{score_recovery, RecoveryScore};
pub use validate::{validate_recovery, RecoverySummary, ReplicateResult};
