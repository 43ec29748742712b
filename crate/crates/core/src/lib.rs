//! Markov-blanket wrapper feature selection.
//!
//! A feature is kept when a supervised model's held-out risk gets measurably
//! worse after that feature's test values are permuted (the predictive
//! permutation independence test, [`ppi`]). [`selector`] runs the test in a
//! marginal growth phase, then removes false positives in a conditional
//! shrink phase ordered by importance, optionally aggregating blankets found
//! on `K` folds. [`synth`] provides ground-truth generators, recovery scoring
//! and a cross-validated benchmark.

pub mod cli;
pub mod dataset;
pub mod error;
pub mod model;
pub mod ppi;
pub mod seed;
pub mod selector;
pub mod stats;
pub mod synth;

pub use dataset::{load_csv, Dataset, FeatureKind, SplitPair, TaskKind};
pub use error::{Error, Result};
pub use model::{empirical_risk, per_sample_loss, FittedModel, LearnerKind, LearnerSpec, LossVector, Predictions};
pub use ppi::{ppi_test, PpiConfig, PpiOutcome, RiskPair};
pub use selector::{
    aggregate, find_blanket, growth_phase, score_blankets, select, shrink_phase, sort_by_importance, BlanketEnsemble,
    CandidateBlanket, FoldMode, PpfsConfig, SelectionReport, ShrinkMode,
};
pub use stats::{wilcoxon_one_sided, WilcoxonResult};
