//! Predictive permutation independence test.
//!
//! Tests `H0: X_i ⊥ Y | U` by fitting the learner on `{X_i} ∪ U` over `B`
//! independent train/test re-splits, scoring each fitted model on its test
//! partition twice: once as is and once with `X_i` permuted. If the feature
//! carries information the model can use, the permuted risks are
//! systematically larger, which a one-sided paired Wilcoxon test detects.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, TaskKind};
use crate::error::{Error, Result};
use crate::model::{empirical_risk, per_sample_loss, LearnerSpec};
use crate::seed::{self, stream};
use crate::stats::{self, PairedSample, WilcoxonOptions, WilcoxonResult};

/// Re-draws allowed when a classification test partition holds a single class.
pub const MAX_REDRAWS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PpiConfig {
    /// Number of resampled copies `B`.
    pub copies: usize,
    pub test_fraction: f64,
    pub learner: LearnerSpec,
    pub alpha: f64,
    pub seed: u64,
    pub wilcoxon: WilcoxonOptions,
}

impl Default for PpiConfig {
    fn default() -> Self {
        PpiConfig {
            copies: 10,
            test_fraction: 0.2,
            learner: LearnerSpec::default(),
            alpha: 0.05,
            seed: 0,
            wilcoxon: WilcoxonOptions::default(),
        }
    }
}

impl PpiConfig {
    /// Smallest admissible `B`: enough re-splits to cover the data once
    /// (`1 / test_fraction`), and never fewer than the paired test needs.
    pub fn min_copies(&self) -> usize {
        let cover = (1.0 / self.test_fraction - 1e-9).ceil() as usize;
        cover.max(stats::MIN_PAIRS)
    }

    /// Checks the data-independent invariants.
    pub fn validate(&self) -> Result<()> {
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::config(format!("test fraction {} must lie in (0, 1)", self.test_fraction)));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::config(format!("alpha {} must lie in (0, 1)", self.alpha)));
        }
        if self.copies < self.min_copies() {
            return Err(Error::config(format!(
                "B = {} is below the minimum of {}",
                self.copies,
                self.min_copies()
            )));
        }
        self.learner.validate()
    }

    /// Additionally checks `B <= n` for a dataset of `n` rows.
    pub fn validate_for(&self, n: usize) -> Result<()> {
        self.validate()?;
        if n < 5 {
            return Err(Error::arg(format!("independence test needs at least 5 rows, got {n}")));
        }
        if self.copies > n {
            return Err(Error::config(format!("B = {} exceeds the {n} available rows", self.copies)));
        }
        Ok(())
    }
}

/// Per-copy empirical risks on the original and the knockoff test partitions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskPair {
    pub original: Vec<f64>,
    pub knockoff: Vec<f64>,
    /// Every copy produced identical risks; the test cannot reject.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PpiOutcome {
    pub p_value: f64,
    pub risks: RiskPair,
    pub test: WilcoxonResult,
}

/// What one copy saw. Handed to observers for auditing.
#[derive(Debug)]
pub struct CopyTrace<'a> {
    pub copy: usize,
    pub split_seed: u64,
    pub permutation_seed: u64,
    /// Row indices into the dataset passed to the test.
    pub train_rows: &'a [usize],
    pub test_rows: &'a [usize],
    /// Design-matrix test partition; the last column is the tested feature.
    pub test: &'a Dataset,
    pub knockoff: &'a Dataset,
    pub original_risk: f64,
    pub knockoff_risk: f64,
}

pub fn ppi_test(ds: &Dataset, feature: usize, conditioning: &[usize], cfg: &PpiConfig) -> Result<PpiOutcome> {
    ppi_test_observed(ds, feature, conditioning, cfg, &|_| {})
}

/// [`ppi_test`] with a hook invoked once per copy (from worker threads).
pub fn ppi_test_observed(
    ds: &Dataset,
    feature: usize,
    conditioning: &[usize],
    cfg: &PpiConfig,
    observer: &(dyn Fn(&CopyTrace<'_>) + Sync),
) -> Result<PpiOutcome> {
    cfg.validate_for(ds.n_rows())?;
    if feature >= ds.n_features() {
        return Err(Error::arg(format!("feature {feature} out of range (d = {})", ds.n_features())));
    }
    if conditioning.contains(&feature) {
        return Err(Error::arg(format!("feature {feature} is also in its conditioning set")));
    }
    if ds.task() == TaskKind::Classification && ds.classes_present() < 2 {
        return Err(Error::Degenerate("independence test data holds a single class".into()));
    }
    // tested feature last, so exact split ties go to the conditioning columns
    let mut columns = Vec::with_capacity(conditioning.len() + 1);
    columns.extend_from_slice(conditioning);
    columns.push(feature);
    let design = ds.project_columns(&columns)?;

    let copies: Vec<(f64, f64)> = (0..cfg.copies)
        .into_par_iter()
        .map(|j| run_copy(&design, j, cfg, observer))
        .collect::<Result<_>>()?;
    let (original, knockoff): (Vec<f64>, Vec<f64>) = copies.into_iter().unzip();

    let test = stats::wilcoxon_one_sided_with(&PairedSample::new(&original, &knockoff)?, cfg.wilcoxon)?;
    Ok(PpiOutcome {
        p_value: test.p_value,
        risks: RiskPair {
            original,
            knockoff,
            degenerate: test.is_degenerate(),
        },
        test,
    })
}

fn run_copy(
    design: &Dataset,
    copy: usize,
    cfg: &PpiConfig,
    observer: &(dyn Fn(&CopyTrace<'_>) + Sync),
) -> Result<(f64, f64)> {
    let copy_seed = seed::derive(cfg.seed, stream::SPLIT, copy as u64);
    let permutation_seed = seed::derive(cfg.seed, stream::PERMUTE, copy as u64);
    for attempt in 0..=MAX_REDRAWS {
        let split_seed = seed::derive(copy_seed, stream::SPLIT, attempt as u64);
        let (train_rows, test_rows) = design.split_indices(cfg.test_fraction, split_seed)?;
        let test = design.take_rows(&test_rows);
        if test.task() == TaskKind::Classification && test.classes_present() < 2 {
            continue;
        }
        let train = design.take_rows(&train_rows);
        let model = cfg.learner.fit(&train)?;
        let original_risk = empirical_risk(&per_sample_loss(test.task(), &model.predict(&test)?, test.target())?)?;
        let mut knockoff = test.clone();
        knockoff.permute_column_in_place(design.n_features() - 1, permutation_seed);
        let knockoff_risk =
            empirical_risk(&per_sample_loss(knockoff.task(), &model.predict(&knockoff)?, knockoff.target())?)?;
        observer(&CopyTrace {
            copy,
            split_seed,
            permutation_seed,
            train_rows: &train_rows,
            test_rows: &test_rows,
            test: &test,
            knockoff: &knockoff,
            original_risk,
            knockoff_risk,
        });
        return Ok((original_risk, knockoff_risk));
    }
    Err(Error::Degenerate(format!(
        "copy {copy}: every test partition held a single class after {MAX_REDRAWS} re-draws"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Mutex;

    fn linear(n: usize, seed: u64) -> Dataset {
        use rand::Rng;
        let mut rng = crate::seed::rng(seed);
        let x0: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let x1: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let x2 = vec![1.0; n];
        Dataset::from_columns(vec![x0.clone(), x1, x2], x0, TaskKind::Regression).unwrap()
    }

    #[test]
    fn identity_target_is_maximally_significant() {
        let ds = linear(200, 1);
        let out = ppi_test(&ds, 0, &[], &PpiConfig::default()).unwrap();
        assert!(out.risks.original.iter().zip(&out.risks.knockoff).all(|(r, k)| r < k));
        assert_eq!(out.p_value, 2f64.powi(-10));
    }

    #[test]
    fn constant_feature_is_degenerate() {
        let ds = linear(100, 2);
        let out = ppi_test(&ds, 2, &[], &PpiConfig::default()).unwrap();
        assert!(out.risks.degenerate);
        assert_eq!(out.p_value, 1.0);
    }

    #[test]
    fn only_the_tested_column_is_permuted() {
        let ds = linear(120, 3);
        let seen = Mutex::new(Vec::new());
        ppi_test_observed(&ds, 1, &[0], &PpiConfig::default(), &|t| {
            assert_eq!(t.test.column(0), t.knockoff.column(0));
            assert_eq!(t.test.target(), t.knockoff.target());
            let mut a = t.test.column(1).to_vec();
            let mut b = t.knockoff.column(1).to_vec();
            a.sort_by(f64::total_cmp);
            b.sort_by(f64::total_cmp);
            assert_eq!(a, b);
            assert_eq!(t.test_rows.len(), 24);
            seen.lock().unwrap().push(t.split_seed);
        })
        .unwrap();
        let mut seeds = seen.into_inner().unwrap();
        seeds.sort_unstable();
        seeds.dedup();
        assert_eq!(seeds.len(), 10);
    }

    #[test]
    fn repeated_calls_agree() {
        let ds = linear(100, 4);
        let cfg = PpiConfig::default();
        let a = ppi_test(&ds, 0, &[1], &cfg).unwrap();
        let b = ppi_test(&ds, 0, &[1], &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn original_risk_depends_only_on_the_split() {
        let ds = linear(100, 6);
        let design = ds.project_columns(&[0, 1]).unwrap();
        let cfg = PpiConfig::default();
        ppi_test_observed(&ds, 1, &[0], &cfg, &|t| {
            let model = cfg.learner.fit(&design.take_rows(t.train_rows)).unwrap();
            let test = design.take_rows(t.test_rows);
            let loss = per_sample_loss(TaskKind::Regression, &model.predict(&test).unwrap(), test.target()).unwrap();
            assert_eq!(empirical_risk(&loss).unwrap(), t.original_risk);
        })
        .unwrap();
    }

    #[test]
    fn exact_duplicate_in_conditioning_set_is_not_used() {
        let ds = linear(100, 8);
        let dup = Dataset::from_columns(
            vec![ds.column(0).to_vec(), ds.column(1).to_vec(), ds.column(0).to_vec()],
            ds.target().to_vec(),
            TaskKind::Regression,
        )
        .unwrap();
        let out = ppi_test(&dup, 2, &[0, 1], &PpiConfig::default()).unwrap();
        assert!(out.risks.degenerate);
        assert_eq!(out.p_value, 1.0);
    }

    #[test]
    fn preconditions() {
        let ds = linear(50, 5);
        let cfg = PpiConfig::default();
        assert!(ppi_test(&ds, 0, &[0], &cfg).is_err());
        assert!(ppi_test(&ds, 3, &[], &cfg).is_err());
        assert!(ppi_test(&ds, 0, &[3], &cfg).is_err());
        let few = PpiConfig { copies: 4, ..cfg };
        assert!(matches!(ppi_test(&ds, 0, &[], &few), Err(Error::Config(_))));
        let many = PpiConfig { copies: 51, ..cfg };
        assert!(ppi_test(&ds, 0, &[], &many).is_err());
        let tiny = ds.take_rows(&[0, 1, 2, 3]);
        assert!(ppi_test(&tiny, 0, &[], &PpiConfig { copies: 5, ..cfg }).is_err());
    }

    #[test]
    fn min_copies_tracks_test_fraction() {
        let cfg = PpiConfig::default();
        assert_eq!(cfg.min_copies(), 5);
        assert_eq!(PpiConfig { test_fraction: 0.1, ..cfg }.min_copies(), 10);
        assert_eq!(PpiConfig { test_fraction: 0.5, ..cfg }.min_copies(), 5);
    }
}
