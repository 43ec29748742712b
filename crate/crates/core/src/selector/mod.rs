//! Markov-blanket search: growth, importance-ordered shrink, and K-fold
//! blanket aggregation.

mod report;

pub use report::{DatasetSummary, EnsembleReport, FeatureDetail, SelectionReport, Timings};

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, TaskKind};
use crate::error::{Error, Result};
use crate::ppi::{ppi_test, PpiConfig};
use crate::seed::{self, stream};

/// Floor applied to p-values before taking `ln(1/p)`.
pub const P_VALUE_FLOOR: f64 = 1e-300;

/// `ln(1 / p)`; larger is more important.
pub fn importance(p_value: f64) -> f64 {
    -p_value.max(P_VALUE_FLOOR).ln()
}

/// Which rows a fold contributes to its blanket search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FoldMode {
    /// The fold's own `n / K` rows.
    #[default]
    Subset,
    /// Every row outside the fold.
    Complement,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShrinkMode {
    /// One pass in ascending importance order.
    #[default]
    Improved,
    /// Restart the pass after every removal until a pass removes nothing.
    Restart,
}

impl std::str::FromStr for FoldMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "subset" => Ok(FoldMode::Subset),
            "complement" => Ok(FoldMode::Complement),
            other => Err(Error::config(format!("unknown fold mode `{other}`"))),
        }
    }
}

impl std::str::FromStr for ShrinkMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "improved" => Ok(ShrinkMode::Improved),
            "restart" => Ok(ShrinkMode::Restart),
            other => Err(Error::config(format!("unknown shrink mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PpfsConfig {
    /// Per-test settings. Its `alpha` is the selection threshold; its `seed`
    /// is overridden per test from [`PpfsConfig::seed`].
    pub ppi: PpiConfig,
    /// Fold count `K` for blanket aggregation, 0 to disable.
    pub folds: usize,
    pub fold_mode: FoldMode,
    pub shrink_mode: ShrinkMode,
    pub seed: u64,
}

impl Default for PpfsConfig {
    fn default() -> Self {
        PpfsConfig {
            ppi: PpiConfig::default(),
            folds: 0,
            fold_mode: FoldMode::Subset,
            shrink_mode: ShrinkMode::Improved,
            seed: 0,
        }
    }
}

impl PpfsConfig {
    pub fn alpha(&self) -> f64 {
        self.ppi.alpha
    }

    pub fn validate(&self) -> Result<()> {
        self.ppi.validate()?;
        if self.folds == 1 {
            return Err(Error::config("K must be 0 (no aggregation) or at least 2"));
        }
        Ok(())
    }

    /// Data-dependent checks: `K <= n`, and `B` fits the rows each search sees.
    pub fn validate_for(&self, ds: &Dataset) -> Result<()> {
        self.validate()?;
        let n = ds.n_rows();
        if self.folds > n {
            return Err(Error::config(format!("K = {} exceeds the {n} rows", self.folds)));
        }
        let rows_per_search = match (self.folds, self.fold_mode) {
            (0, _) => n,
            (k, FoldMode::Subset) => n / k,
            (k, FoldMode::Complement) => n - n.div_ceil(k),
        };
        self.ppi.validate_for(rows_per_search)
    }

    fn ppi_for(&self, stream: u64, index: u64) -> PpiConfig {
        PpiConfig {
            seed: seed::derive(self.seed, stream, index),
            ..self.ppi
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlanketEntry {
    pub feature: usize,
    /// Growth-phase (marginal) p-value.
    pub p_value: f64,
    pub importance: f64,
    /// Conditional p-value from the last shrink test, if one ran.
    pub shrink_p_value: Option<f64>,
}

impl BlanketEntry {
    pub fn new(feature: usize, p_value: f64) -> Self {
        BlanketEntry {
            feature,
            p_value,
            importance: importance(p_value),
            shrink_p_value: None,
        }
    }
}

/// Ordered candidate Markov blanket.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CandidateBlanket {
    pub entries: Vec<BlanketEntry>,
    pub source_fold: Option<usize>,
    /// Independence tests run to produce this blanket (growth + shrink).
    pub tests_run: usize,
}

impl CandidateBlanket {
    pub fn features(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.feature).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, feature: usize) -> bool {
        self.entries.iter().any(|e| e.feature == feature)
    }
}

/// Per-fold blankets and their frequency scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlanketEnsemble {
    pub blankets: Vec<CandidateBlanket>,
    /// Union of all blankets, ascending.
    pub union: Vec<usize>,
    /// Number of blankets containing each union member.
    pub freq: BTreeMap<usize, usize>,
    /// Mean member frequency per blanket; 0 for an empty blanket.
    pub z: Vec<f64>,
    /// First blanket attaining the maximum score.
    pub winner: usize,
}

impl BlanketEnsemble {
    pub fn all_empty(&self) -> bool {
        self.blankets.iter().all(CandidateBlanket::is_empty)
    }
}

/// Marginal test of every feature; keeps those with `p <= alpha`.
pub fn growth_phase(ds: &Dataset, cfg: &PpfsConfig) -> Result<CandidateBlanket> {
    cfg.validate()?;
    let scan = growth_scan(ds, cfg)?;
    let entries: Vec<BlanketEntry> = scan
        .into_iter()
        .filter(|&(_, p)| p <= cfg.alpha())
        .map(|(i, p)| BlanketEntry::new(i, p))
        .collect();
    Ok(CandidateBlanket {
        entries,
        source_fold: None,
        tests_run: ds.n_features(),
    })
}

fn growth_scan(ds: &Dataset, cfg: &PpfsConfig) -> Result<Vec<(usize, f64)>> {
    (0..ds.n_features())
        .into_par_iter()
        .map(|i| {
            let p = ppi_test(ds, i, &[], &cfg.ppi_for(stream::GROWTH, i as u64))?.p_value;
            Ok((i, p))
        })
        .collect()
}

/// Ascending importance (descending p-value); ties keep ascending feature index.
pub fn sort_by_importance(cb: &CandidateBlanket) -> CandidateBlanket {
    let mut out = cb.clone();
    out.entries
        .sort_by(|a, b| b.p_value.total_cmp(&a.p_value).then(a.feature.cmp(&b.feature)));
    out
}

/// Removes candidates that are independent of the target given the rest of
/// the blanket. `cb` should already be in ascending importance order.
pub fn shrink_phase(ds: &Dataset, cb: &CandidateBlanket, cfg: &PpfsConfig) -> Result<CandidateBlanket> {
    cfg.validate()?;
    let mut current = cb.entries.clone();
    let mut tests = 0;
    match cfg.shrink_mode {
        ShrinkMode::Improved => {
            let order = cb.features();
            for feature in order {
                if current.len() <= 1 {
                    break;
                }
                let p = conditional_p(ds, feature, &current, cfg.ppi_for(stream::SHRINK, feature as u64))?;
                tests += 1;
                record_or_remove(&mut current, feature, p, cfg.alpha());
            }
        }
        ShrinkMode::Restart => {
            let mut removals = 0u64;
            'pass: loop {
                let order: Vec<usize> = current.iter().map(|e| e.feature).collect();
                for feature in order {
                    if current.len() <= 1 {
                        break 'pass;
                    }
                    let pass_seed = seed::derive(cfg.seed, stream::SHRINK, removals);
                    let ppi = PpiConfig {
                        seed: seed::derive(pass_seed, stream::SHRINK, feature as u64),
                        ..cfg.ppi
                    };
                    let p = conditional_p(ds, feature, &current, ppi)?;
                    tests += 1;
                    if record_or_remove(&mut current, feature, p, cfg.alpha()) {
                        removals += 1;
                        continue 'pass;
                    }
                }
                break;
            }
        }
    }
    Ok(CandidateBlanket {
        entries: current,
        source_fold: cb.source_fold,
        tests_run: cb.tests_run + tests,
    })
}

fn conditional_p(ds: &Dataset, feature: usize, current: &[BlanketEntry], ppi: PpiConfig) -> Result<f64> {
    let rest: Vec<usize> = current.iter().map(|e| e.feature).filter(|&f| f != feature).collect();
    Ok(ppi_test(ds, feature, &rest, &ppi)?.p_value)
}

/// Returns true when the feature was removed.
fn record_or_remove(current: &mut Vec<BlanketEntry>, feature: usize, p: f64, alpha: f64) -> bool {
    let at = current.iter().position(|e| e.feature == feature).expect("feature in blanket");
    if p > alpha {
        current.remove(at);
        true
    } else {
        current[at].shrink_p_value = Some(p);
        false
    }
}

/// Growth, importance sort, and shrink on one dataset.
pub fn find_blanket(ds: &Dataset, cfg: &PpfsConfig) -> Result<CandidateBlanket> {
    let grown = growth_phase(ds, cfg)?;
    shrink_phase(ds, &sort_by_importance(&grown), cfg)
}

/// Frequency scores of a set of blankets.
pub fn score_blankets(blankets: Vec<CandidateBlanket>) -> Result<BlanketEnsemble> {
    if blankets.is_empty() {
        return Err(Error::arg("no blankets to score"));
    }
    let union: Vec<usize> = blankets
        .iter()
        .flat_map(|b| b.features())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut freq: BTreeMap<usize, usize> = BTreeMap::new();
    for b in &blankets {
        for f in b.features() {
            *freq.entry(f).or_default() += 1;
        }
    }
    let z: Vec<f64> = blankets
        .iter()
        .map(|b| {
            if b.is_empty() {
                0.0
            } else {
                b.features().iter().map(|f| freq[f] as f64).sum::<f64>() / b.len() as f64
            }
        })
        .collect();
    let mut winner = 0;
    for (i, &score) in z.iter().enumerate() {
        if score > z[winner] {
            winner = i;
        }
    }
    Ok(BlanketEnsemble {
        blankets,
        union,
        freq,
        z,
        winner,
    })
}

/// Runs the blanket search on each of `K` folds and keeps the best-scoring blanket.
pub fn aggregate(ds: &Dataset, cfg: &PpfsConfig) -> Result<(BlanketEnsemble, CandidateBlanket)> {
    cfg.validate()?;
    if cfg.folds < 2 {
        return Err(Error::config("aggregation needs K >= 2"));
    }
    let folds = ds.k_fold_indices(cfg.folds, seed::derive(cfg.seed, stream::PARTITION, 0))?;
    let blankets: Vec<CandidateBlanket> = folds
        .par_iter()
        .enumerate()
        .map(|(k, rows)| {
            let rows = match cfg.fold_mode {
                FoldMode::Subset => rows.clone(),
                FoldMode::Complement => ds.complement_rows(rows),
            };
            let fold = ds.take_rows(&rows);
            if fold.task() == TaskKind::Classification && fold.classes_present() < 2 {
                return Err(Error::Degenerate(format!("fold {k} contains a single class")));
            }
            let fold_cfg = PpfsConfig {
                seed: seed::derive(cfg.seed, stream::FOLD, k as u64),
                ..*cfg
            };
            let mut blanket = find_blanket(&fold, &fold_cfg)?;
            blanket.source_fold = Some(k);
            Ok(blanket)
        })
        .collect::<Result<_>>()?;
    let ensemble = score_blankets(blankets)?;
    let chosen = ensemble.blankets[ensemble.winner].clone();
    Ok((ensemble, chosen))
}

/// Full selection run, with diagnostics and timings.
pub fn select(ds: &Dataset, cfg: &PpfsConfig) -> Result<SelectionReport> {
    cfg.validate_for(ds)?;
    let start = Instant::now();
    let mut diagnostics = Vec::new();
    let (blanket, ensemble) = if cfg.folds == 0 {
        (find_blanket(ds, cfg)?, None)
    } else {
        let (ensemble, blanket) = aggregate(ds, cfg)?;
        if ensemble.all_empty() {
            diagnostics.push(format!("all {} fold blankets are empty; nothing selected", cfg.folds));
        }
        (blanket, Some(ensemble))
    };
    if blanket.is_empty() && ensemble.is_none() {
        diagnostics.push("no feature passed the growth and shrink phases".to_string());
    }
    let total_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(SelectionReport::assemble(ds, cfg, &blanket, ensemble.as_ref(), diagnostics, total_ms))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blanket(features: &[usize]) -> CandidateBlanket {
        CandidateBlanket {
            entries: features.iter().map(|&f| BlanketEntry::new(f, 0.01)).collect(),
            source_fold: None,
            tests_run: 0,
        }
    }

    #[test]
    fn importance_is_natural_log() {
        assert!((importance(0.05) - 2.995_732_273_553_991).abs() < 1e-12);
        assert!(importance(0.0).is_finite());
        assert!(importance(0.01) > importance(0.02));
    }

    #[test]
    fn sort_puts_least_important_first() {
        let cb = CandidateBlanket {
            entries: vec![
                BlanketEntry::new(0, 0.01),
                BlanketEntry::new(1, 0.04),
                BlanketEntry::new(2, 0.002),
            ],
            ..Default::default()
        };
        assert_eq!(sort_by_importance(&cb).features(), vec![1, 0, 2]);
        let tied = CandidateBlanket {
            entries: vec![BlanketEntry::new(3, 0.01), BlanketEntry::new(1, 0.01)],
            ..Default::default()
        };
        assert_eq!(sort_by_importance(&tied).features(), vec![1, 3]);
        assert_eq!(sort_by_importance(&blanket(&[4])).features(), vec![4]);
    }

    #[test]
    fn hand_evaluated_scores() {
        let e = score_blankets(vec![blanket(&[0, 1]), blanket(&[0, 2]), blanket(&[0])]).unwrap();
        assert_eq!(e.union, vec![0, 1, 2]);
        assert_eq!(e.freq, BTreeMap::from([(0, 3), (1, 1), (2, 1)]));
        assert_eq!(e.z, vec![2.0, 2.0, 3.0]);
        assert_eq!(e.winner, 2);
    }

    #[test]
    fn identical_blankets_score_k_and_tie_to_first() {
        let e = score_blankets(vec![blanket(&[1, 4]); 4]).unwrap();
        assert_eq!(e.z, vec![4.0; 4]);
        assert_eq!(e.winner, 0);
    }

    #[test]
    fn empty_blanket_scores_zero() {
        let e = score_blankets(vec![blanket(&[]), blanket(&[5])]).unwrap();
        assert_eq!(e.z, vec![0.0, 1.0]);
        assert_eq!(e.winner, 1);
        let all = score_blankets(vec![blanket(&[]), blanket(&[])]).unwrap();
        assert!(all.all_empty());
        assert_eq!(all.winner, 0);
    }

    #[test]
    fn singleton_shrink_is_a_no_op() {
        let ds = Dataset::from_columns(
            vec![(0..20).map(f64::from).collect()],
            (0..20).map(f64::from).collect(),
            TaskKind::Regression,
        )
        .unwrap();
        let cb = blanket(&[0]);
        let out = shrink_phase(&ds, &cb, &PpfsConfig::default()).unwrap();
        assert_eq!(out.entries, cb.entries);
        assert_eq!(out.tests_run, 0);
    }

    #[test]
    fn config_rejects_k_of_one() {
        let cfg = PpfsConfig {
            folds: 1,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }
}
