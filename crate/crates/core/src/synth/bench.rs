use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, TaskKind};
use crate::error::{Error, Result};
use crate::model::LearnerSpec;
use crate::seed::{self, stream};
use crate::selector::{select, PpfsConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchFold {
    pub all_features: f64,
    pub ppfs: f64,
    pub selected: Vec<String>,
    pub test_rows: usize,
}

/// Cross-validated comparison of the all-features baseline and the selected subset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub dataset: String,
    pub task: TaskKind,
    /// `accuracy` (higher is better) or `mse` (lower is better).
    pub metric: String,
    pub all_features: f64,
    pub ppfs: f64,
    pub total_features: usize,
    /// Most frequent selected-feature count across outer folds (smallest on ties).
    pub selected_mode: usize,
    pub selected_counts: Vec<usize>,
    pub folds: Vec<BenchFold>,
    pub cv_folds: usize,
    pub config: PpfsConfig,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub timings_ms: Option<f64>,
}

/// Rows handed to the selector and to evaluation in one outer fold.
#[derive(Debug)]
pub struct OuterFold<'a> {
    pub fold: usize,
    pub train: &'a Dataset,
    pub test: &'a Dataset,
}

pub fn benchmark(name: &str, ds: &Dataset, cfg: &PpfsConfig, cv_folds: usize) -> Result<BenchReport> {
    benchmark_observed(name, ds, cfg, cv_folds, &|_| {})
}

/// [`benchmark`] with a hook receiving every outer fold before selection runs.
pub fn benchmark_observed(
    name: &str,
    ds: &Dataset,
    cfg: &PpfsConfig,
    cv_folds: usize,
    observer: &(dyn Fn(&OuterFold<'_>) + Sync),
) -> Result<BenchReport> {
    if cv_folds < 2 {
        return Err(Error::config(format!("cv folds must be at least 2, got {cv_folds}")));
    }
    cfg.validate()?;
    let start = Instant::now();
    let outer = ds.k_fold_indices(cv_folds, seed::derive(cfg.seed, stream::OUTER_CV, 0))?;
    let folds: Vec<BenchFold> = outer
        .par_iter()
        .enumerate()
        .map(|(k, test_rows)| {
            let train = ds.take_rows(&ds.complement_rows(test_rows));
            let test = ds.take_rows(test_rows);
            observer(&OuterFold {
                fold: k,
                train: &train,
                test: &test,
            });
            let all: Vec<usize> = (0..ds.n_features()).collect();
            let all_features = evaluate_subset(&cfg.ppi.learner, &train, &test, &all)?;
            let inner = PpfsConfig {
                seed: seed::derive(cfg.seed, stream::OUTER_CV, k as u64 + 1),
                ..*cfg
            };
            let report = select(&train, &inner)?;
            let ppfs = evaluate_subset(&cfg.ppi.learner, &train, &test, &report.selected_indices)?;
            Ok(BenchFold {
                all_features,
                ppfs,
                selected: report.selected,
                test_rows: test.n_rows(),
            })
        })
        .collect::<Result<_>>()?;

    let mean = |f: fn(&BenchFold) -> f64| folds.iter().map(f).sum::<f64>() / folds.len() as f64;
    let selected_counts: Vec<usize> = folds.iter().map(|f| f.selected.len()).collect();
    Ok(BenchReport {
        dataset: name.to_string(),
        task: ds.task(),
        metric: match ds.task() {
            TaskKind::Classification => "accuracy".into(),
            TaskKind::Regression => "mse".into(),
        },
        all_features: mean(|f| f.all_features),
        ppfs: mean(|f| f.ppfs),
        total_features: ds.n_features(),
        selected_mode: mode(&selected_counts),
        selected_counts,
        folds,
        cv_folds,
        config: *cfg,
        timings_ms: Some(start.elapsed().as_secs_f64() * 1e3),
    })
}

/// Fits `learner` on `cols` of `train` and scores `test`: accuracy or MSE.
/// An empty column set evaluates the constant (majority / mean) predictor.
pub fn evaluate_subset(learner: &LearnerSpec, train: &Dataset, test: &Dataset, cols: &[usize]) -> Result<f64> {
    let (train, test) = if cols.is_empty() {
        (train.without_features(), test.without_features())
    } else {
        (train.project_columns(cols)?, test.project_columns(cols)?)
    };
    let model = learner.fit(&train)?;
    let preds = model.predict(&test)?;
    let n = test.n_rows() as f64;
    Ok(match test.task() {
        TaskKind::Classification => {
            (0..test.n_rows()).filter(|&i| preds.point(i) == test.target()[i]).count() as f64 / n
        }
        TaskKind::Regression => {
            (0..test.n_rows()).map(|i| (preds.point(i) - test.target()[i]).powi(2)).sum::<f64>() / n
        }
    })
}

fn mode(counts: &[usize]) -> usize {
    let mut best = (0, usize::MAX);
    for &c in counts {
        let freq = counts.iter().filter(|&&x| x == c).count();
        if freq > best.0 || (freq == best.0 && c < best.1) {
            best = (freq, c);
        }
    }
    if best.1 == usize::MAX {
        0
    } else {
        best.1
    }
}

impl BenchReport {
    pub fn without_timings(&self) -> Self {
        BenchReport {
            timings_ms: None,
            ..self.clone()
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Metric comparison row: `dataset,all,ppfs,B,K`.
    pub fn to_csv_metrics(&self) -> String {
        format!(
            "dataset,all,ppfs,B,K\n{},{:.3},{:.3},{},{}\n",
            self.dataset, self.all_features, self.ppfs, self.config.ppi.copies, self.config.folds
        )
    }

    /// Feature-count row: `dataset,total,ppfs`.
    pub fn to_csv_counts(&self) -> String {
        format!("dataset,total,ppfs\n{},{},{}\n", self.dataset, self.total_features, self.selected_mode)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{}: {} all features = {:.4}, ppfs = {:.4} ({}-fold cv)",
            self.dataset, self.metric, self.all_features, self.ppfs, self.cv_folds
        );
        let _ = writeln!(
            out,
            "selected {} of {} features (per fold: {:?})",
            self.selected_mode, self.total_features, self.selected_counts
        );
        for (k, f) in self.folds.iter().enumerate() {
            let _ = writeln!(
                out,
                "  fold {k}: all = {:.4}  ppfs = {:.4}  [{}]",
                f.all_features,
                f.ppfs,
                f.selected.join(", ")
            );
        }
        out
    }
}
