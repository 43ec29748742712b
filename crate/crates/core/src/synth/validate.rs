use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{generate_bn, score_recovery, BnSpec, RecoveryScore};
use crate::error::{Error, Result};
use crate::seed::{self, stream};
use crate::selector::{select, PpfsConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateResult {
    pub replicate: usize,
    pub data_seed: u64,
    pub selected: Vec<String>,
    pub score: RecoveryScore,
    /// Fraction of the network's spouses that were selected (None without spouses).
    pub spouse_recall: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoverySummary {
    pub spec: BnSpec,
    pub config: PpfsConfig,
    pub mean_f1: f64,
    pub min_f1: f64,
    pub max_f1: f64,
    /// Share of replicates in which every spouse was selected.
    pub spouse_recovery_rate: Option<f64>,
    pub replicates: Vec<ReplicateResult>,
}

/// Generates `replicates` networks from `spec` (seeds derived from `seed`),
/// runs selection on each, and scores recovery of the true blanket.
pub fn validate_recovery(spec: &BnSpec, cfg: &PpfsConfig, replicates: usize, seed: u64) -> Result<RecoverySummary> {
    if replicates == 0 {
        return Err(Error::config("need at least one replicate"));
    }
    spec.validate()?;
    cfg.validate()?;
    let spouses: Vec<usize> = (spec.n_parents + spec.n_children..spec.n_parents + spec.n_children + spec.n_spouses).collect();
    let results: Vec<ReplicateResult> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let data_seed = seed::derive(seed, stream::REPLICATE, r as u64);
            let (ds, truth) = generate_bn(&BnSpec { seed: data_seed, ..*spec })?;
            let run_cfg = PpfsConfig {
                seed: seed::derive(data_seed, stream::REPLICATE, 0),
                ..*cfg
            };
            let report = select(&ds, &run_cfg)?;
            let score = score_recovery(&report.selected_indices, &truth);
            let spouse_recall = (!spouses.is_empty()).then(|| {
                spouses.iter().filter(|s| report.selected_indices.contains(s)).count() as f64 / spouses.len() as f64
            });
            Ok(ReplicateResult {
                replicate: r,
                data_seed,
                selected: report.selected,
                score,
                spouse_recall,
            })
        })
        .collect::<Result<_>>()?;

    let f1: Vec<f64> = results.iter().map(|r| r.score.f1).collect();
    let spouse_recovery_rate = (!spouses.is_empty()).then(|| {
        results.iter().filter(|r| r.spouse_recall == Some(1.0)).count() as f64 / results.len() as f64
    });
    Ok(RecoverySummary {
        spec: *spec,
        config: *cfg,
        mean_f1: f1.iter().sum::<f64>() / f1.len() as f64,
        min_f1: f1.iter().copied().fold(f64::INFINITY, f64::min),
        max_f1: f1.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        spouse_recovery_rate,
        replicates: results,
    })
}

impl RecoverySummary {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("replicate,data_seed,precision,recall,f1,spouse_recall,selected\n");
        for r in &self.replicates {
            let spouse = r.spouse_recall.map(|v| v.to_string()).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.replicate,
                r.data_seed,
                r.score.precision,
                r.score.recall,
                r.score.f1,
                spouse,
                r.selected.join(";")
            );
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "F1 over {} replicates: mean = {:.4}, min = {:.4}, max = {:.4}",
            self.replicates.len(),
            self.mean_f1,
            self.min_f1,
            self.max_f1
        );
        if let Some(rate) = self.spouse_recovery_rate {
            let _ = writeln!(out, "spouses recovered in {:.1}% of replicates", 100.0 * rate);
        }
        for r in &self.replicates {
            let _ = writeln!(
                out,
                "  #{:<3} P = {:.3}  R = {:.3}  F1 = {:.3}  [{}]",
                r.replicate,
                r.score.precision,
                r.score.recall,
                r.score.f1,
                r.selected.join(", ")
            );
        }
        out
    }
}
