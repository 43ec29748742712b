use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{BlanketEnsemble, CandidateBlanket, PpfsConfig};
use crate::dataset::{Dataset, TaskKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureDetail {
    pub name: String,
    pub index: usize,
    pub p_value: f64,
    pub importance: f64,
    pub shrink_p_value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleReport {
    /// Feature names of every fold's blanket.
    pub folds: Vec<Vec<String>>,
    pub union: Vec<String>,
    pub freq: BTreeMap<String, usize>,
    pub z: Vec<f64>,
    pub winner: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub rows: usize,
    pub features: usize,
    pub task: TaskKind,
    pub classes: usize,
    /// Category table of every categorical column.
    pub categories: BTreeMap<String, Vec<String>>,
    pub class_labels: Option<Vec<String>>,
}

impl DatasetSummary {
    pub fn of(ds: &Dataset) -> Self {
        let categories = (0..ds.n_features())
            .filter_map(|j| ds.categories(j).map(|t| (ds.names()[j].clone(), t.to_vec())))
            .collect();
        DatasetSummary {
            rows: ds.n_rows(),
            features: ds.n_features(),
            task: ds.task(),
            classes: ds.n_classes(),
            categories,
            class_labels: ds.class_labels().map(<[String]>::to_vec),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub total_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub selected: Vec<String>,
    pub selected_indices: Vec<usize>,
    pub details: Vec<FeatureDetail>,
    pub ensemble: Option<EnsembleReport>,
    pub diagnostics: Vec<String>,
    pub tests_run: usize,
    pub dataset: DatasetSummary,
    pub config: PpfsConfig,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub timings_ms: Option<Timings>,
}

impl SelectionReport {
    pub(super) fn assemble(
        ds: &Dataset,
        cfg: &PpfsConfig,
        blanket: &CandidateBlanket,
        ensemble: Option<&BlanketEnsemble>,
        diagnostics: Vec<String>,
        total_ms: f64,
    ) -> Self {
        let name = |i: usize| ds.names()[i].clone();
        // report in column order, the blanket's internal order is an artifact of the shrink
        let mut entries = blanket.entries.clone();
        entries.sort_by_key(|e| e.feature);
        let details: Vec<FeatureDetail> = entries
            .iter()
            .map(|e| FeatureDetail {
                name: name(e.feature),
                index: e.feature,
                p_value: e.p_value,
                importance: e.importance,
                shrink_p_value: e.shrink_p_value,
            })
            .collect();
        let tests_run = match ensemble {
            Some(e) => e.blankets.iter().map(|b| b.tests_run).sum(),
            None => blanket.tests_run,
        };
        SelectionReport {
            selected: details.iter().map(|d| d.name.clone()).collect(),
            selected_indices: details.iter().map(|d| d.index).collect(),
            details,
            ensemble: ensemble.map(|e| EnsembleReport {
                folds: e.blankets.iter().map(|b| b.features().into_iter().map(name).collect()).collect(),
                union: e.union.iter().map(|&i| name(i)).collect(),
                freq: e.freq.iter().map(|(&i, &c)| (name(i), c)).collect(),
                z: e.z.clone(),
                winner: e.winner,
            }),
            diagnostics,
            tests_run,
            dataset: DatasetSummary::of(ds),
            config: *cfg,
            timings_ms: Some(Timings { total_ms }),
        }
    }

    pub fn without_timings(&self) -> Self {
        SelectionReport {
            timings_ms: None,
            ..self.clone()
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One row per selected feature.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("name,index,p_value,importance,shrink_p_value\n");
        for d in &self.details {
            let shrink = d.shrink_p_value.map(|p| p.to_string()).unwrap_or_default();
            let _ = writeln!(out, "{},{},{},{},{}", d.name, d.index, d.p_value, d.importance, shrink);
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "selected {} of {} features: {}",
            self.selected.len(),
            self.dataset.features,
            self.selected.join(", ")
        );
        for d in &self.details {
            let _ = writeln!(out, "  {:<24} p = {:.3e}  importance = {:.3}", d.name, d.p_value, d.importance);
        }
        if let Some(e) = &self.ensemble {
            for (k, (fold, z)) in e.folds.iter().zip(&e.z).enumerate() {
                let mark = if k == e.winner { "*" } else { " " };
                let _ = writeln!(out, "{mark} fold {k}: z = {z:.3}  [{}]", fold.join(", "));
            }
        }
        for d in &self.diagnostics {
            let _ = writeln!(out, "note: {d}");
        }
        out
    }
}
