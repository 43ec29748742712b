//! The supervised learner used inside the independence test, and its losses.

mod cart;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, TaskKind};
use crate::error::{Error, Result};

/// Lower clip for predicted probabilities in log-loss.
pub const LOG_LOSS_EPS: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearnerKind {
    CartTree,
}

/// Learner hyperparameters. Defaults follow the usual CART defaults:
/// unlimited depth, `min_samples_split = 2`, `min_samples_leaf = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LearnerSpec {
    pub kind: LearnerKind,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    /// Unused by the greedy tree; kept so stochastic learners share the contract.
    pub seed: u64,
}

impl Default for LearnerSpec {
    fn default() -> Self {
        LearnerSpec {
            kind: LearnerKind::CartTree,
            max_depth: None,
            min_samples_split: 2,
            min_samples_leaf: 1,
            seed: 0,
        }
    }
}

impl LearnerSpec {
    pub fn validate(&self) -> Result<()> {
        if self.max_depth == Some(0) {
            return Err(Error::config("max_depth must be at least 1 (or unlimited)"));
        }
        if self.min_samples_split < 2 {
            return Err(Error::config("min_samples_split must be at least 2"));
        }
        if self.min_samples_leaf < 1 {
            return Err(Error::config("min_samples_leaf must be at least 1"));
        }
        Ok(())
    }

    pub fn fit(&self, train: &Dataset) -> Result<FittedModel> {
        self.validate()?;
        if train.n_rows() == 0 {
            return Err(Error::arg("cannot fit on an empty training set"));
        }
        let tree = match self.kind {
            LearnerKind::CartTree => cart::grow(
                train.columns(),
                train.target(),
                train.task(),
                train.n_classes(),
                &cart::GrowParams {
                    max_depth: self.max_depth,
                    min_samples_split: self.min_samples_split,
                    min_samples_leaf: self.min_samples_leaf,
                },
            ),
        };
        Ok(FittedModel {
            tree,
            task: train.task(),
            n_classes: train.n_classes(),
            n_features: train.n_features(),
            n_train: train.n_rows(),
            feature_names: train.names().to_vec(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FittedModel {
    tree: cart::Tree,
    task: TaskKind,
    n_classes: usize,
    n_features: usize,
    n_train: usize,
    feature_names: Vec<String>,
}

/// Model output for a batch of rows.
#[derive(Debug, Clone, PartialEq)]
pub enum Predictions {
    /// Row-major `rows x n_classes` probabilities.
    Probabilities { n_classes: usize, values: Vec<f64> },
    Values(Vec<f64>),
}

impl Predictions {
    pub fn len(&self) -> usize {
        match self {
            Predictions::Probabilities { n_classes, values } => values.len() / (*n_classes).max(1),
            Predictions::Values(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Probability row `i` (classification only).
    pub fn probabilities(&self, i: usize) -> Option<&[f64]> {
        match self {
            Predictions::Probabilities { n_classes, values } => Some(&values[i * n_classes..(i + 1) * n_classes]),
            Predictions::Values(_) => None,
        }
    }

    /// Arg-max class for classification, the value itself for regression.
    pub fn point(&self, i: usize) -> f64 {
        match self {
            Predictions::Probabilities { .. } => {
                let row = self.probabilities(i).unwrap();
                let mut best = 0;
                for (c, &p) in row.iter().enumerate() {
                    if p > row[best] {
                        best = c;
                    }
                }
                best as f64
            }
            Predictions::Values(v) => v[i],
        }
    }
}

impl FittedModel {
    pub fn task(&self) -> TaskKind {
        self.task
    }

    pub fn n_train(&self) -> usize {
        self.n_train
    }

    pub fn n_leaves(&self) -> usize {
        self.tree.payloads.len() / self.tree.stride.max(1)
    }

    pub fn depth(&self) -> usize {
        self.tree.depth
    }

    pub fn predict(&self, x: &Dataset) -> Result<Predictions> {
        if x.n_features() != self.n_features {
            return Err(Error::arg(format!(
                "model expects {} columns, got {}",
                self.n_features,
                x.n_features()
            )));
        }
        let cols = x.columns();
        let n = x.n_rows();
        match self.task {
            TaskKind::Classification => {
                let values = (0..n).flat_map(|i| self.tree.leaf_for(|f| cols[f][i]).iter().copied()).collect();
                Ok(Predictions::Probabilities {
                    n_classes: self.n_classes,
                    values,
                })
            }
            TaskKind::Regression => Ok(Predictions::Values(
                (0..n).map(|i| self.tree.leaf_for(|f| cols[f][i])[0]).collect(),
            )),
        }
    }

    /// Indented text rendering of the tree.
    pub fn render(&self) -> String {
        let mut out = String::new();
        self.render_node(0, 0, &mut out);
        out
    }

    fn render_node(&self, at: usize, indent: usize, out: &mut String) {
        let pad = "  ".repeat(indent);
        match self.tree.nodes[at] {
            cart::Node::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                let _ = writeln!(out, "{pad}{} <= {threshold}", self.feature_names[feature]);
                self.render_node(left, indent + 1, out);
                let _ = writeln!(out, "{pad}{} > {threshold}", self.feature_names[feature]);
                self.render_node(right, indent + 1, out);
            }
            cart::Node::Leaf { payload } => {
                let values = &self.tree.payloads[payload..payload + self.tree.stride];
                let _ = writeln!(out, "{pad}leaf {values:?}");
            }
        }
    }
}

/// Per-sample losses of one prediction batch. Entries are non-negative.
#[derive(Debug, Clone, PartialEq)]
pub struct LossVector(Vec<f64>);

impl LossVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// Log-loss (classification, probabilities clipped to `[eps, 1 - eps]`) or
/// squared error (regression) for every sample.
pub fn per_sample_loss(task: TaskKind, predictions: &Predictions, actual: &[f64]) -> Result<LossVector> {
    if predictions.len() != actual.len() {
        return Err(Error::arg(format!(
            "{} predictions for {} targets",
            predictions.len(),
            actual.len()
        )));
    }
    let losses = match (task, predictions) {
        (TaskKind::Regression, Predictions::Values(v)) => v.iter().zip(actual).map(|(p, y)| (p - y) * (p - y)).collect(),
        (TaskKind::Classification, Predictions::Probabilities { n_classes, values }) => {
            let mut out = Vec::with_capacity(actual.len());
            for (row, &y) in values.chunks_exact(*n_classes).zip(actual) {
                let total: f64 = row.iter().sum();
                if (total - 1.0).abs() > 1e-9 {
                    return Err(Error::arg(format!("probability row sums to {total}")));
                }
                let class = y as usize;
                if y < 0.0 || class >= *n_classes {
                    return Err(Error::arg(format!("label {y} outside [0, {n_classes})")));
                }
                let p = row[class].clamp(LOG_LOSS_EPS, 1.0 - LOG_LOSS_EPS);
                out.push(-p.ln());
            }
            out
        }
        _ => return Err(Error::arg("prediction type does not match the task")),
    };
    Ok(LossVector(losses))
}

/// Mean per-sample loss.
pub fn empirical_risk(loss: &LossVector) -> Result<f64> {
    if loss.0.is_empty() {
        return Err(Error::arg("empirical risk of an empty loss vector"));
    }
    Ok(loss.0.iter().sum::<f64>() / loss.0.len() as f64)
}
