use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub selected: Vec<usize>,
    pub truth: Vec<usize>,
}

/// Set precision, recall and F1 of `selected` against `truth`.
///
/// An empty selection has precision 0 unless the truth is empty too, in
/// which case the recovery is perfect.
pub fn score_recovery(selected: &[usize], truth: &[usize]) -> RecoveryScore {
    let s: BTreeSet<usize> = selected.iter().copied().collect();
    let t: BTreeSet<usize> = truth.iter().copied().collect();
    let hits = s.intersection(&t).count() as f64;
    let (precision, recall) = match (s.is_empty(), t.is_empty()) {
        (true, true) => (1.0, 1.0),
        (true, false) => (0.0, 0.0),
        (false, true) => (0.0, 1.0),
        (false, false) => (hits / s.len() as f64, hits / t.len() as f64),
    };
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    RecoveryScore {
        precision,
        recall,
        f1,
        selected: s.into_iter().collect(),
        truth: t.into_iter().collect(),
    }
}
