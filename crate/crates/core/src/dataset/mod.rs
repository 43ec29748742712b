//! Column-typed feature matrices, resampling, and knockoff permutation.

mod ingest;

pub use ingest::{load_csv, read_csv};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskKind {
    Classification,
    Regression,
}

impl std::str::FromStr for TaskKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "classification" | "class" | "c" => Ok(TaskKind::Classification),
            "regression" | "reg" | "r" => Ok(TaskKind::Regression),
            other => Err(Error::config(format!("unknown task kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum FeatureKind {
    Continuous,
    Categorical { cardinality: usize },
}

/// Encoded feature matrix plus target.
///
/// Columns are stored column-major. Categorical cells hold integer codes and
/// classification targets hold class indices in `[0, n_classes)`. Every row
/// remembers the index it had in the dataset it was originally built from,
/// so resampled views can be audited for leakage.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    names: Vec<String>,
    kinds: Vec<FeatureKind>,
    columns: Vec<Vec<f64>>,
    target: Vec<f64>,
    task: TaskKind,
    n_classes: usize,
    row_ids: Vec<usize>,
    categories: Vec<Option<Vec<String>>>,
    class_labels: Option<Vec<String>>,
}

/// A train/test partition of one dataset. Row indices refer to the source.
#[derive(Debug, Clone)]
pub struct SplitPair {
    pub train: Dataset,
    pub test: Dataset,
    pub train_rows: Vec<usize>,
    pub test_rows: Vec<usize>,
    pub seed: u64,
}

impl Dataset {
    /// Builds a dataset from encoded columns.
    ///
    /// For classification the class count is `max(target) + 1`; labels must be
    /// non-negative integers, at least two classes must exist, and every class
    /// must occur.
    pub fn new(
        names: Vec<String>,
        kinds: Vec<FeatureKind>,
        columns: Vec<Vec<f64>>,
        target: Vec<f64>,
        task: TaskKind,
    ) -> Result<Self> {
        let d = names.len();
        if kinds.len() != d || columns.len() != d {
            return Err(Error::data(format!(
                "{} names, {} kinds and {} columns disagree",
                d,
                kinds.len(),
                columns.len()
            )));
        }
        let mut seen = std::collections::HashSet::new();
        for name in &names {
            if !seen.insert(name.as_str()) {
                return Err(Error::data(format!("duplicate column name `{name}`")));
            }
        }
        let n = target.len();
        for (name, (col, kind)) in names.iter().zip(columns.iter().zip(&kinds)) {
            if col.len() != n {
                return Err(Error::data(format!(
                    "column `{name}` has {} values, target has {n}",
                    col.len()
                )));
            }
            if let Some(bad) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::data(format!("column `{name}` row {bad} is missing or not finite")));
            }
            if let FeatureKind::Categorical { cardinality } = *kind {
                if cardinality < 2 {
                    return Err(Error::data(format!("categorical column `{name}` needs at least 2 levels")));
                }
                if col.iter().any(|&v| v < 0.0 || v.fract() != 0.0 || v >= cardinality as f64) {
                    return Err(Error::data(format!(
                        "categorical column `{name}` holds codes outside [0, {cardinality})"
                    )));
                }
            }
        }
        if let Some(bad) = target.iter().position(|v| !v.is_finite()) {
            return Err(Error::data(format!("target row {bad} is missing or not finite")));
        }
        let n_classes = match task {
            TaskKind::Regression => 0,
            TaskKind::Classification => {
                if target.iter().any(|&v| v < 0.0 || v.fract() != 0.0) {
                    return Err(Error::data("classification labels must be non-negative integers"));
                }
                let c = target.iter().fold(0.0f64, |m, &v| m.max(v)) as usize + 1;
                let mut counts = vec![0usize; c];
                for &v in &target {
                    counts[v as usize] += 1;
                }
                if c < 2 {
                    return Err(Error::data("classification target has a single class"));
                }
                if let Some(missing) = counts.iter().position(|&k| k == 0) {
                    return Err(Error::data(format!("class {missing} never occurs in the target")));
                }
                c
            }
        };
        Ok(Dataset {
            categories: vec![None; d],
            names,
            kinds,
            columns,
            target,
            task,
            n_classes,
            row_ids: (0..n).collect(),
            class_labels: None,
        })
    }

    /// Continuous-only convenience constructor with generated names `x0, x1, ...`.
    pub fn from_columns(columns: Vec<Vec<f64>>, target: Vec<f64>, task: TaskKind) -> Result<Self> {
        let d = columns.len();
        Dataset::new(
            (0..d).map(|j| format!("x{j}")).collect(),
            vec![FeatureKind::Continuous; d],
            columns,
            target,
            task,
        )
    }

    pub(crate) fn set_encodings(&mut self, categories: Vec<Option<Vec<String>>>, class_labels: Option<Vec<String>>) {
        debug_assert_eq!(categories.len(), self.n_features());
        self.categories = categories;
        self.class_labels = class_labels;
    }

    pub fn n_rows(&self) -> usize {
        self.target.len()
    }

    pub fn n_features(&self) -> usize {
        self.columns.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn kinds(&self) -> &[FeatureKind] {
        &self.kinds
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }

    pub fn task(&self) -> TaskKind {
        self.task
    }

    /// Number of classes (0 for regression). Row subsets keep the parent's count.
    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    /// Original row index of every row.
    pub fn row_ids(&self) -> &[usize] {
        &self.row_ids
    }

    /// Category table of column `j` (code `k` decodes to `table[k]`).
    pub fn categories(&self, j: usize) -> Option<&[String]> {
        self.categories[j].as_deref()
    }

    pub fn class_labels(&self) -> Option<&[String]> {
        self.class_labels.as_deref()
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c[i]).collect()
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Per-class row counts (empty for regression).
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes];
        if self.task == TaskKind::Classification {
            for &y in &self.target {
                counts[y as usize] += 1;
            }
        }
        counts
    }

    /// Number of distinct classes that actually occur in this (possibly resampled) dataset.
    pub fn classes_present(&self) -> usize {
        self.class_counts().iter().filter(|&&k| k > 0).count()
    }

    /// Rows `rows` (indices into this dataset) in the given order.
    pub fn take_rows(&self, rows: &[usize]) -> Dataset {
        Dataset {
            names: self.names.clone(),
            kinds: self.kinds.clone(),
            columns: self.columns.iter().map(|c| rows.iter().map(|&r| c[r]).collect()).collect(),
            target: rows.iter().map(|&r| self.target[r]).collect(),
            task: self.task,
            n_classes: self.n_classes,
            row_ids: rows.iter().map(|&r| self.row_ids[r]).collect(),
            categories: self.categories.clone(),
            class_labels: self.class_labels.clone(),
        }
    }

    /// Restricts the dataset to `cols`, in the given order.
    pub fn project_columns(&self, cols: &[usize]) -> Result<Dataset> {
        if cols.is_empty() {
            return Err(Error::arg("column projection needs at least one column"));
        }
        let mut seen = vec![false; self.n_features()];
        for &c in cols {
            if c >= self.n_features() {
                return Err(Error::arg(format!("column {c} out of range (d = {})", self.n_features())));
            }
            if std::mem::replace(&mut seen[c], true) {
                return Err(Error::arg(format!("column {c} listed twice")));
            }
        }
        Ok(Dataset {
            names: cols.iter().map(|&c| self.names[c].clone()).collect(),
            kinds: cols.iter().map(|&c| self.kinds[c]).collect(),
            columns: cols.iter().map(|&c| self.columns[c].clone()).collect(),
            target: self.target.clone(),
            task: self.task,
            n_classes: self.n_classes,
            row_ids: self.row_ids.clone(),
            categories: cols.iter().map(|&c| self.categories[c].clone()).collect(),
            class_labels: self.class_labels.clone(),
        })
    }

    /// Same rows and target, no feature columns (for constant baselines).
    pub(crate) fn without_features(&self) -> Dataset {
        Dataset {
            names: Vec::new(),
            kinds: Vec::new(),
            columns: Vec::new(),
            target: self.target.clone(),
            task: self.task,
            n_classes: self.n_classes,
            row_ids: self.row_ids.clone(),
            categories: Vec::new(),
            class_labels: self.class_labels.clone(),
        }
    }

    /// Copy with column `col` replaced by a seeded uniform permutation of itself.
    pub fn permute_column(&self, col: usize, seed: u64) -> Result<Dataset> {
        if col >= self.n_features() {
            return Err(Error::arg(format!("column {col} out of range (d = {})", self.n_features())));
        }
        let mut out = self.clone();
        out.permute_column_in_place(col, seed);
        Ok(out)
    }

    pub(crate) fn permute_column_in_place(&mut self, col: usize, seed: u64) {
        let mut rng = seed::rng(seed);
        self.columns[col].shuffle(&mut rng);
    }

    /// Random train/test partition with `round(test_fraction * n)` test rows (at least one).
    ///
    /// Classification splits are stratified when every class present has at
    /// least two members.
    pub fn train_test_split(&self, test_fraction: f64, seed: u64) -> Result<SplitPair> {
        let (train_rows, test_rows) = self.split_indices(test_fraction, seed)?;
        Ok(SplitPair {
            train: self.take_rows(&train_rows),
            test: self.take_rows(&test_rows),
            train_rows,
            test_rows,
            seed,
        })
    }

    pub(crate) fn split_indices(&self, test_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
        let n = self.n_rows();
        if !(test_fraction > 0.0 && test_fraction < 1.0) {
            return Err(Error::config(format!("test fraction {test_fraction} must lie in (0, 1)")));
        }
        if n < 5 {
            return Err(Error::arg(format!("train/test split needs at least 5 rows, got {n}")));
        }
        let n_test = ((test_fraction * n as f64).round() as usize).clamp(1, n - 1);
        let mut rng = seed::rng(seed);

        let counts = self.class_counts();
        let stratify = self.task == TaskKind::Classification && counts.iter().all(|&k| k == 0 || k >= 2);
        let mut test = Vec::with_capacity(n_test);
        let mut train = Vec::with_capacity(n - n_test);
        if stratify {
            let quotas = stratified_quotas(&counts, n_test);
            let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); counts.len()];
            for (i, &y) in self.target.iter().enumerate() {
                by_class[y as usize].push(i);
            }
            for (rows, quota) in by_class.iter_mut().zip(quotas) {
                rows.shuffle(&mut rng);
                test.extend_from_slice(&rows[..quota]);
                train.extend_from_slice(&rows[quota..]);
            }
        } else {
            let mut rows: Vec<usize> = (0..n).collect();
            rows.shuffle(&mut rng);
            test.extend_from_slice(&rows[..n_test]);
            train.extend_from_slice(&rows[n_test..]);
        }
        test.sort_unstable();
        train.sort_unstable();
        Ok((train, test))
    }

    /// Row indices of `k` disjoint folds whose sizes differ by at most one.
    pub fn k_fold_indices(&self, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
        let n = self.n_rows();
        if k < 2 || k > n {
            return Err(Error::config(format!("fold count {k} must lie in [2, {n}]")));
        }
        let mut rows: Vec<usize> = (0..n).collect();
        rows.shuffle(&mut seed::rng(seed));
        let (base, extra) = (n / k, n % k);
        let mut folds = Vec::with_capacity(k);
        let mut start = 0;
        for f in 0..k {
            let len = base + usize::from(f < extra);
            let mut fold = rows[start..start + len].to_vec();
            fold.sort_unstable();
            folds.push(fold);
            start += len;
        }
        Ok(folds)
    }

    /// The `k` folds themselves, each as its own dataset.
    pub fn k_fold_partition(&self, k: usize, seed: u64) -> Result<Vec<Dataset>> {
        let folds = self.k_fold_indices(k, seed)?;
        folds
            .iter()
            .enumerate()
            .map(|(f, rows)| {
                let fold = self.take_rows(rows);
                if fold.task == TaskKind::Classification && fold.classes_present() < 2 {
                    return Err(Error::Degenerate(format!("fold {f} contains a single class")));
                }
                Ok(fold)
            })
            .collect()
    }

    /// All rows not in `rows` (which must be sorted).
    pub(crate) fn complement_rows(&self, rows: &[usize]) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.n_rows() - rows.len());
        let mut it = rows.iter().peekable();
        for i in 0..self.n_rows() {
            if it.peek() == Some(&&i) {
                it.next();
            } else {
                out.push(i);
            }
        }
        out
    }
}

/// Largest-remainder apportionment of `total` test rows over classes.
///
/// If apportionment would leave only one class in the test partition while
/// another class is available, one row is moved so at least two classes occur.
fn stratified_quotas(counts: &[usize], total: usize) -> Vec<usize> {
    let n: usize = counts.iter().sum();
    let exact: Vec<f64> = counts.iter().map(|&c| c as f64 * total as f64 / n as f64).collect();
    let mut quotas: Vec<usize> = exact.iter().map(|q| q.floor() as usize).collect();
    let mut remaining = total - quotas.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..counts.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = exact[a] - exact[a].floor();
        let fb = exact[b] - exact[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    // First keep one training row per class; relax that only if the quota cannot be met.
    for reserve in [1, 0] {
        let mut progress = true;
        while remaining > 0 && progress {
            progress = false;
            for &c in &order {
                if remaining > 0 && quotas[c] + reserve < counts[c] {
                    quotas[c] += 1;
                    remaining -= 1;
                    progress = true;
                }
            }
        }
    }
    let nonzero = quotas.iter().filter(|&&q| q > 0).count();
    if nonzero == 1 && total >= 2 {
        let big = quotas.iter().position(|&q| q > 0).unwrap();
        if let Some(&other) = order.iter().find(|&&c| c != big && counts[c] >= 2) {
            quotas[big] -= 1;
            quotas[other] += 1;
        }
    }
    quotas
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(n: usize, d: usize) -> Dataset {
        let columns = (0..d).map(|j| (0..n).map(|i| (i * (j + 1)) as f64).collect()).collect();
        let target = (0..n).map(|i| (i % 2) as f64).collect();
        Dataset::from_columns(columns, target, TaskKind::Classification).unwrap()
    }

    #[test]
    fn split_sizes_and_disjointness() {
        let ds = toy(100, 3);
        let split = ds.train_test_split(0.2, 11).unwrap();
        assert_eq!(split.test.n_rows(), 20);
        assert_eq!(split.train.n_rows(), 80);
        let mut all: Vec<usize> = split.train_rows.iter().chain(&split.test_rows).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..100).collect::<Vec<_>>());
        // stratified: 50/50 classes -> 10 of each in test
        assert_eq!(split.test.class_counts(), vec![10, 10]);
    }

    #[test]
    fn split_is_deterministic() {
        let ds = toy(37, 2);
        let a = ds.train_test_split(0.2, 5).unwrap();
        let b = ds.train_test_split(0.2, 5).unwrap();
        assert_eq!(a.test_rows, b.test_rows);
        assert_eq!(a.train_rows, b.train_rows);
        let c = ds.train_test_split(0.2, 6).unwrap();
        assert_ne!(a.test_rows, c.test_rows);
    }

    #[test]
    fn split_rejects_tiny_inputs() {
        let ds = toy(4, 1);
        assert!(matches!(ds.train_test_split(0.2, 0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn unstratified_when_a_class_is_a_singleton() {
        let target = vec![0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0];
        let ds = Dataset::from_columns(vec![(0..10).map(f64::from).collect()], target, TaskKind::Classification)
            .unwrap();
        let split = ds.train_test_split(0.2, 3).unwrap();
        assert_eq!(split.test.n_rows(), 2);
    }

    #[test]
    fn quotas_keep_two_classes_in_small_tests() {
        assert_eq!(stratified_quotas(&[90, 10], 20), vec![18, 2]);
        assert_eq!(stratified_quotas(&[45, 5], 2), vec![1, 1]);
        let q = stratified_quotas(&[3, 3, 4], 2);
        assert_eq!(q.iter().sum::<usize>(), 2);
        assert_eq!(q.iter().filter(|&&x| x > 0).count(), 2);
    }

    #[test]
    fn folds_have_balanced_sizes() {
        let sizes = |n| {
            let folds = toy(n, 1).k_fold_indices(5, 9).unwrap();
            let mut s: Vec<usize> = folds.iter().map(Vec::len).collect();
            s.sort_unstable_by(|a, b| b.cmp(a));
            s
        };
        assert_eq!(sizes(10), vec![2; 5]);
        assert_eq!(sizes(11), vec![3, 2, 2, 2, 2]);
    }

    #[test]
    fn folds_reject_bad_k() {
        let ds = toy(10, 1);
        assert!(ds.k_fold_indices(1, 0).is_err());
        assert!(ds.k_fold_indices(11, 0).is_err());
        assert!(ds.k_fold_indices(10, 0).is_ok());
    }

    #[test]
    fn single_class_fold_is_named() {
        // n = 10, K = 10: each fold is one row, hence one class
        let err = toy(10, 1).k_fold_partition(10, 0).unwrap_err();
        assert!(err.to_string().contains("fold"), "{err}");
    }

    #[test]
    fn permute_preserves_multiset_and_other_columns() {
        let ds = toy(30, 2);
        let p = ds.permute_column(0, 77).unwrap();
        let mut a = ds.column(0).to_vec();
        let mut b = p.column(0).to_vec();
        assert_ne!(a, b);
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        assert_eq!(a, b);
        assert_eq!(p.column(1), ds.column(1));
        assert_eq!(p.target(), ds.target());
        assert!(ds.permute_column(2, 0).is_err());
    }

    #[test]
    fn permute_single_row_is_identity() {
        let ds = Dataset::from_columns(vec![vec![3.5]], vec![1.0], TaskKind::Regression).unwrap();
        assert_eq!(ds.permute_column(0, 123).unwrap(), ds);
    }

    #[test]
    fn projection_orders_and_validates() {
        let ds = toy(6, 5);
        let p = ds.project_columns(&[3, 0]).unwrap();
        assert_eq!(p.names(), &["x3".to_string(), "x0".to_string()]);
        assert_eq!(p.column(0), ds.column(3));
        assert!(ds.project_columns(&[0, 0]).is_err());
        assert!(ds.project_columns(&[]).is_err());
        assert!(ds.project_columns(&[5]).is_err());
        assert_eq!(ds.project_columns(&[0, 1, 2, 3, 4]).unwrap(), ds);
    }

    #[test]
    fn constructor_checks_invariants() {
        let one_class = Dataset::from_columns(vec![vec![1.0, 2.0]], vec![0.0, 0.0], TaskKind::Classification);
        assert!(one_class.is_err());
        let gap = Dataset::from_columns(vec![vec![1.0, 2.0]], vec![0.0, 2.0], TaskKind::Classification);
        assert!(gap.is_err());
        let nan = Dataset::from_columns(vec![vec![1.0, f64::NAN]], vec![0.0, 1.0], TaskKind::Regression);
        assert!(nan.is_err());
        let dup = Dataset::new(
            vec!["a".into(), "a".into()],
            vec![FeatureKind::Continuous; 2],
            vec![vec![1.0], vec![2.0]],
            vec![0.0],
            TaskKind::Regression,
        );
        assert!(dup.is_err());
    }

    #[test]
    fn complement_covers_the_rest() {
        let ds = toy(8, 1);
        assert_eq!(ds.complement_rows(&[1, 4, 7]), vec![0, 2, 3, 5, 6]);
    }
}
