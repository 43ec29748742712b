//! Greedy CART growth: Gini impurity for classes, squared error for reals.

use crate::dataset::TaskKind;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    /// Offset of the leaf payload in `Tree::payloads`.
    Leaf { payload: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Tree {
    pub nodes: Vec<Node>,
    /// Leaf payloads, `stride` values each: class probabilities or one mean.
    pub payloads: Vec<f64>,
    pub stride: usize,
    pub depth: usize,
}

pub(crate) struct GrowParams {
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
}

struct Candidate {
    feature: usize,
    threshold: f64,
    score: f64,
}

impl Tree {
    pub fn leaf_for(&self, row: impl Fn(usize) -> f64) -> &[f64] {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if row(feature) <= threshold { left } else { right },
                Node::Leaf { payload } => return &self.payloads[payload..payload + self.stride],
            }
        }
    }
}

pub(crate) fn grow(columns: &[Vec<f64>], target: &[f64], task: TaskKind, n_classes: usize, params: &GrowParams) -> Tree {
    let stride = match task {
        TaskKind::Classification => n_classes,
        TaskKind::Regression => 1,
    };
    let mut tree = Tree {
        nodes: Vec::new(),
        payloads: Vec::new(),
        stride,
        depth: 0,
    };
    // (node slot, rows, depth)
    let mut stack: Vec<(usize, Vec<usize>, usize)> = Vec::new();
    tree.nodes.push(Node::Leaf { payload: 0 });
    stack.push((0, (0..target.len()).collect(), 0));

    let mut sorted: Vec<(f64, usize)> = Vec::with_capacity(target.len());
    while let Some((slot, rows, depth)) = stack.pop() {
        tree.depth = tree.depth.max(depth);
        let can_split = params.max_depth.is_none_or(|m| depth < m)
            && rows.len() >= params.min_samples_split
            && rows.len() >= 2 * params.min_samples_leaf
            && !is_pure(&rows, target);
        let best = if can_split {
            best_split(columns, target, task, n_classes, &rows, params.min_samples_leaf, &mut sorted)
        } else {
            None
        };
        match best {
            Some(Candidate { feature, threshold, .. }) => {
                let col = &columns[feature];
                let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| col[i] <= threshold);
                let left = tree.nodes.len();
                tree.nodes.push(Node::Leaf { payload: 0 });
                tree.nodes.push(Node::Leaf { payload: 0 });
                tree.nodes[slot] = Node::Split {
                    feature,
                    threshold,
                    left,
                    right: left + 1,
                };
                stack.push((left + 1, r, depth + 1));
                stack.push((left, l, depth + 1));
            }
            None => {
                let payload = tree.payloads.len();
                push_leaf_payload(&mut tree.payloads, &rows, target, task, n_classes);
                tree.nodes[slot] = Node::Leaf { payload };
            }
        }
    }
    tree
}

fn is_pure(rows: &[usize], target: &[f64]) -> bool {
    let first = target[rows[0]];
    rows.iter().all(|&i| target[i] == first)
}

fn push_leaf_payload(out: &mut Vec<f64>, rows: &[usize], target: &[f64], task: TaskKind, n_classes: usize) {
    let m = rows.len() as f64;
    match task {
        TaskKind::Classification => {
            let start = out.len();
            out.resize(start + n_classes, 0.0);
            for &i in rows {
                out[start + target[i] as usize] += 1.0;
            }
            for p in &mut out[start..] {
                *p /= m;
            }
        }
        TaskKind::Regression => {
            out.push(rows.iter().map(|&i| target[i]).sum::<f64>() / m);
        }
    }
}

/// Scans every feature and threshold; the best split maximizes
/// `A_left / n_left + A_right / n_right`, where `A` is the sum of squared class
/// counts (Gini) or the squared target sum (variance). Both are monotone in
/// the impurity decrease. Ties keep the lowest feature, then lowest threshold.
fn best_split(
    columns: &[Vec<f64>],
    target: &[f64],
    task: TaskKind,
    n_classes: usize,
    rows: &[usize],
    min_leaf: usize,
    sorted: &mut Vec<(f64, usize)>,
) -> Option<Candidate> {
    let m = rows.len();
    let mut best: Option<Candidate> = None;
    let mut left_counts = vec![0usize; n_classes];
    let mut right_counts = vec![0usize; n_classes];

    for (feature, col) in columns.iter().enumerate() {
        sorted.clear();
        sorted.extend(rows.iter().map(|&i| (col[i], i)));
        sorted.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        if sorted[0].0 == sorted[m - 1].0 {
            continue;
        }

        match task {
            TaskKind::Classification => {
                left_counts.iter_mut().for_each(|c| *c = 0);
                right_counts.iter_mut().for_each(|c| *c = 0);
                for &(_, i) in sorted.iter() {
                    right_counts[target[i] as usize] += 1;
                }
                let mut sq_left = 0.0;
                let mut sq_right: f64 = right_counts.iter().map(|&c| (c * c) as f64).sum();
                for p in 1..m {
                    let class = target[sorted[p - 1].1] as usize;
                    sq_left += (2 * left_counts[class] + 1) as f64;
                    left_counts[class] += 1;
                    sq_right -= (2 * right_counts[class] - 1) as f64;
                    right_counts[class] -= 1;
                    if let Some(c) = candidate(sorted, p, m, min_leaf, feature, sq_left, sq_right) {
                        keep_better(&mut best, c);
                    }
                }
            }
            TaskKind::Regression => {
                let total: f64 = sorted.iter().map(|&(_, i)| target[i]).sum();
                let mut sum_left = 0.0;
                for p in 1..m {
                    sum_left += target[sorted[p - 1].1];
                    let sum_right = total - sum_left;
                    if let Some(c) = candidate(sorted, p, m, min_leaf, feature, sum_left * sum_left, sum_right * sum_right)
                    {
                        keep_better(&mut best, c);
                    }
                }
            }
        }
    }
    best
}

#[inline]
fn candidate(
    sorted: &[(f64, usize)],
    p: usize,
    m: usize,
    min_leaf: usize,
    feature: usize,
    a_left: f64,
    a_right: f64,
) -> Option<Candidate> {
    let (lo, hi) = (sorted[p - 1].0, sorted[p].0);
    if p < min_leaf || m - p < min_leaf || lo == hi {
        return None;
    }
    let mid = lo + (hi - lo) / 2.0;
    let threshold = if mid < hi { mid } else { lo };
    Some(Candidate {
        feature,
        threshold,
        score: a_left / p as f64 + a_right / (m - p) as f64,
    })
}

#[inline]
fn keep_better(best: &mut Option<Candidate>, c: Candidate) {
    match best {
        Some(b) if c.score <= b.score => {}
        _ => *best = Some(c),
    }
}
