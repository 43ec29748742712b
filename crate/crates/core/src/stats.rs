//! One-sided paired Wilcoxon signed-rank test.
//!
//! Differences are `b - a`. The alternative is that they are shifted above
//! zero, so a small p-value means `b` is systematically larger. Zero
//! differences are dropped, tied magnitudes share their average rank. With at
//! most [`WilcoxonOptions::exact_max`] non-zero, untied differences the null
//! distribution of `W+` is computed exactly; otherwise a normal approximation
//! with tie correction and a 0.5 continuity correction is used.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};

/// Minimum number of pairs accepted by [`wilcoxon_one_sided`].
pub const MIN_PAIRS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WilcoxonOptions {
    /// Largest non-zero count for which the exact distribution is used.
    pub exact_max: usize,
}

impl Default for WilcoxonOptions {
    fn default() -> Self {
        WilcoxonOptions { exact_max: 25 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PValueMethod {
    Exact,
    Normal,
    /// Every difference was zero.
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    pub p_value: f64,
    /// Sum of ranks of the positive differences.
    pub w_plus: f64,
    /// Number of non-zero differences.
    pub n_nonzero: usize,
    pub method: PValueMethod,
}

impl WilcoxonResult {
    pub fn is_degenerate(&self) -> bool {
        self.method == PValueMethod::Degenerate
    }
}

/// Paired sample `(a, b)` of equal length, at least [`MIN_PAIRS`] long.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedSample<'a> {
    a: &'a [f64],
    b: &'a [f64],
}

impl<'a> PairedSample<'a> {
    pub fn new(a: &'a [f64], b: &'a [f64]) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::arg(format!("paired sample lengths differ: {} vs {}", a.len(), b.len())));
        }
        if a.len() < MIN_PAIRS {
            return Err(Error::arg(format!("paired test needs at least {MIN_PAIRS} pairs, got {}", a.len())));
        }
        if a.iter().chain(b).any(|v| !v.is_finite()) {
            return Err(Error::arg("paired sample contains a non-finite value"));
        }
        Ok(PairedSample { a, b })
    }
}

pub fn wilcoxon_one_sided(a: &[f64], b: &[f64]) -> Result<WilcoxonResult> {
    wilcoxon_one_sided_with(&PairedSample::new(a, b)?, WilcoxonOptions::default())
}

pub fn wilcoxon_one_sided_with(sample: &PairedSample<'_>, opts: WilcoxonOptions) -> Result<WilcoxonResult> {
    let diffs: Vec<f64> = sample
        .a
        .iter()
        .zip(sample.b)
        .map(|(a, b)| b - a)
        .filter(|d| *d != 0.0)
        .collect();
    let m = diffs.len();
    if m == 0 {
        return Ok(WilcoxonResult {
            p_value: 1.0,
            w_plus: 0.0,
            n_nonzero: 0,
            method: PValueMethod::Degenerate,
        });
    }

    let (ranks, tie_groups) = average_ranks(&diffs);
    let w_plus: f64 = diffs.iter().zip(&ranks).filter(|(d, _)| **d > 0.0).map(|(_, r)| r).sum();

    if tie_groups.is_empty() && m <= opts.exact_max {
        // untied ranks are 1..=m, so W+ is an integer
        let w = w_plus.round() as usize;
        Ok(WilcoxonResult {
            p_value: exact_upper_tail(m, w),
            w_plus,
            n_nonzero: m,
            method: PValueMethod::Exact,
        })
    } else {
        let mf = m as f64;
        let mean = mf * (mf + 1.0) / 4.0;
        let tie_term: f64 = tie_groups.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>() / 48.0;
        let var = mf * (mf + 1.0) * (2.0 * mf + 1.0) / 24.0 - tie_term;
        let p_value = if var <= 0.0 {
            if w_plus > mean {
                0.0
            } else {
                1.0
            }
        } else {
            let z = (w_plus - mean - 0.5) / var.sqrt();
            upper_normal_tail(z)
        };
        Ok(WilcoxonResult {
            p_value: p_value.clamp(0.0, 1.0),
            w_plus,
            n_nonzero: m,
            method: PValueMethod::Normal,
        })
    }
}

/// Average ranks of `|d|` (1-based) and the sizes of tie groups larger than one.
fn average_ranks(diffs: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut order: Vec<usize> = (0..diffs.len()).collect();
    order.sort_by(|&i, &j| diffs[i].abs().total_cmp(&diffs[j].abs()));
    let mut ranks = vec![0.0; diffs.len()];
    let mut ties = Vec::new();
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && diffs[order[end]].abs() == diffs[order[start]].abs() {
            end += 1;
        }
        let rank = (start + 1 + end) as f64 / 2.0;
        for &k in &order[start..end] {
            ranks[k] = rank;
        }
        if end - start > 1 {
            ties.push(end - start);
        }
        start = end;
    }
    (ranks, ties)
}

/// `P(W+ >= w)` under the null for `m` untied ranks, from the exact count of
/// sign assignments reaching each rank sum.
fn exact_upper_tail(m: usize, w: usize) -> f64 {
    let max = m * (m + 1) / 2;
    if w > max {
        return 0.0;
    }
    let mut counts = vec![0u64; max + 1];
    counts[0] = 1;
    for rank in 1..=m {
        for s in (rank..=max).rev() {
            counts[s] += counts[s - rank];
        }
    }
    let tail: u64 = counts[w..].iter().sum();
    tail as f64 / (1u64 << m) as f64
}

fn upper_normal_tail(z: f64) -> f64 {
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}
