use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, TaskKind};
use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TargetLink {
    /// Real-valued target, regression task.
    LinearGaussian,
    /// Target thresholded at its median, classification task.
    ThresholdBinary,
}

/// A linear-Gaussian network around the target.
///
/// Parents feed the target; each child is driven by the target and by the
/// spouses assigned to it (spouse `s` co-parents child `s mod n_children`).
/// Noise features are independent of everything. Edge coefficients have
/// magnitudes drawn uniformly from `[coef_min, coef_max]` and random signs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BnSpec {
    pub n_samples: usize,
    pub n_parents: usize,
    pub n_children: usize,
    pub n_spouses: usize,
    pub n_noise: usize,
    pub coef_min: f64,
    pub coef_max: f64,
    pub noise_std: f64,
    pub target_link: TargetLink,
    pub seed: u64,
}

impl Default for BnSpec {
    fn default() -> Self {
        BnSpec {
            n_samples: 2000,
            n_parents: 2,
            n_children: 1,
            n_spouses: 1,
            n_noise: 6,
            coef_min: 0.6,
            coef_max: 1.0,
            noise_std: 0.5,
            target_link: TargetLink::LinearGaussian,
            seed: 0,
        }
    }
}

impl BnSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_samples < 50 {
            return Err(Error::config(format!("need at least 50 samples, got {}", self.n_samples)));
        }
        if self.n_spouses > 0 && self.n_children == 0 {
            return Err(Error::config("spouses need at least one child to co-parent"));
        }
        if self.n_features() == 0 {
            return Err(Error::config("network has no features"));
        }
        if !(self.coef_min > 0.0 && self.coef_min <= self.coef_max && self.coef_max.is_finite()) {
            return Err(Error::config("coefficient range must satisfy 0 < min <= max"));
        }
        if !(self.noise_std > 0.0 && self.noise_std.is_finite()) {
            return Err(Error::config("noise standard deviation must be positive"));
        }
        Ok(())
    }

    pub fn n_features(&self) -> usize {
        self.n_parents + self.n_children + self.n_spouses + self.n_noise
    }

    /// Column indices of parents, children and spouses.
    pub fn markov_blanket(&self) -> Vec<usize> {
        (0..self.n_parents + self.n_children + self.n_spouses).collect()
    }

    pub fn task(&self) -> TaskKind {
        match self.target_link {
            TargetLink::LinearGaussian => TaskKind::Regression,
            TargetLink::ThresholdBinary => TaskKind::Classification,
        }
    }
}

/// Samples the network. Columns are ordered parents, children, spouses, noise.
pub fn generate_bn(spec: &BnSpec) -> Result<(Dataset, Vec<usize>)> {
    spec.validate()?;
    let n = spec.n_samples;
    let mut rng = seed::rng(spec.seed);
    let normal = |rng: &mut seed::SeedRng| -> f64 { StandardNormal.sample(rng) };
    let coef = |rng: &mut seed::SeedRng| -> f64 {
        let magnitude = rng.random_range(spec.coef_min..=spec.coef_max);
        if rng.random::<bool>() {
            magnitude
        } else {
            -magnitude
        }
    };

    let parents: Vec<Vec<f64>> = (0..spec.n_parents).map(|_| (0..n).map(|_| normal(&mut rng)).collect()).collect();
    let parent_coefs: Vec<f64> = (0..spec.n_parents).map(|_| coef(&mut rng)).collect();
    let latent: Vec<f64> = (0..n)
        .map(|i| {
            let signal: f64 = parents.iter().zip(&parent_coefs).map(|(p, a)| a * p[i]).sum();
            signal + spec.noise_std * normal(&mut rng)
        })
        .collect();
    let target = match spec.target_link {
        TargetLink::LinearGaussian => latent,
        TargetLink::ThresholdBinary => {
            let mut sorted = latent.clone();
            sorted.sort_by(f64::total_cmp);
            let median = 0.5 * (sorted[(n - 1) / 2] + sorted[n / 2]);
            latent.iter().map(|&v| f64::from(v > median)).collect()
        }
    };
    // children see the observed target; binary targets enter as -1 / +1
    let driver: Vec<f64> = match spec.target_link {
        TargetLink::LinearGaussian => target.clone(),
        TargetLink::ThresholdBinary => target.iter().map(|&y| 2.0 * y - 1.0).collect(),
    };

    let spouses: Vec<Vec<f64>> = (0..spec.n_spouses).map(|_| (0..n).map(|_| normal(&mut rng)).collect()).collect();
    let mut children = Vec::with_capacity(spec.n_children);
    for c in 0..spec.n_children {
        let b = coef(&mut rng);
        let own: Vec<(f64, &Vec<f64>)> = spouses
            .iter()
            .enumerate()
            .filter(|(s, _)| s % spec.n_children == c)
            .map(|(_, s)| (coef(&mut rng), s))
            .collect();
        let child: Vec<f64> = (0..n)
            .map(|i| {
                let from_spouses: f64 = own.iter().map(|(w, s)| w * s[i]).sum();
                b * driver[i] + from_spouses + spec.noise_std * normal(&mut rng)
            })
            .collect();
        children.push(child);
    }
    let noise: Vec<Vec<f64>> = (0..spec.n_noise).map(|_| (0..n).map(|_| normal(&mut rng)).collect()).collect();

    let mut names = Vec::with_capacity(spec.n_features());
    names.extend((0..spec.n_parents).map(|k| format!("parent_{k}")));
    names.extend((0..spec.n_children).map(|k| format!("child_{k}")));
    names.extend((0..spec.n_spouses).map(|k| format!("spouse_{k}")));
    names.extend((0..spec.n_noise).map(|k| format!("noise_{k}")));
    let columns: Vec<Vec<f64>> = parents.into_iter().chain(children).chain(spouses).chain(noise).collect();
    let kinds = vec![crate::dataset::FeatureKind::Continuous; columns.len()];
    let ds = Dataset::new(names, kinds, columns, target, spec.task())?;
    Ok((ds, spec.markov_blanket()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corr(a: &[f64], b: &[f64]) -> f64 {
        let n = a.len() as f64;
        let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
        let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
        let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
        let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
        cov / (va * vb).sqrt()
    }

    /// Correlation of `a` and `b` after regressing both on `c`.
    fn partial_corr(a: &[f64], b: &[f64], c: &[f64]) -> f64 {
        let (rab, rac, rbc) = (corr(a, b), corr(a, c), corr(b, c));
        (rab - rac * rbc) / ((1.0 - rac * rac) * (1.0 - rbc * rbc)).sqrt()
    }

    #[test]
    fn truth_is_parents_children_spouses() {
        let spec = BnSpec {
            n_samples: 100,
            ..BnSpec::default()
        };
        let (ds, truth) = generate_bn(&spec).unwrap();
        assert_eq!(truth, vec![0, 1, 2, 3]);
        assert_eq!(ds.n_features(), 10);
        assert_eq!(ds.names()[3], "spouse_0");
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = BnSpec {
            n_samples: 80,
            seed: 4,
            ..BnSpec::default()
        };
        assert_eq!(generate_bn(&spec).unwrap().0, generate_bn(&spec).unwrap().0);
    }

    #[test]
    fn noise_is_uncorrelated_with_target() {
        // |r| < 3 / sqrt(n) holds with probability ~0.997 per feature under independence
        let mut inside = 0;
        let mut total = 0;
        for seed in 0..30 {
            let spec = BnSpec {
                n_samples: 500,
                seed,
                ..BnSpec::default()
            };
            let (ds, _) = generate_bn(&spec).unwrap();
            for j in 4..10 {
                total += 1;
                if corr(ds.column(j), ds.target()).abs() < 3.0 / (500f64).sqrt() {
                    inside += 1;
                }
            }
        }
        assert!(inside as f64 / total as f64 >= 0.99, "{inside}/{total}");
    }

    #[test]
    fn spouse_is_linked_only_through_the_child() {
        let (ds, _) = generate_bn(&BnSpec {
            n_samples: 5000,
            seed: 2,
            ..BnSpec::default()
        })
        .unwrap();
        let (spouse, child, y) = (ds.column(3), ds.column(2), ds.target());
        let marginal = corr(spouse, y).abs();
        let conditional = partial_corr(spouse, y, child).abs();
        assert!(marginal < 3.0 / (5000f64).sqrt(), "marginal {marginal}");
        assert!(conditional > 0.3, "conditional {conditional}");
    }

    #[test]
    fn binary_link_is_balanced() {
        let (ds, _) = generate_bn(&BnSpec {
            n_samples: 200,
            target_link: TargetLink::ThresholdBinary,
            ..BnSpec::default()
        })
        .unwrap();
        assert_eq!(ds.class_counts(), vec![100, 100]);
    }

    #[test]
    fn invalid_specs() {
        let base = BnSpec::default();
        assert!(BnSpec { n_samples: 49, ..base }.validate().is_err());
        assert!(BnSpec { n_children: 0, ..base }.validate().is_err());
        assert!(BnSpec { coef_min: 2.0, ..base }.validate().is_err());
        assert!(BnSpec { noise_std: 0.0, ..base }.validate().is_err());
    }
}
