//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::process::Command;
use std::time::{Duration, Instant};

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use statrs::distribution::{Binomial, DiscreteCDF};

use ppfs::selector::{growth_phase, score_blankets, shrink_phase, sort_by_importance, BlanketEntry, CandidateBlanket};
use ppfs::synth::standin;
use ppfs::synth::{benchmark, validate_recovery, BnSpec};
use ppfs::{ppi_test, wilcoxon_one_sided, Dataset, PpfsConfig, PpiConfig, TaskKind};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn normal(rng: &mut ppfs::seed::SeedRng) -> f64 {
    StandardNormal.sample(rng)
}

/// Counts sign assignments of ranks 1..=m whose positive-rank sum reaches the observed one.
fn enumerate_p(d: &[f64]) -> f64 {
    let m = d.len();
    let mut idx: Vec<usize> = (0..m).collect();
    idx.sort_by(|&i, &j| d[i].abs().total_cmp(&d[j].abs()));
    let mut rank = vec![0u32; m];
    for (r, &i) in idx.iter().enumerate() {
        rank[i] = r as u32 + 1;
    }
    let observed: u32 = (0..m).filter(|&i| d[i] > 0.0).map(|i| rank[i]).sum();
    let hits = (0u32..1 << m)
        .filter(|mask| (0..m).filter(|k| mask >> k & 1 == 1).map(|k| rank[k]).sum::<u32>() >= observed)
        .count();
    hits as f64 / f64::from(1u32 << m)
}

fn wilcoxon_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ppfs::seed::rng(101);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let m = rng.random_range(5..=12);
        let a: Vec<f64> = (0..m).map(|_| rng.random::<f64>()).collect();
        let b: Vec<f64> = a.iter().map(|x| x + normal(&mut rng) * 0.5 + 0.1).collect();
        let d: Vec<f64> = a.iter().zip(&b).map(|(x, y)| y - x).collect();
        let mut mags: Vec<f64> = d.iter().map(|v| v.abs()).collect();
        mags.sort_by(f64::total_cmp);
        assert!(mags.windows(2).all(|w| w[0] < w[1]) && mags[0] > 0.0, "sample has ties or zeros");
        let p = wilcoxon_one_sided(&a, &b).unwrap().p_value;
        worst = worst.max((p - enumerate_p(&d)).abs());
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-10 && elapsed < Duration::from_secs(10),
        format!("max |p - oracle| = {worst:.2e} over 1000 samples, {:.2}s", elapsed.as_secs_f64()),
    )
}

fn ppi_controls() -> Outcome {
    let start = Instant::now();
    let n = 200;
    let mut rng = ppfs::seed::rng(202);
    let x: Vec<f64> = (0..n).map(|_| normal(&mut rng)).collect();
    let ds = Dataset::from_columns(vec![x.clone()], x, TaskKind::Regression).unwrap();
    let cfg = PpiConfig {
        copies: 10,
        seed: 7,
        ..PpiConfig::default()
    };
    let pos = ppi_test(&ds, 0, &[], &cfg).unwrap();
    let all_worse = pos.risks.original.iter().zip(&pos.risks.knockoff).all(|(r, k)| r < k);
    let positive_ok = all_worse && pos.p_value == 2f64.powi(-10);

    let trials = 200;
    let mut rejections = 0;
    for t in 0..trials {
        let mut rng = ppfs::seed::rng(10_000 + t);
        let noise: Vec<f64> = (0..n).map(|_| normal(&mut rng)).collect();
        let y: Vec<f64> = (0..n).map(|_| normal(&mut rng)).collect();
        let ds = Dataset::from_columns(vec![noise], y, TaskKind::Regression).unwrap();
        let cfg = PpiConfig { seed: t, ..cfg };
        if ppi_test(&ds, 0, &[], &cfg).unwrap().p_value <= cfg.alpha {
            rejections += 1;
        }
    }
    let binom = Binomial::new(cfg.alpha, trials).unwrap();
    let (lo, hi) = (binom.inverse_cdf(0.005), binom.inverse_cdf(0.995));
    let negative_ok = (lo..=hi).contains(&rejections);
    let elapsed = start.elapsed();
    outcome(
        positive_ok && negative_ok && elapsed < Duration::from_secs(120),
        format!(
            "positive: all R < R~ = {all_worse}, p = {:.3e}; negative: {rejections}/{trials} rejections, 99% band [{lo}, {hi}]; {:.1}s",
            pos.p_value,
            elapsed.as_secs_f64()
        ),
    )
}

fn blanket_recovery() -> Outcome {
    let start = Instant::now();
    let spec = BnSpec {
        n_samples: 2000,
        n_parents: 2,
        n_children: 1,
        n_spouses: 1,
        n_noise: 6,
        ..BnSpec::default()
    };
    let cfg = PpfsConfig {
        ppi: PpiConfig {
            copies: 10,
            ..PpiConfig::default()
        },
        folds: 0,
        ..PpfsConfig::default()
    };
    let summary = validate_recovery(&spec, &cfg, 20, 303).unwrap();
    let spouse = summary.spouse_recovery_rate.unwrap();
    let elapsed = start.elapsed();
    outcome(
        summary.mean_f1 >= 0.8 && spouse >= 0.6 && elapsed < Duration::from_secs(300),
        format!(
            "mean F1 = {:.3} (>= 0.8), spouse recovered in {:.0}% of runs (>= 60%); {:.1}s",
            summary.mean_f1,
            100.0 * spouse,
            elapsed.as_secs_f64()
        ),
    )
}

fn shrink_correctness() -> Outcome {
    let runs = 50;
    let mut both_kept = 0;
    let mut not_subset = 0;
    for run in 0..runs {
        let mut rng = ppfs::seed::rng(40_000 + run);
        let n = 300;
        let x0: Vec<f64> = (0..n).map(|_| normal(&mut rng)).collect();
        let x1: Vec<f64> = (0..n).map(|_| normal(&mut rng)).collect();
        let x2: Vec<f64> = (0..n).map(|_| normal(&mut rng)).collect();
        let y: Vec<f64> = (0..n).map(|i| 2.0 * x0[i] + x1[i] + 0.3 * normal(&mut rng)).collect();
        let ds = Dataset::from_columns(vec![x0.clone(), x1, x2, x0], y, TaskKind::Regression).unwrap();
        let cfg = PpfsConfig {
            seed: run,
            ..PpfsConfig::default()
        };
        let grown = growth_phase(&ds, &cfg).unwrap();
        let shrunk = shrink_phase(&ds, &sort_by_importance(&grown), &cfg).unwrap();
        if shrunk.contains(0) && shrunk.contains(3) {
            both_kept += 1;
        }
        if !shrunk.features().iter().all(|f| grown.contains(*f)) {
            not_subset += 1;
        }
    }
    let one_copy = (runs - both_kept) as f64 / runs as f64;
    outcome(
        one_copy >= 0.95 && not_subset == 0,
        format!(
            "at most one duplicate kept in {:.0}% of {runs} runs, shrink within growth in {}/{runs}",
            100.0 * one_copy,
            runs - not_subset
        ),
    )
}

fn aggregation_arithmetic() -> Outcome {
    let blanket = |fs: &[usize]| CandidateBlanket {
        entries: fs.iter().map(|&f| BlanketEntry::new(f, 0.01)).collect(),
        ..CandidateBlanket::default()
    };
    let (a, b, c) = (0, 1, 2);
    let ens = score_blankets(vec![blanket(&[a, b]), blanket(&[a, c]), blanket(&[a])]).unwrap();
    let winner = ens.blankets[ens.winner].features();
    outcome(
        ens.z == vec![2.0, 2.0, 3.0] && winner == vec![a],
        format!("z = {:?}, winner = {winner:?}", ens.z),
    )
}

fn trend_replication() -> Outcome {
    let start = Instant::now();
    let mut passing = 0;
    let mut parts = Vec::new();
    for table in standin::bundled() {
        let ds = table.to_dataset().unwrap();
        let cfg = PpfsConfig {
            ppi: PpiConfig {
                copies: table.copies,
                ..PpiConfig::default()
            },
            folds: table.folds,
            seed: 606,
            ..PpfsConfig::default()
        };
        let report = benchmark(&table.name, &ds, &cfg, 5).unwrap();
        let max_count = report.selected_counts.iter().copied().max().unwrap();
        let ok = report.ppfs >= report.all_features - 0.02 && (max_count as f64) <= 0.6 * report.total_features as f64;
        if ok {
            passing += 1;
        }
        parts.push(format!(
            "{} {:.3}/{:.3} {}/{}",
            table.name, report.ppfs, report.all_features, max_count, report.total_features
        ));
    }
    let elapsed = start.elapsed();
    outcome(
        passing >= 3 && elapsed < Duration::from_secs(600),
        format!("{passing}/4 datasets pass [{}]; {:.1}s", parts.join("; "), elapsed.as_secs_f64()),
    )
}

fn cli_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("statlog.csv");
    std::fs::write(&input, standin::statlog_like().to_csv()).unwrap();
    let run = |jobs: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_ppfs"))
            .args(["select", "--target", "class", "--task", "classification", "--b", "10", "--k", "3"])
            .args(["--seed", "77", "--no-timings", "--quiet", "--jobs", jobs, "--input"])
            .arg(&input)
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        out.stdout
    };
    let one = run("1");
    let eight = run("8");
    outcome(one == eight && !one.is_empty(), format!("{} bytes at --jobs 1, identical at --jobs 8: {}", one.len(), one == eight))
}

fn performance_envelope() -> Outcome {
    let ds = standin::statlog_like().to_dataset().unwrap();
    let cfg = PpfsConfig {
        ppi: PpiConfig {
            copies: 30,
            ..PpiConfig::default()
        },
        folds: 5,
        seed: 808,
        ..PpfsConfig::default()
    };
    let start = Instant::now();
    let report = ppfs::select(&ds, &cfg).unwrap();
    let elapsed = start.elapsed();
    outcome(
        elapsed < Duration::from_secs(60),
        format!("270x13, B = 30, K = 5 in {:.2}s, {} selected", elapsed.as_secs_f64(), report.selected.len()),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 8] = [
        ("wilcoxon oracle equivalence", wilcoxon_oracle),
        ("ppi positive and negative controls", ppi_controls),
        ("markov blanket recovery", blanket_recovery),
        ("shrink correctness", shrink_correctness),
        ("aggregation arithmetic", aggregation_arithmetic),
        ("trend replication on bundled tables", trend_replication),
        ("cli determinism across thread counts", cli_determinism),
        ("performance envelope", performance_envelope),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        println!("{} {}. {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
        if !o.pass {
            failed += 1;
        }
    }
    println!("{}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
