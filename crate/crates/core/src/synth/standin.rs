//! Synthetic stand-ins shaped like small public benchmark tables.
//!
//! Each table has the row count, feature count, class count and rough
//! feature-type mix of a well-known UCI dataset. Labels come from a few latent
//! factors; informative columns are noisy proxies of those factors (some
//! rendered as text categories), and the remaining columns are pure noise.
//! The tables are committed as CSV under `data/` and regenerated with
//! `cargo run -p ppfs --example make_bundled`.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dataset::{read_csv, Dataset, TaskKind};
use crate::error::Result;
use crate::seed::{self, SeedRng};

/// A table of raw cells plus its target column.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTable {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub target: String,
    pub task: TaskKind,
    /// `(B, K)` used for this table in the benchmark.
    pub copies: usize,
    pub folds: usize,
}

impl RawTable {
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }

    pub fn to_dataset(&self) -> Result<Dataset> {
        read_csv(self.to_csv().as_bytes(), &self.target, self.task, &HashMap::new())
    }
}

enum Column {
    Proxy { factor: usize, noise: f64 },
    CategoricalProxy { factor: usize, noise: f64, levels: usize },
    Noise,
    CategoricalNoise { levels: usize },
}

struct Recipe {
    name: &'static str,
    rows: usize,
    weights: &'static [f64],
    label_noise: f64,
    columns: Vec<Column>,
    copies: usize,
    folds: usize,
    seed: u64,
}

fn normal(rng: &mut SeedRng) -> f64 {
    StandardNormal.sample(rng)
}

fn level_name(k: usize) -> String {
    format!("l{k}")
}

fn build(recipe: Recipe) -> RawTable {
    let mut rng = seed::rng(recipe.seed);
    let n = recipe.rows;
    let factors: Vec<Vec<f64>> = recipe.weights.iter().map(|_| (0..n).map(|_| normal(&mut rng)).collect()).collect();
    let labels: Vec<bool> = (0..n)
        .map(|i| {
            let score: f64 = recipe.weights.iter().zip(&factors).map(|(w, z)| w * z[i]).sum();
            score + recipe.label_noise * normal(&mut rng) > 0.0
        })
        .collect();

    let mut columns: Vec<Vec<String>> = Vec::with_capacity(recipe.columns.len());
    for col in &recipe.columns {
        let cells = match *col {
            Column::Proxy { factor, noise } => {
                (0..n).map(|i| format!("{:.4}", factors[factor][i] + noise * normal(&mut rng))).collect()
            }
            Column::CategoricalProxy { factor, noise, levels } => (0..n)
                .map(|i| {
                    let v = factors[factor][i] + noise * normal(&mut rng);
                    // equal-mass bins of a standard normal, roughly
                    let u = 0.5 * (1.0 + statrs::function::erf::erf(v / (1.0 + noise * noise).sqrt() / 2f64.sqrt()));
                    level_name(((u * levels as f64) as usize).min(levels - 1))
                })
                .collect(),
            Column::Noise => (0..n).map(|_| format!("{:.4}", normal(&mut rng))).collect(),
            Column::CategoricalNoise { levels } => (0..n).map(|_| level_name(rng.random_range(0..levels))).collect(),
        };
        columns.push(cells);
    }
    columns.shuffle(&mut rng);

    let mut header: Vec<String> = (0..columns.len()).map(|j| format!("a{:02}", j + 1)).collect();
    header.push("class".into());
    let rows = (0..n)
        .map(|i| {
            let mut row: Vec<String> = columns.iter().map(|c| c[i].clone()).collect();
            row.push(if labels[i] { "pos".into() } else { "neg".into() });
            row
        })
        .collect();
    RawTable {
        name: recipe.name.to_string(),
        header,
        rows,
        target: "class".into(),
        task: TaskKind::Classification,
        copies: recipe.copies,
        folds: recipe.folds,
    }
}

fn repeat(n: usize, make: impl Fn() -> Column) -> impl Iterator<Item = Column> {
    (0..n).map(move |_| make())
}

/// 270 x 13, binary, mixed types.
pub fn statlog_like() -> RawTable {
    let mut columns = vec![
        Column::CategoricalProxy { factor: 0, noise: 0.6, levels: 4 },
        Column::Proxy { factor: 1, noise: 0.5 },
        Column::Proxy { factor: 2, noise: 0.5 },
        Column::CategoricalNoise { levels: 2 },
        Column::CategoricalNoise { levels: 3 },
        Column::CategoricalNoise { levels: 2 },
    ];
    columns.extend(repeat(7, || Column::Noise));
    build(Recipe {
        name: "statlog-like",
        rows: 270,
        weights: &[1.3, 1.0, 0.8],
        label_noise: 0.7,
        columns,
        copies: 30,
        folds: 5,
        seed: 0x5747,
    })
}

/// 351 x 33, binary, continuous.
pub fn iono_like() -> RawTable {
    let mut columns: Vec<Column> = Vec::new();
    columns.extend(repeat(3, || Column::Proxy { factor: 0, noise: 0.5 }));
    columns.extend(repeat(2, || Column::Proxy { factor: 1, noise: 0.5 }));
    columns.extend(repeat(2, || Column::Proxy { factor: 2, noise: 0.6 }));
    columns.push(Column::Proxy { factor: 3, noise: 0.6 });
    columns.extend(repeat(25, || Column::Noise));
    build(Recipe {
        name: "iono-like",
        rows: 351,
        weights: &[1.2, 0.9, 0.7, 0.5],
        label_noise: 0.5,
        columns,
        copies: 10,
        folds: 0,
        seed: 0x1090,
    })
}

/// 569 x 30, binary, continuous with strongly correlated groups.
pub fn wdbc_like() -> RawTable {
    let mut columns: Vec<Column> = Vec::new();
    columns.extend(repeat(6, || Column::Proxy { factor: 0, noise: 0.3 }));
    columns.extend(repeat(4, || Column::Proxy { factor: 1, noise: 0.4 }));
    columns.extend(repeat(2, || Column::Proxy { factor: 2, noise: 0.5 }));
    columns.extend(repeat(18, || Column::Noise));
    build(Recipe {
        name: "wdbc-like",
        rows: 569,
        weights: &[1.6, 1.0, 0.6],
        label_noise: 0.4,
        columns,
        copies: 50,
        folds: 0,
        seed: 0x3dbc,
    })
}

/// 653 x 15, binary, mixed types with one dominant binary indicator.
pub fn credit_like() -> RawTable {
    let mut columns = vec![
        Column::CategoricalProxy { factor: 0, noise: 0.4, levels: 2 },
        Column::Proxy { factor: 0, noise: 1.0 },
        Column::Proxy { factor: 1, noise: 0.5 },
        Column::CategoricalNoise { levels: 2 },
        Column::CategoricalNoise { levels: 3 },
        Column::CategoricalNoise { levels: 4 },
        Column::CategoricalNoise { levels: 9 },
        Column::CategoricalNoise { levels: 14 },
        Column::CategoricalNoise { levels: 2 },
    ];
    columns.extend(repeat(6, || Column::Noise));
    build(Recipe {
        name: "credit-like",
        rows: 653,
        weights: &[2.0, 0.6],
        label_noise: 0.6,
        columns,
        copies: 50,
        folds: 0,
        seed: 0xc4ed,
    })
}

pub fn bundled() -> Vec<RawTable> {
    vec![statlog_like(), iono_like(), wdbc_like(), credit_like()]
}
