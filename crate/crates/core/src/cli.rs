//! Command-line front end: `select`, `bench` and `synth`.
//!
//! Exit codes: 0 on success, 1 on runtime failure, 2 on usage or
//! validation errors. Reports go to stdout (or `--output`); progress and
//! diagnostics go to stderr.

use std::collections::HashMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::dataset::{load_csv, FeatureKind, TaskKind};
use crate::error::Error;
use crate::model::LearnerSpec;
use crate::ppi::PpiConfig;
use crate::selector::{select, FoldMode, PpfsConfig, ShrinkMode};
use crate::stats::WilcoxonOptions;
use crate::synth::{self, BnSpec, TargetLink};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "ppfs", version, about = "Markov-blanket wrapper feature selection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Select features from a CSV file.
    Select(SelectArgs),
    /// Cross-validate the selection against the all-features baseline.
    Bench(BenchArgs),
    /// Score blanket recovery on synthetic networks with a known blanket.
    Synth(SynthArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Task {
    Classification,
    Regression,
}

impl From<Task> for TaskKind {
    fn from(t: Task) -> Self {
        match t {
            Task::Classification => TaskKind::Classification,
            Task::Regression => TaskKind::Regression,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Shrink {
    Improved,
    Restart,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Folds {
    Subset,
    Complement,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Link {
    LinearGaussian,
    ThresholdBinary,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Table {
    /// dataset,all,ppfs,B,K
    Metrics,
    /// dataset,total,ppfs
    Counts,
}

#[derive(Args, Debug)]
struct SearchArgs {
    /// Resampled copies per independence test (B).
    #[arg(long = "b", default_value_t = 10)]
    copies: usize,
    /// Folds for blanket aggregation (K); 0 disables aggregation.
    #[arg(long = "k", default_value_t = 0)]
    folds: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Master seed; drawn from entropy and echoed in the report when omitted.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value = "improved")]
    shrink_mode: Shrink,
    #[arg(long, value_enum, default_value = "subset")]
    fold_mode: Folds,
    #[arg(long, default_value_t = 0.2)]
    test_fraction: f64,
    /// Tree depth limit (unlimited when omitted).
    #[arg(long)]
    max_depth: Option<usize>,
    #[arg(long, default_value_t = 2)]
    min_samples_split: usize,
    #[arg(long, default_value_t = 1)]
    min_samples_leaf: usize,
    /// Largest untied non-zero pair count that gets an exact Wilcoxon p-value.
    #[arg(long, default_value_t = 25)]
    exact_max: usize,
    /// Worker threads (results do not depend on this).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args, Debug)]
struct InputArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    target: String,
    #[arg(long, value_enum)]
    task: Task,
    /// Treat a numeric column as categorical (repeatable).
    #[arg(long = "categorical", value_name = "COLUMN")]
    categorical: Vec<String>,
}

#[derive(Args, Debug)]
struct OutputArgs {
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Leave wall-clock timings out of the report.
    #[arg(long)]
    no_timings: bool,
    /// Suppress progress messages.
    #[arg(long, short)]
    quiet: bool,
}

#[derive(Args, Debug)]
struct SelectArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    search: SearchArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    search: SearchArgs,
    #[command(flatten)]
    output: OutputArgs,
    #[arg(long, default_value_t = 5)]
    cv_folds: usize,
    /// Dataset name in the report (defaults to the file stem).
    #[arg(long)]
    name: Option<String>,
    /// Table layout for `--format csv`.
    #[arg(long, value_enum, default_value = "metrics")]
    table: Table,
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long, default_value_t = 2)]
    parents: usize,
    #[arg(long, default_value_t = 1)]
    children: usize,
    #[arg(long, default_value_t = 1)]
    spouses: usize,
    #[arg(long, default_value_t = 6)]
    noise: usize,
    #[arg(long, default_value_t = 2000)]
    samples: usize,
    #[arg(long, default_value_t = 20)]
    replicates: usize,
    #[arg(long, value_enum, default_value = "linear-gaussian")]
    link: Link,
    #[arg(long, default_value_t = 0.6)]
    coef_min: f64,
    #[arg(long, default_value_t = 1.0)]
    coef_max: f64,
    #[arg(long, default_value_t = 0.5)]
    noise_std: f64,
    #[command(flatten)]
    search: SearchArgs,
    #[command(flatten)]
    output: OutputArgs,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) => Failure::Usage(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

/// Runs the CLI with process stdout/stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(args, &mut std::io::stdout(), &mut std::io::stderr())
}

/// Runs the CLI, writing reports to `out` and diagnostics to `err`.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return EXIT_OK;
            }
            let rendered = e.to_string();
            let line = rendered.lines().next().unwrap_or("invalid arguments");
            let _ = writeln!(err, "{line}");
            return EXIT_USAGE;
        }
    };
    let result = match cli.command {
        Command::Select(a) => run_select(a, out, err),
        Command::Bench(a) => run_bench(a, out, err),
        Command::Synth(a) => run_synth(a, out, err),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Runtime(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_RUNTIME
        }
    }
}

fn config_from(search: &SearchArgs) -> Result<PpfsConfig, Failure> {
    let cfg = PpfsConfig {
        ppi: PpiConfig {
            copies: search.copies,
            test_fraction: search.test_fraction,
            learner: LearnerSpec {
                max_depth: search.max_depth,
                min_samples_split: search.min_samples_split,
                min_samples_leaf: search.min_samples_leaf,
                ..LearnerSpec::default()
            },
            alpha: search.alpha,
            seed: 0,
            wilcoxon: WilcoxonOptions {
                exact_max: search.exact_max,
            },
        },
        folds: search.folds,
        fold_mode: match search.fold_mode {
            Folds::Subset => FoldMode::Subset,
            Folds::Complement => FoldMode::Complement,
        },
        shrink_mode: match search.shrink_mode {
            Shrink::Improved => ShrinkMode::Improved,
            Shrink::Restart => ShrinkMode::Restart,
        },
        seed: search.seed.unwrap_or_else(rand::random),
    };
    cfg.validate()?;
    if search.jobs == Some(0) {
        return Err(Failure::Usage("--jobs must be at least 1".into()));
    }
    Ok(cfg)
}

fn with_jobs<T>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, Failure>
where
    T: Send,
{
    match jobs {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Failure::Runtime(format!("cannot start worker pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn load(input: &InputArgs) -> Result<crate::dataset::Dataset, Failure> {
    let overrides: HashMap<String, FeatureKind> = input
        .categorical
        .iter()
        .map(|name| (name.clone(), FeatureKind::Categorical { cardinality: 0 }))
        .collect();
    Ok(load_csv(&input.input, &input.target, input.task.into(), &overrides)?)
}

fn emit(output: &OutputArgs, body: &str, out: &mut dyn Write) -> Result<(), Failure> {
    match &output.output {
        Some(path) => std::fs::write(path, body)
            .map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", path.display()))),
        None => out
            .write_all(body.as_bytes())
            .map_err(|e| Failure::Runtime(format!("cannot write report: {e}"))),
    }
}

fn run_select(args: SelectArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Failure> {
    let cfg = config_from(&args.search)?;
    let ds = load(&args.input)?;
    cfg.validate_for(&ds)?;
    if !args.output.quiet {
        let _ = writeln!(
            err,
            "ppfs: selecting from {} rows x {} features (B = {}, K = {}, seed = {})",
            ds.n_rows(),
            ds.n_features(),
            cfg.ppi.copies,
            cfg.folds,
            cfg.seed
        );
    }
    let mut report = with_jobs(args.search.jobs, || select(&ds, &cfg))??;
    if args.output.no_timings {
        report = report.without_timings();
    }
    let body = match args.output.format {
        Format::Json => report.to_json() + "\n",
        Format::Csv => report.to_csv(),
        Format::Text => report.to_text(),
    };
    emit(&args.output, &body, out)
}

fn run_bench(args: BenchArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Failure> {
    let cfg = config_from(&args.search)?;
    if args.cv_folds < 2 {
        return Err(Failure::Usage(format!("--cv-folds must be at least 2, got {}", args.cv_folds)));
    }
    let ds = load(&args.input)?;
    let name = args.name.clone().unwrap_or_else(|| {
        args.input
            .input
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "dataset".into())
    });
    if !args.output.quiet {
        let _ = writeln!(err, "ppfs: benchmarking {name} with {}-fold cv (seed = {})", args.cv_folds, cfg.seed);
    }
    let mut report = with_jobs(args.search.jobs, || synth::benchmark(&name, &ds, &cfg, args.cv_folds))??;
    if args.output.no_timings {
        report = report.without_timings();
    }
    let body = match (args.output.format, args.table) {
        (Format::Json, _) => report.to_json() + "\n",
        (Format::Csv, Table::Metrics) => report.to_csv_metrics(),
        (Format::Csv, Table::Counts) => report.to_csv_counts(),
        (Format::Text, _) => report.to_text(),
    };
    emit(&args.output, &body, out)
}

fn run_synth(args: SynthArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Failure> {
    let cfg = config_from(&args.search)?;
    if args.replicates == 0 {
        return Err(Failure::Usage("--replicates must be at least 1".into()));
    }
    let spec = BnSpec {
        n_samples: args.samples,
        n_parents: args.parents,
        n_children: args.children,
        n_spouses: args.spouses,
        n_noise: args.noise,
        coef_min: args.coef_min,
        coef_max: args.coef_max,
        noise_std: args.noise_std,
        target_link: match args.link {
            Link::LinearGaussian => TargetLink::LinearGaussian,
            Link::ThresholdBinary => TargetLink::ThresholdBinary,
        },
        seed: 0,
    };
    spec.validate()?;
    if !args.output.quiet {
        let _ = writeln!(
            err,
            "ppfs: {} replicates of a {}-feature network (seed = {})",
            args.replicates,
            spec.n_features(),
            cfg.seed
        );
    }
    let summary = with_jobs(args.search.jobs, || synth::validate_recovery(&spec, &cfg, args.replicates, cfg.seed))??;
    let body = match args.output.format {
        Format::Json => summary.to_json() + "\n",
        Format::Csv => summary.to_csv(),
        Format::Text => summary.to_text(),
    };
    emit(&args.output, &body, out)
}
