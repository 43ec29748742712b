use std::path::{Path, PathBuf};

use ppfs::cli::{run_with, EXIT_OK, EXIT_RUNTIME, EXIT_USAGE};
use ppfs::synth::standin;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut argv = vec!["ppfs"];
    argv.extend_from_slice(args);
    let code = run_with(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn statlog(dir: &Path) -> PathBuf {
    let path = dir.join("statlog.csv");
    std::fs::write(&path, standin::statlog_like().to_csv()).unwrap();
    path
}

#[test]
fn select_writes_json_report() {
    let dir = tempfile::tempdir().unwrap();
    let input = statlog(dir.path());
    let (code, out, err) = run(&[
        "select", "--input", input.to_str().unwrap(), "--target", "class", "--task", "classification", "--seed", "3",
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(v["selected"].is_array());
    assert_eq!(v["config"]["seed"], 3);
    assert_eq!(v["dataset"]["rows"], 270);
    assert!(err.contains("selecting from 270 rows"));
}

#[test]
fn missing_seed_is_drawn_and_echoed() {
    let dir = tempfile::tempdir().unwrap();
    let input = statlog(dir.path());
    let (code, out, _) = run(&[
        "select", "--input", input.to_str().unwrap(), "--target", "class", "--task", "classification", "-q",
    ]);
    assert_eq!(code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(v["config"]["seed"].is_u64());
}

#[test]
fn output_file_and_formats() {
    let dir = tempfile::tempdir().unwrap();
    let input = statlog(dir.path());
    let dest = dir.path().join("report.csv");
    let (code, out, _) = run(&[
        "select", "--input", input.to_str().unwrap(), "--target", "class", "--task", "classification", "--seed", "1",
        "--format", "csv", "--output", dest.to_str().unwrap(), "-q",
    ]);
    assert_eq!(code, EXIT_OK);
    assert!(out.is_empty());
    assert!(std::fs::read_to_string(&dest).unwrap().starts_with("name,index,"));
    let (code, out, _) = run(&[
        "select", "--input", input.to_str().unwrap(), "--target", "class", "--task", "classification", "--seed", "1",
        "--format", "text", "-q",
    ]);
    assert_eq!(code, EXIT_OK);
    assert!(!out.is_empty());
}

#[test]
fn timings_are_optional() {
    let dir = tempfile::tempdir().unwrap();
    let input = statlog(dir.path());
    let base = ["select", "--input", input.to_str().unwrap(), "--target", "class", "--task", "classification", "--seed", "9", "-q"];
    let (_, with, _) = run(&base);
    let mut args = base.to_vec();
    args.push("--no-timings");
    let (_, without, _) = run(&args);
    assert!(with.contains("timings_ms"));
    assert!(!without.contains("timings_ms"));
}

#[test]
fn usage_errors_exit_2_with_one_line() {
    for args in [
        vec!["frobnicate"],
        vec!["select", "--target", "y"],
        vec!["select", "--input", "x.csv", "--target", "y", "--task", "classification", "--b", "3"],
        vec!["select", "--input", "x.csv", "--target", "y", "--task", "classification", "--alpha", "1.5"],
        vec!["select", "--input", "x.csv", "--target", "y", "--task", "classification", "--k", "1"],
        vec!["select", "--input", "x.csv", "--target", "y", "--task", "sorting"],
    ] {
        let (code, out, err) = run(&args);
        assert_eq!(code, EXIT_USAGE, "{args:?}: {err}");
        assert!(out.is_empty());
        assert_eq!(err.trim_end().lines().count(), 1, "{err}");
    }
}

#[test]
fn runtime_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.csv");
    let (code, _, err) = run(&[
        "select", "--input", missing.to_str().unwrap(), "--target", "y", "--task", "regression", "--seed", "1",
    ]);
    assert_eq!(code, EXIT_RUNTIME);
    assert!(err.starts_with("error:"));
    let input = statlog(dir.path());
    let (code, _, err) = run(&[
        "select", "--input", input.to_str().unwrap(), "--target", "nope", "--task", "classification", "--seed", "1",
    ]);
    assert_eq!(code, EXIT_RUNTIME, "{err}");
}

#[test]
fn help_exits_0() {
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("select"));
}

#[test]
fn bench_tables() {
    let dir = tempfile::tempdir().unwrap();
    let input = statlog(dir.path());
    let common = [
        "bench", "--input", input.to_str().unwrap(), "--target", "class", "--task", "classification", "--seed", "2",
        "--format", "csv", "-q",
    ];
    let (code, out, err) = run(&common);
    assert_eq!(code, EXIT_OK, "{err}");
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("dataset,all,ppfs,B,K"));
    assert!(lines.next().unwrap().starts_with("statlog,"));
    let mut args = common.to_vec();
    args.extend(["--table", "counts", "--name", "heart"]);
    let (code, out, _) = run(&args);
    assert_eq!(code, EXIT_OK);
    assert!(out.starts_with("dataset,total,ppfs\nheart,13,"));
}

#[test]
fn synth_summary() {
    let (code, out, err) = run(&[
        "synth", "--samples", "400", "--replicates", "2", "--noise", "2", "--seed", "5", "-q",
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["replicates"].as_array().unwrap().len(), 2);
    assert!(v["mean_f1"].as_f64().unwrap() <= 1.0);
}

#[test]
fn categorical_override() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("codes.csv");
    let mut body = String::from("code,x,y\n");
    for i in 0..40 {
        body.push_str(&format!("{},{},{}\n", i % 3, i, i % 2));
    }
    std::fs::write(&path, body).unwrap();
    let (code, out, err) = run(&[
        "select", "--input", path.to_str().unwrap(), "--target", "y", "--task", "classification", "--categorical",
        "code", "--seed", "1", "-q",
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["dataset"]["categories"]["code"], serde_json::json!(["0", "1", "2"]));
}
