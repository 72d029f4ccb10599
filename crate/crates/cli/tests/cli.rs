//! End-to-end tests driving the compiled binary the way a user would.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_amsd")
}

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("read {}: {e}", path.display()))
}

fn lines(path: &Path) -> Vec<String> {
    read(path).lines().map(str::to_owned).collect()
}

/// Splits a simple delimited table (no quoting in any of our outputs).
fn cell<'a>(line: &'a str, header: &str, column: &str) -> &'a str {
    let idx = header
        .split(',')
        .position(|h| h == column)
        .unwrap_or_else(|| panic!("column {column} not in header {header}"));
    line.split(',').nth(idx).unwrap()
}

#[test]
fn train_writes_model_and_reports_leaf_count() {
    let dir = TempDir::new().unwrap();
    let out = run(&[
        "train",
        "--data",
        data("toy.csv").to_str().unwrap(),
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("leaves:"), "summary must list the leaf count: {text}");
    assert!(dir.path().join("model.json").exists());
}

#[test]
fn negative_alpha_is_rejected_at_parse_time() {
    let out = run(&["train", "--data", data("toy.csv").to_str().unwrap(), "--alpha=-1"]);
    assert!(!out.status.success());
    let text = stderr(&out);
    assert!(text.contains("alpha"), "diagnostic should name the flag: {text}");
    assert!(
        text.contains("Usage") || text.contains("--help"),
        "wanted usage guidance: {text}"
    );
}

#[test]
fn train_then_predict_round_trips_at_full_accuracy() {
    let dir = TempDir::new().unwrap();
    let toy = data("toy.csv");
    let out = run(&[
        "train",
        "--data",
        toy.to_str().unwrap(),
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let out = run(&[
        "predict",
        "--model-in",
        dir.path().join("model.json").to_str().unwrap(),
        "--data",
        toy.to_str().unwrap(),
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("accuracy 1.0000"), "separable data must score 1.0: {text}");
    let predictions = lines(&dir.path().join("predictions.txt"));
    assert_eq!(predictions.len(), 24);
    assert!(predictions.iter().all(|p| p == "yes" || p == "no"));
}

#[test]
fn forest_training_and_prediction_work_end_to_end() {
    let dir = TempDir::new().unwrap();
    let toy = data("toy.csv");
    let out = run(&[
        "train",
        "--data",
        toy.to_str().unwrap(),
        "--trees",
        "10",
        "--seed",
        "3",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let out = run(&[
        "predict",
        "--model-in",
        dir.path().join("model.json").to_str().unwrap(),
        "--data",
        toy.to_str().unwrap(),
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    assert_eq!(lines(&dir.path().join("predictions.txt")).len(), 24);
}

#[test]
fn predicting_without_class_column_prints_no_accuracy() {
    let dir = TempDir::new().unwrap();
    let out = run(&[
        "train",
        "--data",
        data("toy.csv").to_str().unwrap(),
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let unlabeled = dir.path().join("unlabeled.csv");
    std::fs::write(&unlabeled, "temp,wind\n12.0,weak\n31.5,strong\n").unwrap();
    let out = run(&[
        "predict",
        "--model-in",
        dir.path().join("model.json").to_str().unwrap(),
        "--data",
        unlabeled.to_str().unwrap(),
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    assert!(!stdout(&out).contains("accuracy"), "no labels means no accuracy line");
    assert_eq!(lines(&dir.path().join("predictions.txt")).len(), 2);
}

#[test]
fn predicting_against_wrong_schema_names_the_attribute() {
    let dir = TempDir::new().unwrap();
    let out = run(&[
        "train",
        "--data",
        data("toy.csv").to_str().unwrap(),
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let out = run(&[
        "predict",
        "--model-in",
        dir.path().join("model.json").to_str().unwrap(),
        "--data",
        data("gauss300.csv").to_str().unwrap(),
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    assert!(
        stderr(&out).contains("temp"),
        "mismatch should name the missing attribute: {}",
        stderr(&out)
    );
}

#[test]
fn benchmark_writes_report_and_plot_tables() {
    let dir = TempDir::new().unwrap();
    let out = run(&[
        "benchmark",
        "--manifest",
        data("gauss300.toml").to_str().unwrap(),
        "--manifest",
        data("skewed400.toml").to_str().unwrap(),
        "--folds",
        "3",
        "--trees",
        "5",
        "--seed",
        "5",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    for file in ["report.json", "accuracy.csv", "time.csv", "leaves.csv"] {
        assert!(dir.path().join(file).exists(), "missing {file}");
    }
    // Four models on two datasets: one row per pair plus the header.
    for table in ["accuracy.csv", "time.csv", "leaves.csv"] {
        assert_eq!(lines(&dir.path().join(table)).len(), 1 + 4 * 2, "rows in {table}");
    }
    let accuracy = lines(&dir.path().join("accuracy.csv"));
    for dataset in ["gauss300", "skewed400"] {
        let rows = accuracy.iter().filter(|l| l.starts_with(&format!("{dataset},"))).count();
        assert_eq!(rows, 4, "expected 4 model rows for {dataset}");
    }
}

#[test]
fn benchmark_reruns_reproduce_accuracy_and_leaf_tables_byte_for_byte() {
    let args = |dir: &Path| {
        vec![
            "benchmark".to_owned(),
            "--manifest".to_owned(),
            data("skewed400.toml").to_str().unwrap().to_owned(),
            "--folds".to_owned(),
            "3".to_owned(),
            "--trees".to_owned(),
            "5".to_owned(),
            "--seed".to_owned(),
            "11".to_owned(),
            "--out-dir".to_owned(),
            dir.to_str().unwrap().to_owned(),
        ]
    };
    let first = TempDir::new().unwrap();
    let second = TempDir::new().unwrap();
    for dir in [first.path(), second.path()] {
        let out = Command::new(bin()).args(args(dir)).output().unwrap();
        assert!(out.status.success(), "stderr: {}", stderr(&out));
    }
    // Wall times live only in time.csv and the report, so the value tables
    // must match exactly across reruns.
    for table in ["accuracy.csv", "leaves.csv"] {
        assert_eq!(
            read(&first.path().join(table)),
            read(&second.path().join(table)),
            "{table} differs between identical runs"
        );
    }
}

#[test]
fn benchmark_names_a_missing_manifest() {
    let out = run(&["benchmark", "--manifest", "/no/such/place.toml"]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("place.toml"), "stderr: {}", stderr(&out));
}

#[test]
fn ablation_echoes_caps_in_input_order_and_matches_msd_at_zero() {
    let dir = TempDir::new().unwrap();
    let out = run(&[
        "ablate-gamma",
        "--manifest",
        data("skewed400.toml").to_str().unwrap(),
        "--gamma-max",
        "2",
        "--gamma-max",
        "0",
        "--gamma-max",
        "4",
        "--folds",
        "5",
        "--seed",
        "7",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let table = lines(&dir.path().join("ablate.csv"));
    let caps: Vec<&str> = table[1..].iter().map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(caps, ["2", "0", "4"], "caps must echo in input order");

    // A zero cap pins the multipliers, so its row must reproduce the plain
    // symmetric-binning model from a benchmark at the same seed and folds.
    let bench = TempDir::new().unwrap();
    let out = run(&[
        "benchmark",
        "--manifest",
        data("skewed400.toml").to_str().unwrap(),
        "--folds",
        "5",
        "--trees",
        "5",
        "--seed",
        "7",
        "--out-dir",
        bench.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let header = &table[0];
    let zero_row = table[1..].iter().find(|l| l.starts_with("0,")).unwrap();
    let ablation_accuracy: f64 = cell(zero_row, header, "accuracy_mean").parse().unwrap();
    let accuracy = lines(&bench.path().join("accuracy.csv"));
    let msd_row = accuracy.iter().find(|l| l.contains(",tree_msd,")).unwrap();
    let benchmark_accuracy: f64 =
        cell(msd_row, &accuracy[0], "accuracy_mean").parse().unwrap();
    assert_eq!(ablation_accuracy, benchmark_accuracy);
}

#[test]
fn scaling_table_has_one_row_per_strategy_and_size() {
    let dir = TempDir::new().unwrap();
    let out = run(&[
        "scale",
        "--sizes",
        "300,600,1200,2400",
        "--seed",
        "2",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let table = lines(&dir.path().join("scaling.csv"));
    assert_eq!(table[0], "strategy,n,median_seconds,doubling_ratio");
    assert_eq!(table.len(), 1 + 3 * 4, "three default strategies over four sizes");
    for row in &table[1..] {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), 4);
        assert!(["exhaustive", "msd", "amsd"].contains(&fields[0]));
        fields[1].parse::<usize>().unwrap();
        fields[2].parse::<f64>().unwrap();
        if !fields[3].is_empty() {
            fields[3].parse::<f64>().unwrap();
        }
    }
    // The first size of each strategy has no previous point to compare to.
    for strategy in ["exhaustive", "msd", "amsd"] {
        let first = table[1..].iter().find(|l| l.starts_with(strategy)).unwrap();
        assert!(first.ends_with(','), "first {strategy} row must leave the ratio empty");
    }
}

#[test]
fn single_size_scaling_has_no_ratios() {
    let dir = TempDir::new().unwrap();
    let out = run(&[
        "scale",
        "--sizes",
        "500",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let table = lines(&dir.path().join("scaling.csv"));
    assert_eq!(table.len(), 1 + 3);
    assert!(table[1..].iter().all(|l| l.ends_with(',')), "every ratio must be absent");
}

#[test]
fn out_dir_falls_back_to_the_environment_variable() {
    let dir = TempDir::new().unwrap();
    let out = Command::new(bin())
        .args(["train", "--data", data("toy.csv").to_str().unwrap()])
        .env("AMSD_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    assert!(dir.path().join("model.json").exists());
}
