use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_branch-bayes"));
    c.env_remove("BRANCH_BAYES_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> Value {
    serde_json::from_str(&stdout(args)).unwrap()
}

fn floats(v: &Value) -> Vec<f64> {
    v.as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect()
}

fn data_rows(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#')).collect()
}

#[test]
fn limit_example() {
    let v = json(&["limit", "--u", "0.5", "--x", "2", "--format", "json"]);
    let p = floats(&v["distribution"]["probs"]);
    assert!((p[0] - 8.0 / 11.0).abs() < 1e-14 && (p[1] - 3.0 / 11.0).abs() < 1e-14);
    assert_eq!(v["distribution"]["support"], serde_json::json!([1, 2]));
    assert_eq!(v["config"]["params"]["r"], 0.125);
    assert_eq!(v["mode"], 1);
}

#[test]
fn limit_accepts_r_directly() {
    let v = json(&["limit", "--r", "1", "--x", "2"]);
    let p = floats(&v["distribution"]["probs"]);
    assert!((p[0] - 0.25).abs() < 1e-14 && (p[1] - 0.75).abs() < 1e-14);
    let v = json(&["limit", "--r", "inf", "--x", "5"]);
    assert_eq!(floats(&v["distribution"]["probs"]), vec![1.0]);
    assert_eq!(
        run(&["limit", "--u", "0.5", "--r", "1", "--x", "2"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn hitting_example() {
    let v = json(&["hitting", "--u", "0.5", "--x", "2"]);
    let p = floats(&v["distribution"]["probs"]);
    assert!((p[0] - 2.0 / 3.0).abs() < 1e-14 && (p[1] - 1.0 / 3.0).abs() < 1e-14);
    assert!((v["mean"].as_f64().unwrap() - 4.0 / 3.0).abs() < 1e-14);
    assert!(v["distribution"]["hitting_prob"].is_number());
}

#[test]
fn simulate_doubling() {
    let v = json(&[
        "simulate", "--x0", "1", "--u", "1", "--n", "3", "--seed", "7",
    ]);
    assert_eq!(v["path"], serde_json::json!([1, 2, 4, 8]));
    assert_eq!(v["config"]["seed"], 7);
    let csv = stdout(&[
        "simulate", "--x0", "1", "--u", "1", "--n", "3", "--seed", "7", "--format", "csv",
    ]);
    assert_eq!(data_rows(&csv), vec!["1", "2", "4", "8"]);
}

fn posterior_of(file: &Path, format: &str) -> String {
    stdout(&[
        "posterior",
        "--path-file",
        file.to_str().unwrap(),
        "--format",
        format,
    ])
}

#[test]
fn simulated_paths_round_trip_into_posterior() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("path.csv");
    let js = dir.path().join("path.json");
    let base = [
        "simulate", "--x0", "5", "--u", "0.5", "--n", "15", "--seed", "11",
    ];
    let status = bin()
        .args(base)
        .args(["--format", "csv", "--output", csv.to_str().unwrap()])
        .status()
        .unwrap();
    assert!(status.success());
    let written = std::fs::read(&csv).unwrap();
    assert!(bin()
        .args(base)
        .args(["--output", js.to_str().unwrap()])
        .status()
        .unwrap()
        .success());

    let from_csv: Value = serde_json::from_str(&posterior_of(&csv, "json")).unwrap();
    let from_json: Value = serde_json::from_str(&posterior_of(&js, "json")).unwrap();
    assert_eq!(std::fs::read(&csv).unwrap(), written);
    assert_eq!(from_csv["posterior"], from_json["posterior"]);
    assert_eq!(from_csv["stats"], from_json["stats"]);

    let probs = from_csv["posterior"]["x0_probs"].as_object().unwrap();
    let total: f64 = probs.values().map(|p| p.as_f64().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-12);

    let rows = data_rows(&posterior_of(&csv, "csv")).len();
    assert_eq!(rows, probs.len() + 1);
}

#[test]
fn posterior_origin_flag() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("p.txt");
    std::fs::write(&f, "3\n4\n6\n9\n").unwrap();
    let with = json(&["posterior", "--path-file", f.to_str().unwrap()]);
    let without = json(&[
        "posterior",
        "--path-file",
        f.to_str().unwrap(),
        "--origin-included",
        "false",
    ]);
    assert_eq!(with["posterior"]["x1"], 4);
    assert_eq!(without["posterior"]["x1"], 3);
    assert_eq!(without["config"]["params"]["origin_included"], false);
}

#[test]
fn csv_columns() {
    let first = |args: &[&str]| data_rows(&stdout(args))[0].to_string();
    assert_eq!(
        first(&["limit", "--u", "0.3", "--x", "7", "--format", "csv"]),
        "y,prob,log_weight"
    );
    assert_eq!(
        first(&["hitting", "--u", "0.3", "--x", "7", "--format", "csv"]),
        "y,prob"
    );
    assert_eq!(
        first(&[
            "fisher",
            "--u",
            "0.5",
            "--n",
            "5",
            "--lambda0",
            "3",
            "--m",
            "2000",
            "--format",
            "csv"
        ]),
        "name,statistic,threshold,n_samples,seed,passed"
    );
    assert_eq!(
        first(&["compare", "--u", "0.2,0.6", "--format", "csv"]),
        "u,bayes_mean,naive_mean,ratio"
    );
}

#[test]
fn experiments_emit_json_lines() {
    let out = stdout(&[
        "clt", "--kind", "eta", "--u", "0.5", "--x", "256", "--n", "5000", "--seed", "3",
    ]);
    let lines: Vec<Value> = out
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0]["config"]["command"], "clt");
    assert_eq!(lines[1]["seed"], 3);
    assert_eq!(lines[1]["n_samples"], 5000);

    let out = stdout(&[
        "consistency",
        "--u",
        "0.5",
        "--x0",
        "5",
        "--n-list",
        "10,20",
    ]);
    assert_eq!(out.lines().count(), 1 + 3 * 2);
}

#[test]
fn compare_sign_change() {
    let v = json(&["compare", "--u", "0.1,0.9"]);
    let rows = v["rows"].as_array().unwrap();
    assert!(rows[0]["ratio"].as_f64().unwrap() > 1.0);
    assert!(rows[1]["ratio"].as_f64().unwrap() < 1.0);
}

#[test]
fn seed_determines_output() {
    let a = stdout(&[
        "clt", "--kind", "xi", "--u", "0.4", "--x", "128", "--n", "20000", "--seed", "5",
    ]);
    let b = stdout(&[
        "clt", "--kind", "xi", "--u", "0.4", "--x", "128", "--n", "20000", "--seed", "5",
    ]);
    let c = stdout(&[
        "clt", "--kind", "xi", "--u", "0.4", "--x", "128", "--n", "20000", "--seed", "6",
    ]);
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn thread_count_does_not_change_output() {
    let args = [
        "fisher",
        "--u",
        "0.3",
        "--n",
        "6",
        "--lambda0",
        "2",
        "--m",
        "30000",
        "--seed",
        "9",
    ];
    let outputs: Vec<Vec<u8>> = ["1", "3", "8"]
        .iter()
        .map(|t| {
            let out = bin()
                .args(args)
                .env("BRANCH_BAYES_THREADS", t)
                .output()
                .unwrap();
            assert!(out.status.success());
            out.stdout
        })
        .collect();
    assert!(outputs.windows(2).all(|w| w[0] == w[1]));

    let bad = bin()
        .args(args)
        .env("BRANCH_BAYES_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn output_file_replaces_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("out.json");
    let out = run(&[
        "limit",
        "--u",
        "0.5",
        "--x",
        "4",
        "--output",
        f.to_str().unwrap(),
    ]);
    assert!(out.status.success() && out.stdout.is_empty());
    let v: Value = serde_json::from_slice(&std::fs::read(&f).unwrap()).unwrap();
    assert_eq!(v["config"]["output_path"], f.to_str().unwrap());
}

#[test]
fn usage_errors_exit_one() {
    for args in [
        &["limit", "--x", "2"][..],
        &["limit", "--u", "0.5", "--x", "2", "--bogus", "1"],
        &["frobnicate"],
        &["limit", "--u", "1.5", "--x", "2"],
        &["hitting", "--u", "0.5", "--x", "0"],
        &["posterior", "--path-file", "/nonexistent/path.txt"],
    ] {
        assert_eq!(run(args).status.code(), Some(1), "{args:?}");
    }
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn malformed_path_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("bad.txt");
    std::fs::write(&f, "# origin_included=true\n2\n3\nseven\n").unwrap();
    let out = run(&["posterior", "--path-file", f.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 4"));

    std::fs::write(&f, "2\n3\n7\n").unwrap();
    let out = run(&["posterior", "--path-file", f.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn numerical_failure_exits_two() {
    let out = run(&["simulate", "--x0", "1", "--u", "1", "--n", "80"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn library_entry_point() {
    assert_eq!(branch_bayes_cli::run(["branch-bayes", "--version"]), 0);
    assert_eq!(branch_bayes_cli::run(["branch-bayes", "limit"]), 1);
}
