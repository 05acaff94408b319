use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use farsa::dataset::write_libsvm;
use farsa::synthetic::logistic_dataset;

fn farsa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_farsa"))
        .args(args)
        .env_remove("FARSA_TIME_LIMIT")
        .output()
        .expect("binary runs")
}

fn write_dataset(dir: &Path, name: &str, seed: u64) -> PathBuf {
    let ds = logistic_dataset(120, 16, 0.5, 1.0, seed);
    let path = dir.join(name);
    let f = std::fs::File::create(&path).unwrap();
    write_libsvm(&ds, std::io::BufWriter::new(f)).unwrap();
    path
}

fn json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn missing_file_exits_with_two() {
    let out = farsa(&["solve", "--data", "/definitely/not/here.svm"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not/here.svm"));
}

#[test]
fn malformed_file_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.svm");
    std::fs::write(&path, "1 1:0.5\n-1 3:x\n").unwrap();
    let out = farsa(&["solve", "--data", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn unknown_flag_exits_with_two() {
    let out = farsa(&["solve", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn solve_reports_json_and_pg_agrees() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_dataset(dir.path(), "toy.svm", 3);
    let data = data.to_str().unwrap();
    let common = ["solve", "--data", data, "--fraction", "0.5", "--lambda-scale", "0.1"];
    let a = json(&farsa(&[&common[..], &["--solver", "farsa"]].concat()));
    let b = json(&farsa(&[&common[..], &["--solver", "pg"]].concat()));
    assert_eq!(a["status"], "optimal");
    assert_eq!(b["status"], "optimal");
    assert_eq!(a["solver"], "farsa");
    assert_eq!(a["instance"]["num_groups"], 8);
    let fa = a["objective"].as_f64().unwrap();
    let fb = b["objective"].as_f64().unwrap();
    assert!((fa - fb).abs() <= 1e-4, "{fa} vs {fb}");
    assert_eq!(a["x"].as_array().unwrap().len(), 16);
}

#[test]
fn solve_is_deterministic_for_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_dataset(dir.path(), "toy.svm", 4);
    let run = || {
        let mut v = json(&farsa(&["solve", "--data", data.to_str().unwrap(), "--seed", "7"]));
        v.as_object_mut().unwrap().remove("elapsed_seconds");
        v
    };
    assert_eq!(run(), run());
}

#[test]
fn trace_file_has_documented_columns() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_dataset(dir.path(), "toy.svm", 5);
    let trace = dir.path().join("trace.csv");
    let report = dir.path().join("report.json");
    let out = farsa(&[
        "solve",
        "--data",
        data.to_str().unwrap(),
        "--trace",
        trace.to_str().unwrap(),
        "--output",
        report.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    let text = std::fs::read_to_string(&trace).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "iter,type,flag,chi_cg,chi_pg,alpha,objective,zero_groups,cg_iters,backtracks"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len() as u64, summary["iterations"].as_u64().unwrap());
    let objectives: Vec<f64> = rows.iter().map(|r| r.split(',').nth(6).unwrap().parse().unwrap()).collect();
    assert!(objectives.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn csv_format_writes_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_dataset(dir.path(), "toy.svm", 6);
    let out = farsa(&["solve", "--data", data.to_str().unwrap(), "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("dataset,group_fraction,lambda_scale,solver,status"));
    assert!(lines[1].contains(",optimal,"));
}

#[test]
fn iteration_limit_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_dataset(dir.path(), "toy.svm", 7);
    let out = farsa(&["solve", "--data", data.to_str().unwrap(), "--max-iter", "1", "--tol", "1e-14"]);
    assert_eq!(out.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["status"], "iter_limit");
}

#[test]
fn time_limit_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_dataset(dir.path(), "toy.svm", 8);
    let out = Command::new(env!("CARGO_BIN_EXE_farsa"))
        .args(["solve", "--data", data.to_str().unwrap(), "--tol", "1e-14"])
        .env("FARSA_TIME_LIMIT", "1e-12")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["status"], "time_limit");
}

#[test]
fn empty_grid_directory_gives_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let out = farsa(&["grid", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with("dataset,"));
}

#[test]
fn grid_then_compare() {
    let dir = tempfile::tempdir().unwrap();
    let data_dir = dir.path().join("data");
    std::fs::create_dir(&data_dir).unwrap();
    write_dataset(&data_dir, "one.svm", 9);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for (solver, out) in [("farsa", &a), ("pg", &b)] {
        let o = farsa(&[
            "grid",
            data_dir.to_str().unwrap(),
            "--jobs",
            "2",
            "--solver",
            solver,
            "--output",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let rows = farsa::grid::read_grid_csv(&a).unwrap();
    assert_eq!(rows.len(), 8);
    assert!(rows.iter().all(|r| r.solved()));
    let o = farsa(&["compare", a.to_str().unwrap(), b.to_str().unwrap()]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 9);
    assert!(text.starts_with("dataset,group_fraction,lambda_scale,metric,objective_winner,sparsity_winner"));
}
