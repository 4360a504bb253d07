use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use bandvar::forecast::predict;
use bandvar::io::read_series_file;
use bandvar::selection::{select_bandwidth, BicConfig};
use bandvar::BandedVarModel;

fn bandvar(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bandvar"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let o = bandvar(dir, args);
    assert!(o.status.success(), "{args:?} failed: {}", stderr(&o));
    stdout(&o)
}

fn simulate(dir: &Path, name: &str, p: usize, k0: usize, seed: u64) -> PathBuf {
    let (p, k0, seed) = (p.to_string(), k0.to_string(), seed.to_string());
    ok(
        dir,
        &["simulate", "--p", &p, "--n", "200", "--k0", &k0, "--setting", "uniform", "--seed", &seed, "--out", name],
    );
    dir.join(name)
}

#[test]
fn simulate_writes_data_truth_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let data = simulate(dir.path(), "data.csv", 100, 2, 7);
    let text = fs::read_to_string(&data).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 201);
    assert!(lines.iter().all(|l| l.split(',').count() == 100));
    let truth: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("data.truth.json")).unwrap()).unwrap();
    assert_eq!(truth["k0"], 2);
    assert_eq!(truth["p"], 100);
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("data.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "simulate");
    assert_eq!(manifest["seed"], 7);
    assert_eq!(manifest["config"]["k0"], 2);
    assert_eq!(manifest["outputs"][0], "data.csv");
    assert!(manifest.get("timestamps").is_none());
}

#[test]
fn outputs_are_byte_identical_across_runs_and_threads() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let files = ["a.csv", "a.truth.json", "a.manifest.json"];
    let run = |threads: &str| -> Vec<Vec<u8>> {
        ok(d, &["--threads", threads, "simulate", "--p", "40", "--n", "150", "--k0", "1", "--seed", "3", "--out", "a.csv"]);
        ok(d, &["--threads", threads, "autocov", "--input", "a.csv", "--lag", "1", "--q", "30", "--out", "ac.csv"]);
        ok(d, &["--threads", threads, "bench", "--table", "t1", "--reps", "4", "--p", "20", "--out", "t1.csv"]);
        files
            .iter()
            .chain(&["ac.csv", "ac.json", "ac.risk.json", "t1.csv", "t1.manifest.json"])
            .map(|f| fs::read(d.join(f)).unwrap())
            .collect()
    };
    let first = run("1");
    assert_eq!(first, run("1"));
    assert_eq!(first, run("4"));
}

#[test]
fn usage_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = bandvar(d, &["simulate", "--p", "30", "--n", "100", "--k0", "0", "--setting", "mixture"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("k0"));
    assert_eq!(bandvar(d, &["simulate", "--p", "30"]).status.code(), Some(1));
    assert_eq!(bandvar(d, &["bench", "--table", "t9"]).status.code(), Some(1));
    assert_eq!(bandvar(d, &["frobnicate"]).status.code(), Some(1));
    assert_eq!(bandvar(d, &["--help"]).status.code(), Some(0));
    assert_eq!(bandvar(d, &["bench", "--table", "t1", "--reps", "0"]).status.code(), Some(1));
}

#[test]
fn malformed_csv_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.csv"), "a,b\n1,2\n3,oops\n4,5\n").unwrap();
    let o = bandvar(dir.path(), &["fit", "--input", "bad.csv", "--k", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn singular_design_exits_with_two_and_names_rows() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::from("a,b,c,d\n");
    for t in 0..30u32 {
        let x = ((t * 7919) % 31) as f64 / 31.0 - 0.5;
        let z = ((t * 104_729) % 37) as f64 / 37.0 - 0.5;
        let w = ((t * 1_299_709) % 41) as f64 / 41.0 - 0.5;
        // series a and b coincide
        text.push_str(&format!("{x},{x},{z},{w}\n"));
    }
    fs::write(dir.path().join("dup.csv"), text).unwrap();
    let o = bandvar(dir.path(), &["fit", "--input", "dup.csv", "--k", "1"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let msg = stderr(&o);
    assert!(msg.contains('0') && msg.contains('1'), "{msg}");
}

#[test]
fn fit_then_forecast_reproduces_residuals() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    simulate(d, "data.csv", 12, 1, 11);
    ok(d, &["fit", "--input", "data.csv", "--k", "1", "--out", "fit.json"]);
    ok(
        d,
        &["forecast", "--input", "data.csv", "--model", "fit.json", "--holdout", "198", "--metric", "squared", "--out", "fc.json"],
    );
    // the shortest training window is two points, so the first residual is
    // computed here
    let ts = read_series_file(&d.join("data.csv")).unwrap();
    let fit: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("fit.json")).unwrap()).unwrap();
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("fc.json")).unwrap()).unwrap();
    let model: BandedVarModel = serde_json::from_value(fit["model"].clone()).unwrap();
    let first = predict(&model, &ts.slice(0..1).unwrap(), 1).unwrap();
    let errors = report["errors"][0].as_array().unwrap();
    assert_eq!(errors.len(), 198);
    for i in 0..12 {
        let e1 = ts.get(i, 1) - first[(i, 0)];
        let sse: f64 = e1 * e1 + errors.iter().map(|o| o[i].as_f64().unwrap()).sum::<f64>();
        let rss = fit["rss"][i].as_f64().unwrap();
        assert!((sse - rss).abs() <= 1e-9 * rss, "series {i}: {sse} vs {rss}");
    }
}

#[test]
fn select_recovers_seeded_bandwidth() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let data = simulate(d, "data.csv", 100, 2, 7);
    let out = ok(d, &["select", "--input", "data.csv", "--K", "15", "--Cn", "loglog", "--out", "sel.json"]);
    assert!(out.contains("k_hat = 2"), "{out}");
    let ts = read_series_file(&data).unwrap();
    assert_eq!(select_bandwidth(&ts, 1, 15, &BicConfig::default()).unwrap().k_hat, 2);
    let argmins = fs::read_to_string(d.join("sel.argmins.csv")).unwrap();
    assert_eq!(argmins.lines().count(), 101);
    assert!(argmins.starts_with("row,k_hat,d_hat"));
}

#[test]
fn order_table_lists_each_strategy() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    simulate(d, "data.csv", 16, 1, 5);
    let mut coords = String::from("label,x,y\n");
    for i in 0..16 {
        coords.push_str(&format!("y{i},{},{}\n", i % 4, i / 4));
    }
    fs::write(d.join("coords.csv"), coords).unwrap();
    let out = ok(
        d,
        &["order", "--input", "data.csv", "--coords", "coords.csv", "--strategy", "ns,we,nwse,swne,anchor:0", "--out", "ord.csv"],
    );
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "ordering,k_hat,bic_sum,series");
    let names: Vec<&str> = lines[1..].iter().map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(names, ["given", "ns", "we", "nwse", "swne", "anchor:0"]);
    assert_eq!(fs::read_to_string(d.join("ord.csv")).unwrap(), out);
    fs::write(d.join("short.csv"), "label,x,y\ny0,0,0\n").unwrap();
    let o = bandvar(d, &["order", "--input", "data.csv", "--coords", "short.csv"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn single_replication_bench_is_degenerate() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = ok(d, &["bench", "--table", "t2", "--reps", "1", "--p", "20", "--out", "t2.csv"]);
    let row: Vec<f64> = out.lines().nth(1).unwrap().split(',').skip(5).map(|v| v.parse().unwrap()).collect();
    assert_eq!(row.len(), 3);
    assert!(row.iter().all(|&v| v == 0.0 || v == 100.0));
    assert_eq!(row.iter().sum::<f64>(), 100.0);
}

#[test]
fn point_forecasts_have_one_row_per_step() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    simulate(d, "data.csv", 10, 1, 9);
    ok(d, &["forecast", "--input", "data.csv", "--horizon", "4", "--period", "12", "--out", "pred.csv"]);
    let ts = read_series_file(&d.join("pred.csv")).unwrap();
    assert_eq!((ts.p(), ts.n()), (10, 4));
}
