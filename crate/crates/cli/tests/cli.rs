use std::process::{Command, Output};

use serde_json::Value;

fn ghost(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ghost")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn zeros(v: &Value) -> Vec<(i64, u64)> {
    v["zeros"]
        .as_array()
        .unwrap()
        .iter()
        .map(|z| (z["k"].as_i64().unwrap(), z["mult"].as_u64().unwrap()))
        .collect()
}

#[test]
fn coeff_lists_zeros_with_multiplicity() {
    let out = ghost(&["coeff", "--p", "7", "--a", "2", "--n", "2"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(zeros(&v), [(10, 1), (16, 1), (22, 1)]);
    assert_eq!(v["degree"], 3);

    let v = json(&ghost(&["coeff", "--p", "7", "--a", "2", "--n", "1"]));
    assert!(zeros(&v).is_empty());
    assert_eq!(v["degree"], 0);

    let v = json(&ghost(&["coeff", "--p", "7", "--a", "2", "--n", "4"]));
    assert_eq!(v["degree"], 16);
    assert_eq!(zeros(&v).iter().map(|z| z.1).sum::<u64>(), 16);
}

#[test]
fn np_at_a_classical_point() {
    let out = ghost(&["np", "--p", "7", "--a", "2", "--center", "28", "--radius", "inf", "--count", "10"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let slopes = v["slopes"].as_array().unwrap();
    assert_eq!(slopes.len(), 10);
    assert_eq!(slopes[0], "0/1");
    assert_eq!(v["vertices"][0], serde_json::json!([0, "0/1"]));
}

#[test]
fn np_on_a_disk() {
    let v = json(&ghost(&["np", "--p", "7", "--a", "2", "--center", "2", "--radius", "1/2", "--count", "4"]));
    assert_eq!(v["slopes"], serde_json::json!(["0/1", "3/2", "5/2", "4/1"]));
    assert_eq!(v["radius"], "1/2");
}

#[test]
fn np_global_split_needs_consistent_parts() {
    let out = ghost(&[
        "np", "--p", "7", "--a", "2", "--center", "28", "--count", "4", "--stretch", "3", "--m-prime", "1",
        "--m-second", "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = ghost(&[
        "np", "--p", "7", "--a", "2", "--center", "28", "--count", "4", "--stretch", "3", "--m-prime", "1",
        "--m-second", "2",
    ]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["np", "--p", "7", "--a", "2", "--center", "2", "--radius", "1/0"][..],
        &["np", "--p", "7", "--a", "2", "--center", "2", "--radius", "half"],
        &["coeff", "--p", "7", "--a", "2"],
        &["coeff", "--p", "6", "--a", "2", "--n", "1"],
        &["verify", "bogus"],
        &["verify", "gm", "--slack=-1"],
    ] {
        let out = ghost(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).starts_with("ghost: "), "{args:?}");
    }
}

#[test]
fn passing_sweep_exits_zero() {
    let out = ghost(&["verify", "gm", "--p", "7", "--a", "2", "--kmax", "30", "--samples", "5", "--m", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["status"], "pass");
    assert_eq!(v["failed"], 0);
    assert_eq!(v["passed"], 10);
}

#[test]
fn distance_trend_counterexample_exits_one() {
    let out = ghost(&["verify", "dist", "--p", "11", "--a", "3", "--seps", "0"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["status"], "fail");
    assert_eq!(v["first_failure"]["check"], "kolmogorov trend");
    assert_eq!(v["first_failure"]["key"], serde_json::json!([11, 3, 0]));
}

#[test]
fn config_file_supplies_missing_flags() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ghost.conf");
    std::fs::write(&path, "# defaults\np = 7\na=2\nn = 3\nformat = csv\n").unwrap();
    let conf = path.to_str().unwrap();

    let out = ghost(&["--config", conf, "coeff"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("series,x,y\n"));
    assert!(text.contains("zero,16,2\n"));

    // Flags win over the file.
    let out = ghost(&["--config", conf, "--format", "json", "coeff", "--n", "2"]);
    assert_eq!(zeros(&json(&out)), [(10, 1), (16, 1), (22, 1)]);
}

#[test]
fn csv_goes_to_the_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("np.csv");
    let out = ghost(&[
        "np", "--p", "7", "--a", "2", "--center", "2", "--radius", "1/2", "--count", "4", "--format", "csv",
        "--out", path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let mut reader = csv::Reader::from_path(&path).unwrap();
    assert_eq!(reader.headers().unwrap(), vec!["series", "x", "y"]);
    let slopes: Vec<String> = reader
        .records()
        .map(Result::unwrap)
        .filter(|r| &r[0] == "slope")
        .map(|r| r[2].to_string())
        .collect();
    assert_eq!(slopes, ["0/1", "3/2", "5/2", "4/1"]);
}

#[test]
fn output_is_deterministic() {
    let args = ["verify", "vertex", "--p", "7", "--a", "2", "--kmax", "20", "--samples", "30", "--seed", "9"];
    let first = ghost(&args);
    assert!(first.status.success());
    assert_eq!(first.stdout, ghost(&args).stdout);
}
