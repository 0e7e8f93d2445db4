use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn bbs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bbs-lab")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

const X0: &str = "0 0 3 1 2 0 5 1 3 0 0 4 1 1 2 5 2 0 0 3 2 1 1";

#[test]
fn diagram_json() {
    let out = bbs(&["diagram", "--cells", X0, "--kappa", "5"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["schema"], "bbs-lab/1");
    assert_eq!(v["rows"], serde_json::json!([8, 5, 2, 1]));
    assert_eq!(v["columns"], serde_json::json!([4, 3, 2, 2, 2, 1, 1, 1]));
}

#[test]
fn diagram_csv() {
    let out = bbs(&["diagram", "--cells", "1,0,1,1", "--format", "csv"]);
    assert!(out.status.success());
    assert!(stdout(&out).starts_with("k,E_k\n"));
}

#[test]
fn evolve_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("x0.txt");
    let output = dir.path().join("traj.txt");
    fs::write(&input, format!("# worked example\nkappa=5\n{X0}\n")).unwrap();
    let out = bbs(&["evolve", "--input", input.to_str().unwrap(), "--steps", "6", "--out", output.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (kappa, configs) = bbs_lab::config::parse_configs(&fs::read_to_string(&output).unwrap()).unwrap();
    assert_eq!(kappa, 5);
    assert_eq!(configs.len(), 7);
    assert!(configs[6].soliton_decomposition_reached());
    assert!(!configs[4].soliton_decomposition_reached());
}

#[test]
fn carrier_trace_formats() {
    let out = bbs(&["carrier-trace", "--cells", "1 0 1 1 0 0", "--format", "csv"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,m1,expelled");
    assert_eq!(lines[4], "4,2,0");
    let out = bbs(&["carrier-trace", "--cells", "1 0 1 1", "--capacity", "1"]);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["capacity"], "1");
}

#[test]
fn invariants_check_passes() {
    let out = bbs(&["invariants-check", "--cells", "2 0 1 2 1 0 2", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["passed"], true);
}

#[test]
fn permutation_run_is_reproducible() {
    let args = ["mc-permutation", "--n", "2e2,4e2", "--trials", "6", "--k-max", "2", "--seed", "5", "--verify"];
    let a = bbs(&args);
    let b = bbs(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_str(&stdout(&a)).unwrap();
    assert_eq!(v["n_list"], serde_json::json!([200, 400]));
    assert_eq!(v["verified"], true);
    assert_eq!(v["low_sample"], true);
}

#[test]
fn independence_csv_columns() {
    let out = bbs(&["mc-independence", "--p", "0.5,0.3,0.2", "--n", "100", "--trials", "3", "--j-max", "1", "--format", "csv"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("n,trial,kind,index,value\n"));
    assert_eq!(text.lines().count(), 1 + 3 * 2);
}

#[test]
fn experiment_commands_emit_schema() {
    let runs: [&[&str]; 4] = [
        &["clt-supercritical", "--p", "0.2,0.5,0.3", "--n", "1000", "--trials", "10"],
        &["critical-profile", "--p", "0.5,0.5", "--n", "500", "--trials", "10", "--ref-paths", "100", "--ref-steps", "100", "--gamma-steps", "1000"],
        &["excursions", "--p", "2/3,1/3", "--n", "200", "--trials", "3", "--excursions", "1000"],
        &["circular-exclusion", "--k", "2", "--burn-in", "100", "--samples", "200", "--pairs", "100", "--t-max", "5"],
    ];
    for args in runs {
        let out = bbs(args);
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
        assert_eq!(v["schema"], "bbs-lab/1", "{args:?}");
    }
}

#[test]
fn excursion_csv() {
    let out = bbs(&["excursions", "--p", "0.5,0.5", "--n", "50", "--trials", "2", "--format", "csv"]);
    assert!(out.status.success());
    assert!(stdout(&out).starts_with("trial,index,length,height\n"));
}

#[test]
fn usage_errors_exit_one() {
    for args in [
        &["mc-independence", "--p", "0.5,0.6"][..],
        &["mc-permutation", "--n", "0"],
        &["diagram"],
        &["clt-supercritical", "--p", "0.5,0.3,0.2", "--n", "100", "--trials", "5"],
        &["no-such-command"],
    ] {
        let out = bbs(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
    }
    assert_eq!(bbs(&["--help"]).status.code(), Some(0));
}
