use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cosetforge"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_out(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write(dir: &TempDir, name: &str, value: &Value) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, serde_json::to_string(value).unwrap()).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn coset_indicator_has_unit_norm() {
    let dir = TempDir::new().unwrap();
    let f = write(
        &dir,
        "f.json",
        &json!({ "group": "D6", "mode": "exact", "values": [1, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0] }),
    );
    let v = json_out(&["fn", "norm", "--fn", s(&f)]);
    assert!((v["algebra_norm"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert!(v["abelian_l1"].is_null());
}

#[test]
fn single_leaf_tree_evaluates_everywhere() {
    let dir = TempDir::new().unwrap();
    let t = write(
        &dir,
        "t.json",
        &json!({ "group": "Z12", "root": 0, "nodes": [{ "kind": "leaf", "value": 4 }] }),
    );
    let v = json_out(&["tree", "eval", "--tree", s(&t)]);
    assert_eq!(v["values"], json!(vec![4; 12]));
    assert_eq!(json_out(&["tree", "eval", "--tree", s(&t), "--x", "7"])["value"], 4);
}

#[test]
fn decompose_compile_eval_roundtrip() {
    let dir = TempDir::new().unwrap();
    let values = json!([3, -1, 2, 0, 3, -1, 2, 0, 3, -1, 2, 0]);
    let f = write(&dir, "f.json", &json!({ "group": "Z12", "mode": "exact", "values": values }));
    let d = json_out(&["decompose", "--fn", s(&f), "--exact-min"]);
    assert_eq!(d["report"]["exact"], true);
    assert!(d["min_cost"]["report"]["total_cost"].as_u64().unwrap() <= d["report"]["total_cost"].as_u64().unwrap());
    let dfile = write(&dir, "d.json", &d["decomposition"]);
    let tfile = dir.path().join("t.json");
    let out = run(&["tree", "compile", "--decomposition", s(&dfile), "--prune", "--out", s(&tfile)]);
    assert!(out.status.success());
    assert_eq!(json_out(&["tree", "eval", "--tree", s(&tfile)])["values"], values);
    let dot = run(&["tree", "dot", "--tree", s(&tfile)]);
    assert!(String::from_utf8(dot.stdout).unwrap().starts_with("digraph"));
}

#[test]
fn conv_with_mean_unit_is_identity() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "f.json", &json!({ "group": "S3", "mode": "exact", "values": [1, 2, 0, -1, 0, 5] }));
    let e = write(&dir, "e.json", &json!({ "group": "S3", "mode": "exact", "values": [6, 0, 0, 0, 0, 0] }));
    let v = json_out(&["fn", "conv", "--fn", s(&f), "--with", s(&e)]);
    let got: Vec<String> = v["values"].as_array().unwrap().iter().map(|x| x.to_string()).collect();
    assert_eq!(got, ["1", "2", "0", "-1", "0", "5"]);
}

#[test]
fn connectivity_reports_counterexample() {
    let v = json_out(&["connect", "--group", "Z1000", "--set", "1,10,100"]);
    assert_eq!(v["verdict"]["kind"], "counterexample");
    let v = json_out(&["connect", "--group", "Z12", "--set", "0,4,8", "--witnesses"]);
    assert_eq!(v["verdict"]["kind"], "connected");
    assert!(!v["witnesses"].as_array().unwrap().is_empty());
}

#[test]
fn ap_scan_emits_csv_with_slope() {
    let out = run(&["ap-scan", "--p", "101", "--n", "1,4,16"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "N,algebra_norm,ln_N");
    assert!(lines[1].starts_with("1,1.0000000000"));
    assert!(lines.last().unwrap().starts_with("# slope,"));
}

#[test]
fn verify_suites_pass() {
    let v = json_out(&["verify", "all"]);
    assert_eq!(v["passed"], true);
    assert_eq!(v["results"].as_array().unwrap().len(), 6);
}

#[test]
fn errors_map_to_exit_codes() {
    let code = |args: &[&str]| run(args).status.code().unwrap();
    assert_eq!(code(&["verify", "nonsense"]), 12);
    assert_eq!(code(&["ap-scan", "--p", "2051"]), 13);
    assert_eq!(code(&["ap-scan", "--p", "101", "--n", "60"]), 14);
    assert_eq!(code(&["fn", "norm", "--fn", "/nonexistent/f.json"]), 3);
    assert_eq!(code(&["group", "make", "Q8"]), 5);
    let err: Value = serde_json::from_slice(&run(&["verify", "nonsense"]).stderr).unwrap();
    assert_eq!(err["error"]["kind"], "suite_unknown");
}

#[test]
fn malformed_inputs_are_rejected() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    assert_eq!(run(&["fn", "norm", "--fn", s(&bad)]).status.code(), Some(4));
    let cyclic = write(
        &dir,
        "t.json",
        &json!({ "group": "Z12", "root": 0, "nodes": [
            { "kind": "internal", "subgroup": [0, 6], "rep": 0, "e1": 0, "e0": 0 }
        ] }),
    );
    assert_eq!(run(&["tree", "eval", "--tree", s(&cyclic)]).status.code(), Some(10));
}

#[test]
fn seeded_runs_are_deterministic() {
    let args = ["--seed", "17", "cs-trial", "--trials", "50"];
    let a = json_out(&args);
    let b = json_out(&args);
    assert_eq!(a, b);
    let c = json_out(&["--seed", "18", "cs-trial", "--trials", "50"]);
    assert_ne!(a["mean_error"], c["mean_error"]);
}

#[test]
fn report_wrapper_records_inputs() {
    let v = json_out(&["--report", "--seed", "3", "group", "validate", "--group", "Z2^3"]);
    assert_eq!(v["command"], "group");
    assert_eq!(v["inputs"]["seed"], 3);
    assert_eq!(v["output"]["order"], 8);
}
