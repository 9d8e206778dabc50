use std::process::{Command, Output};

use serde_json::Value;

fn kmpp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kmpp")).args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn gen_then_verify_and_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig1.json");
    let path = path.to_str().unwrap();
    let g = json(&kmpp(&["gen", "fig1", "--k", "5", "--out", path]));
    assert_eq!(g["generator"], "fig1");
    let v = kmpp(&["verify", "--instance", path]);
    assert!(v.status.success());
    assert!(!String::from_utf8_lossy(&v.stdout).contains("FAIL"));
    let o = json(&kmpp(&["oracle", "--instance", path, "--k", "5"]));
    assert!((o["opt_cost"].as_f64().unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn run_writes_csv_with_frozen_header() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("t.csv");
    let summary = dir.path().join("s.json");
    let out = kmpp(&[
        "run", "--generator", "appendix-a", "--params", r#"{"k": 20, "ell": 2}"#,
        "--alg", "rule:appendix-a-rule", "--l", "2", "--trials", "30",
        "--csv", csv.to_str().unwrap(), "--summary", summary.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("trial,seed,final_cost,ratio,"));
    assert_eq!(text.lines().count(), 31);
    let s: Value = serde_json::from_str(&std::fs::read_to_string(&summary).unwrap()).unwrap();
    assert_eq!(s["trials"], 30);
    assert!(s["bad_event"]["lower"].as_f64().unwrap() <= s["bad_event"]["upper"].as_f64().unwrap());
}

#[test]
fn process_from_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("p.json");
    std::fs::write(
        &cfg,
        r#"{"weights": {"one-heavy": {"k": 6}}, "ell": 6, "adversary": "protect-heaviest", "trials": 100, "seed": 1}"#,
    )
    .unwrap();
    let r = json(&kmpp(&["process", "--config", cfg.to_str().unwrap()]));
    assert_eq!(r["k"], 6);
    assert!(r["max_drift"].as_f64().unwrap() >= 1.0);
}

#[test]
fn errors_exit_nonzero_with_hints() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.json");
    let e = kmpp(&["gen", "greedy-lb", "--k", "1000", "--l", "4", "--out", out.to_str().unwrap()]);
    assert!(!e.status.success());
    assert!(String::from_utf8_lossy(&e.stderr).contains("--t"));
    let e = kmpp(&["process", "--weights", "1,2", "--l", "0"]);
    assert!(!e.status.success());
    let e = kmpp(&["run", "--generator", "fig1", "--params", "{", "--trials", "1"]);
    assert!(!e.status.success());
}
