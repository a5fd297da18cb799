use std::process::{Command, Output};

use serde_json::Value;

fn cramer(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cramer")).args(args).env("CRAMER_WORKERS", "1").output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

/// Drops `elapsed_ms` everywhere.
fn strip_time(v: &mut Value) {
    match v {
        Value::Object(m) => {
            m.remove("elapsed_ms");
            m.values_mut().for_each(strip_time);
        }
        Value::Array(a) => a.iter_mut().for_each(strip_time),
        _ => {}
    }
}

#[test]
fn moments_reports_mean_and_variance() {
    let out = cramer(&["moments", "--model", "cramer", "--n", "1000"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let m = v["result"]["m_n"].as_f64().unwrap();
    let b = v["result"]["B_n"].as_f64().unwrap();
    // independent oracle: direct sum of the weights
    let mean: f64 = (3..=1000).map(|j| 1.0 / (j as f64).ln()).sum();
    let var: f64 = (3..=1000).map(|j| 1.0 / (j as f64).ln() * (1.0 - 1.0 / (j as f64).ln())).sum();
    assert!((m - mean).abs() < 1e-9 && (b - var).abs() < 1e-9);
    assert_eq!(v["config"]["model"], "cramer");
    assert_eq!(v["config"]["n"], 1000);
}

#[test]
fn eigen_at_one_is_two() {
    let out = cramer(&["eigen", "--z", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!((v["result"]["eigen"]["lambda"].as_f64().unwrap() - 2.0).abs() < 1e-6);
    assert_eq!(v["verdict"], "pass");
}

#[test]
fn eigen_curve_as_csv() {
    let out = cramer(&["eigen", "--z", "0.5", "--z-max", "2", "--points", "4", "--grid-points", "401", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "z,lambda,residual,asymptotic_ratio");
    assert_eq!(lines.len(), 5);
    let lambdas: Vec<f64> = lines[1..].iter().map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(lambdas.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn usage_errors_exit_two() {
    let out = cramer(&["moments", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
    let out = cramer(&["no-such-command"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn domain_errors_exit_two() {
    // zeta = 50 is outside the admissible range at n = 10^4
    let out = cramer(&["quasiprime", "--n", "10000", "--zeta", "50", "--replicas", "100"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("zeta"));
    let out = cramer(&["moments", "--model", "general"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn failing_verdict_exits_one() {
    // a bound of zero cannot hold
    let out = cramer(&["delta-law", "--k", "20", "--replicas", "1000", "--bound", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["verdict"], "fail");
}

#[test]
fn same_argv_same_json() {
    let args = ["prime-prob", "--n", "500", "--replicas", "2000", "--seed", "5"];
    let mut a = json(&cramer(&args));
    let mut b = json(&cramer(&args));
    strip_time(&mut a);
    strip_time(&mut b);
    assert_eq!(a, b);
    assert_eq!(a["config"]["seed"], 5);
    assert_eq!(a["reports"][1]["master_seed"], 5);
}

#[test]
fn config_file_with_flags_winning() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# test\nmodel = fair_coin\nn = 40\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let v = json(&cramer(&["moments", "--config", cfg]));
    assert_eq!(v["result"]["m_n"], 20.0);
    let v = json(&cramer(&["moments", "--config", cfg, "--n", "10"]));
    assert_eq!(v["result"]["m_n"], 5.0);
    assert_eq!(v["config"]["model"], "fair_coin");

    std::fs::write(dir.path().join("bad.cfg"), "unknown-key = 3\n").unwrap();
    let out = cramer(&["moments", "--config", dir.path().join("bad.cfg").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn output_file_and_exact_law_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("law.csv");
    let out = cramer(&["exact-law", "--model", "fair_coin", "--n", "4", "--format", "csv", "--output", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(path).unwrap();
    assert_eq!(text, "k,probability\n0,0.0625\n1,0.25\n2,0.375\n3,0.25\n4,0.0625\n");
}

#[test]
fn theta_against_residue_oracle() {
    let v = json(&cramer(&["theta", "--n", "1000", "--d", "5"]));
    let diff = v["result"]["difference"].as_f64().unwrap();
    assert!(diff.abs() < 1e-6);
}

#[test]
fn ou_survival_monitoring_flag() {
    let base = ["ou-survival", "--z", "1", "--t", "1", "--dt", "0.05", "--replicas", "4000"];
    let grid = json(&cramer(&[&base[..], &["--monitoring", "grid"]].concat()));
    let bridge = json(&cramer(&base));
    assert_eq!(bridge["config"]["monitoring"], "bridge_corrected");
    let g = grid["result"]["survival"]["estimate"].as_f64().unwrap();
    let b = bridge["result"]["survival"]["estimate"].as_f64().unwrap();
    assert!(b < g);
}

#[test]
fn avoidance_reports_hypothesis_verdict() {
    let v = json(&cramer(&["avoidance", "--set", "all", "--j-max", "12", "--replicas", "2000", "--k", "10"]));
    assert_eq!(v["reports"][0]["verdict"], "hypothesis_violated");
}

#[test]
fn suite_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = cramer(&["suite", "--seed", "42", "--only", "1", "--only", "6", "--output", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["result"]["criteria"].as_array().unwrap().len(), 2);
    let one: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("01-exact-law.json")).unwrap()).unwrap();
    assert_eq!(one["outcome"]["passed"], true);
    assert_eq!(one["config"]["seed"], 42);
    assert!(dir.path().join("06-sturm-liouville.json").exists());
}
