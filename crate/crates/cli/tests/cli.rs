use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bsim")).args(args).output().expect("bsim runs")
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn config(name: &str) -> String {
    configs().join(name).to_string_lossy().into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

#[test]
fn minimal_kl_config_writes_the_result_fields() {
    let o = bsim(&["estimate", &config("kl_minimal.json"), "--L", "4000"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    for key in ["value", "log_pi_hat", "hits", "stderr", "seed"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["seed"], 1);
    // inf over q1 >= 1/2 of KL(Q, (0.2, 0.3, 0.5)) is 0.5 ln 1.5625, plus an O(ln n / n) bias
    let d = v["value"].as_f64().unwrap();
    assert!((d - 0.5 * 1.5625f64.ln()).abs() < 0.02, "{d}");
}

#[test]
fn same_seed_gives_byte_identical_output() {
    let run = |threads: &str| bsim(&["estimate", &config("kl_minimal.json"), "--L", "3000", "--threads", threads]).stdout;
    let a = run("1");
    assert_eq!(a, run("1"));
    assert_eq!(a, run("3"));
    let other = bsim(&["estimate", &config("kl_minimal.json"), "--L", "3000", "--seed", "2"]).stdout;
    assert_ne!(a, other);
}

#[test]
fn schema_violations_name_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        r#"{"generator":{"family":"power","gamma":1},"reference_vector":[0.5,0.5],
            "constraint":{"type":"all"},"estimator":{"n":10,"L":"many","seed":1}}"#,
    )
    .unwrap();
    let o = bsim(&["estimate", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("estimator.L"), "{err}");

    std::fs::write(
        &bad,
        r#"{"generator":{"family":"power","gamma":1},"reference_vector":[0.5,0.5],
            "constraint":{"type":"halfspace","a":[1,0],"b":1,"sens":"le"},"estimator":{"n":10,"L":5,"seed":1}}"#,
    )
    .unwrap();
    let o = bsim(&["estimate", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("constraint"));

    let o = bsim(&["estimate", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    // a problem config under the wrong command
    let o = bsim(&["transport", &config("entropy_max.json")]);
    assert_eq!(code(&o), 2);
}

#[test]
fn zero_hits_exit_with_code_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("rare.json");
    std::fs::write(
        &cfg,
        r#"{"generator":{"family":"power","gamma":2},"reference_vector":[0.5,0.5],
            "constraint":{"type":"halfspace","a":[1,0],"b":50},"estimator":{"n":100,"L":500,"seed":1}}"#,
    )
    .unwrap();
    let out = dir.path().join("r.json");
    let o = bsim(&["estimate", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 3);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["hits"], 0);
    assert_eq!(v["value"], "inf");
    assert_eq!(v["log_pi_hat"], "-inf");
}

#[test]
fn trace_has_one_row_per_batch() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.csv");
    let o = bsim(&["estimate", &config("kl_minimal.json"), "--L", "3200", "--trace", trace.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    let text = std::fs::read_to_string(&trace).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "batch,replications,hits,cumulative_replications,cumulative_hits,log_pi_hat,rate,value");
    assert_eq!(rows.len(), 33);
    let last: Vec<&str> = rows[32].split(',').collect();
    assert_eq!(last[3], "3200");
    assert_eq!(last[4], v["hits"].to_string());
    let value: f64 = last[7].parse().unwrap();
    assert!((value - v["value"].as_f64().unwrap()).abs() < 1e-12);
}

#[test]
fn data_file_selects_statistical_mode() {
    let o = bsim(&["estimate", &config("statistical.json"), "--L", "4000"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    assert_eq!(v["n"], 500);
    assert_eq!(v["details"]["block_sizes"], serde_json::json!([100, 150, 250]));
    let o = bsim(&["estimate", &config("statistical.json"), "--n", "100"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn every_shipped_config_runs() {
    let cases = [
        ("estimate", "deterministic_box.json"),
        ("bounds", "js_bounds.json"),
        ("entropy-max", "entropy_max.json"),
        ("transport", "transport.json"),
        ("assignment", "assignment.json"),
        ("quadratic", "quadratic.json"),
        ("linear", "linear.json"),
    ];
    for (cmd, file) in cases {
        let o = bsim(&[cmd, &config(file), "--L", "2000"]);
        assert_eq!(code(&o), 0, "{cmd} {file}: {}", String::from_utf8_lossy(&o.stderr));
        let v = json(&o);
        assert_eq!(v["command"], cmd);
        assert!(v["value"].is_number(), "{cmd}: {}", v["value"]);
    }
}

#[test]
fn bounds_report_both_ends() {
    let o = bsim(&["bounds", &config("js_bounds.json"), "--L", "2000"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    let (lo, hi) = (v["value"].as_f64().unwrap(), v["upper"].as_f64().unwrap());
    assert!(lo <= hi, "{lo} {hi}");
}

#[test]
fn validate_exit_codes() {
    let o = bsim(&["validate", "--criteria", "7"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("criterion 7: PASS"));
    let o = bsim(&["validate", "--criteria", "11"]);
    assert_eq!(code(&o), 4);
}

#[test]
fn sample_law_is_reproducible() {
    let args = ["sample-law", "--law", r#"{"law":"gamma_law","scale":2}"#, "--nu", "3", "--count", "2000", "--seed", "4"];
    let a = bsim(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, bsim(&args).stdout);
    let xs: Vec<f64> = String::from_utf8_lossy(&a.stdout).lines().map(|l| l.parse().unwrap()).collect();
    assert_eq!(xs.len(), 2000);
    // block of three mean-one weights
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    assert!((m - 3.0).abs() < 0.1, "{m}");
    let o = bsim(&["sample-law", "--law", r#"{"law":"gamma_law"}"#]);
    assert_eq!(code(&o), 2);
}

#[test]
fn schema_file_documents_the_config_sections() {
    let text = std::fs::read_to_string(configs().join("../schema/config.schema.json")).unwrap();
    let schema: Value = serde_json::from_str(&text).unwrap();
    let defs = &schema["$defs"];
    for key in ["generator", "reference_vector", "data_file", "constraint", "objective", "estimator", "output"] {
        assert!(defs["estimate_config"]["properties"].get(key).is_some(), "{key}");
    }
    for key in ["value", "log_pi_hat", "hits", "stderr", "seed"] {
        assert!(defs["result"]["required"].as_array().unwrap().iter().any(|k| k == key), "{key}");
    }
}
