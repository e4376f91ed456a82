use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const IDENTITY: &str = r#"{"schema":"1","kind":"linear","label":"identity2",
  "domains":[{"dim":2,"exponent":"2"}],"codomain":{"dim":2,"exponent":"2"},"entries":[1,0,0,1]}"#;

fn summing(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_summing")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn payload(out: &Output) -> Value {
    let v: Value = serde_json::from_slice(&out.stdout).expect("json on stdout");
    v["payload"].clone()
}

#[test]
fn identity_constant_near_sqrt2() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "id.json", IDENTITY);
    let out = summing(&["constant", "--p", "2", f.to_str().unwrap(), "--budget", "3", "--m-max", "3"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let b = &payload(&out)["result"]["bracket"];
    let (lo, up) = (b["lower"].as_f64().unwrap(), b["upper"].as_f64().unwrap());
    let s = std::f64::consts::SQRT_2;
    assert!((lo - s).abs() <= 0.05 * s && (up - s).abs() <= 0.05 * s, "{b}");
}

#[test]
fn out_directory_layout() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "id.json", IDENTITY);
    let out = summing(&[
        "dominate", "--p", "2", "--q0", "4/3", "--q1", "4", "--budget", "2", "--m-max", "2", "--out",
        dir.path().to_str().unwrap(), f.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let saved = dir.path().join("reports/dominate/identity2.json");
    let v: Value = serde_json::from_str(&std::fs::read_to_string(saved).unwrap()).unwrap();
    assert_eq!(v["payload"], payload(&out));
    assert_eq!(v["header"]["tool"], "summing");
    assert!(v["payload"]["result"]["certificate"]["weights"].is_array());
}

#[test]
fn holder_check_passes() {
    let out = summing(&["holder-check", "--p", "2", "--q0", "4/3", "--q1", "4", "--trials", "200"]);
    assert_eq!(out.status.code(), Some(0));
    let r = &payload(&out)["result"];
    assert_eq!(r["metrics"]["violations"].as_f64(), Some(0.0));
    assert!(r["metrics"]["max_ratio"].as_f64().unwrap() <= 1.0 + 1e-9);
}

#[test]
fn non_gamma_pair_is_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "id.json", IDENTITY);
    let out = summing(&["adjudicate-triviality", "--p", "2", "--q0", "1", "--q1", "3", f.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not a Γ pair"));
}

#[test]
fn usage_and_input_errors() {
    assert_eq!(summing(&["constant", "--bogus"]).status.code(), Some(1));
    assert_eq!(summing(&["--help"]).status.code(), Some(0));
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", r#"{"schema":"1","kind":"linear"}"#);
    assert_eq!(summing(&["constant", "--p", "2", bad.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(summing(&["constant", "--p", "2", "/nonexistent/op.json"]).status.code(), Some(2));
}

#[test]
fn norm_of_sequence_file() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "seq.json", r#"{"schema":"1","space":{"dim":2,"exponent":"2"},"items":[[3,0],[0,4]]}"#);
    let out = summing(&["norm", "--kind", "strong", "--p", "2", f.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = payload(&out)["result"]["estimate"]["value"].as_f64().unwrap();
    assert!((v - 5.0).abs() < 1e-12);
}

#[test]
fn payload_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "id.json", IDENTITY);
    let args = ["constant", "--p", "2", "--budget", "2", "--m-max", "2", "--seed", "7", f.to_str().unwrap()];
    assert_eq!(payload(&summing(&args)), payload(&summing(&args)));
}
