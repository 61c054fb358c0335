use std::io::Write;
use std::process::{Command, Output};

use serde_json::Value;

fn bergtrace(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bergtrace")).args(args).output().unwrap()
}

fn symbol_file(json: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(json.as_bytes()).unwrap();
    f
}

const CIRCLE: &str = r#"{"alpha":0,"beta":0,"measure":{"kind":"circle_radial_derivative","r0":0.5}}"#;

#[test]
fn trace_from_file() {
    let f = symbol_file(CIRCLE);
    let out = bergtrace(&["trace", "--symbol", f.path().to_str().unwrap(), "--dim", "96"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let re = v["trace"]["re"].as_f64().unwrap();
    assert!((re + 2.0 / 0.421875).abs() < 1e-7, "{re}");
    assert_eq!(v["agree"], Value::Bool(true));
}

#[test]
fn divergent_symbol_exits_three() {
    let out = bergtrace(&[
        "trace",
        "--symbol",
        r#"{"alpha":1,"beta":1,"measure":{"kind":"radial_power","s":2}}"#,
    ]);
    assert_eq!(out.status.code(), Some(3));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["divergence_exponent"].as_f64(), Some(-2.0));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["exit_code"].as_i64(), Some(3));
}

#[test]
fn missing_file_and_bad_args_exit_one() {
    assert_eq!(bergtrace(&["trace", "--symbol", "/nonexistent/symbol.json"]).status.code(), Some(1));
    assert_eq!(bergtrace(&["trace", "--dim", "0", "--symbol", CIRCLE]).status.code(), Some(1));
    assert_eq!(bergtrace(&["frobnicate"]).status.code(), Some(1));
}

#[test]
fn matrix_csv_shape() {
    let out = bergtrace(&["matrix", "--symbol", CIRCLE, "--dim", "5", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 5);
    assert!(rows.iter().all(|r| r.split(',').count() == 10));
}

#[test]
fn spectrum_with_explicit_window() {
    let sym = r#"{"alpha":1,"beta":1,"measure":{"kind":"circle_uniform","r0":0.6}}"#;
    let out = bergtrace(&["spectrum", "--symbol", sym, "--dim", "64", "--window", "8,30"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["svals"].as_array().unwrap().len(), 64);
    assert!(v["fit"]["sigma"].as_f64().unwrap() > 0.5);
}

#[test]
fn verify_filter_passes() {
    let out = bergtrace(&["verify", "--filter", "ex42-norm", "--format", "text"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout).unwrap().contains("passed"));
}
