use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ffiwasawa"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).env_remove("FFIWASAWA_THREADS").output().expect("spawn")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

#[test]
fn places_up_to_degree_three() {
    let out = run(&["places", "--q", "2", "--max-degree", "3"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["count"], 6);
    assert_eq!(v["schema_version"], 1);
    let names: Vec<&str> = v["places"].as_array().unwrap().iter().map(|p| p["place"].as_str().unwrap()).collect();
    assert!(names.contains(&"inf") && names.contains(&"T^2+T+1"));
}

#[test]
fn stickelberger_trivial_datum() {
    let out = run(&["stickelberger", "--datum", "trivial", "--S", "inf", "--T", "T"]);
    assert!(out.status.success());
    assert_eq!(json(&out)["theta"], "1");
}

#[test]
fn malformed_place_exits_one() {
    let out = run(&["stickelberger", "--datum", "trivial", "--S", "T^", "--T", "T"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("parse error"));
}

#[test]
fn usage_error_exits_one() {
    assert_eq!(run(&["places", "--bogus"]).status.code(), Some(1));
}

#[test]
fn output_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cn.json");
    let out = run(&["classnumber", "--datum", "as:T^3", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["class_number"], "3");
}

#[test]
fn datum_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.json");
    std::fs::write(&path, r#"{"kind": "carlitz", "q": 2, "modulus": "T^2", "p_part": true}"#).unwrap();
    let out = run(&["gross-check", "--datum", path.to_str().unwrap(), "--S", "T,inf", "--T", "T^2+T+1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["r"], 1);
    assert_eq!(v["holds"], true);
}

#[test]
fn weierstrass_degree() {
    let out = run(&["weierstrass", "--p", "3", "--coeffs", "3,-6,1", "--t-precision", "8"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["mu"], 0);
    assert_eq!(v["lambda"], 2);
}

#[test]
fn tower_verify_shipped() {
    let tower = Path::new(env!("CARGO_MANIFEST_DIR")).join("towers/carlitz_T_f2.json");
    let out = run(&["tower-verify", "--tower", tower.to_str().unwrap(), "--layers", "3"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json(&out)["verdict"], "MainTheoremConsistent");
}

#[test]
fn thread_count_does_not_change_output() {
    let a = run(&["--threads", "1", "corpus", "b-constant"]);
    let b = run(&["--threads", "8", "corpus", "b-constant"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert_eq!(v["criteria"].as_array().unwrap().len(), 1);
}

#[test]
fn corpus_filter_gross() {
    let out = run(&["corpus", "gross"]);
    assert!(out.status.success());
    let v = json(&out);
    let names: Vec<&str> = v["criteria"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["gross-congruence"]);
}
