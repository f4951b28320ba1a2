use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_fakell"));
    c.env_remove("FAKELL_PRECISION");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn fakell")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn temp_file(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("fakell-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, contents).unwrap();
    p
}

#[test]
fn algebra_check_default() {
    let out = run(&["algebra", "check"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["status"], "ok");
    assert_eq!(v["results"]["ramified"], serde_json::json!([2, 3]));
    assert_eq!(v["results"]["discriminant"], "6");
}

#[test]
fn curve_split_at_i() {
    let v = json(&run(&["curve", "split", "--mu", "0,0,1,0"]));
    assert_eq!(v["results"]["h0"], 2);
    assert_eq!(v["results"]["dphi"], "2i");
    assert_eq!(v["results"]["verdict"], "Split");
    assert!(!v["citations"].as_array().unwrap().is_empty());
}

#[test]
fn fiber_h0_negative_real_part() {
    let v = json(&run(&["fiber", "h0", "--tau", "-0.3+1.2i"]));
    assert_eq!(v["results"]["h0"], 1);
    assert_eq!(v["results"]["verdict"], "NonSplit");
}

#[test]
fn config_file_and_overrides() {
    let cfg = temp_file("std.conf", "# standard order\norder = standard\nprecision = 160\nseed = 4\n");
    let out = run(&[cfg.to_str().unwrap(), "order", "disc", "--precision", "192"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["results"]["reduced_discriminant"], "12");
    assert_eq!(v["inputs"]["config"]["precision"], "192");
    assert_eq!(v["inputs"]["config"]["seed"], "4");
}

#[test]
fn environment_precision_is_overridden_by_config() {
    let cfg = temp_file("prec.conf", "precision = 160\n");
    let from_env = bin().args(["algebra", "check"]).env("FAKELL_PRECISION", "256").output().unwrap();
    assert_eq!(json(&from_env)["inputs"]["config"]["precision"], "256");
    let from_cfg = bin()
        .args([cfg.to_str().unwrap(), "algebra", "check"])
        .env("FAKELL_PRECISION", "256")
        .output()
        .unwrap();
    assert_eq!(json(&from_cfg)["inputs"]["config"]["precision"], "160");
}

#[test]
fn report_inputs_reproduce_the_run() {
    let out = temp_file("report.json", "");
    let read = || -> Value { serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap() };
    let status = bin()
        .args(["--out", out.to_str().unwrap(), "suite", "cocycle", "--count", "4", "--seed", "11"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let first = read();
    let cfg_text: String = first["inputs"]["config"]
        .as_object()
        .unwrap()
        .iter()
        .map(|(k, v)| format!("{k} = {}\n", v.as_str().unwrap()))
        .collect();
    let cfg = temp_file("echo.conf", &cfg_text);
    let argv: Vec<&str> = first["inputs"]["argv"]
        .as_array()
        .unwrap()
        .iter()
        .map(|a| a.as_str().unwrap())
        .collect();
    // argv carries --out, so the rerun overwrites the same file
    let status = bin().arg(&cfg).args(&argv).status().unwrap();
    assert_eq!(status.code(), Some(0));
    let second = read();
    for key in ["schema", "command", "inputs", "status", "results", "citations"] {
        assert_eq!(first[key], second[key], "{key}");
    }
}

#[test]
fn bad_config_exits_2_with_line() {
    let cfg = temp_file("bad.conf", "algebra.a = 3\nalgebra.c = 1\n");
    let out = run(&[cfg.to_str().unwrap(), "algebra", "check"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn split_algebra_exits_2() {
    let cfg = temp_file("split.conf", "algebra.a = 1\nalgebra.b = -1\n");
    let out = run(&[cfg.to_str().unwrap(), "algebra", "check"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn element_outside_order_exits_1() {
    let out = run(&["curve", "split", "--mu", "0,0,1/3,0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
}

#[test]
fn usage_error_exits_2() {
    assert_eq!(run(&["units"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn cm_enumerate_in_window() {
    let v = json(&run(&["cm", "enumerate", "--height", "2", "--window", "-1,1,1/2,2"]));
    let pts = v["results"]["points"].as_array().unwrap();
    assert!(pts.len() >= 2);
    assert!(pts.iter().all(|p| p["tau"].is_string()));
}

#[test]
fn classify_commands() {
    let fiber = json(&run(&["classify", "--surface", "--in-fiber", "--gc", "2"]));
    assert_eq!(fiber["results"]["verdict"], "NonSplit");
    let etale = json(&run(&["classify", "--genus", "4", "--degree", "3", "--gc", "2"]));
    assert_eq!(etale["results"]["verdict"], "Split");
}
