use std::process::Command;

use serde_json::Value;

fn run(args: &[&str]) -> (i32, Value) {
    let out = Command::new(env!("CARGO_BIN_EXE_linapprox"))
        .args(args)
        .output()
        .expect("spawn");
    let stdout = String::from_utf8(out.stdout).expect("utf8");
    let json = serde_json::from_str(stdout.trim()).unwrap_or(Value::Null);
    (out.status.code().expect("exit code"), json)
}

fn text(args: &[&str]) -> String {
    let out = Command::new(env!("CARGO_BIN_EXE_linapprox"))
        .args(args)
        .output()
        .expect("spawn");
    String::from_utf8(out.stdout).expect("utf8")
}

#[test]
fn reduce_reports_steps_and_result() {
    let (code, v) = run(&["reduce", "--strategy", "lo", "(\\x.\\y.x)a b"]);
    assert_eq!(code, 0);
    assert_eq!(v["status"], "ok");
    assert_eq!(v["result"], "a");
    assert_eq!(v["steps"], 2);
}

#[test]
fn omega_runs_out_of_fuel() {
    let (code, v) = run(&["reduce", "--fuel", "7", "(\\x.(x)x)\\x.(x)x"]);
    assert_eq!(code, 1);
    assert_eq!(v["status"], "exhausted");
    assert_eq!(v["steps"], 7);
}

#[test]
fn taylor_lines_carry_inverse_factorials() {
    let (code, v) = run(&["taylor", "--size-bound", "5", "(x)y"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = v["lines"]
        .as_array()
        .unwrap()
        .iter()
        .map(|l| l.as_str().unwrap())
        .collect();
    assert_eq!(
        lines,
        ["1 (x)1", "1 (x)[y]", "1/2 (x)[y,y]", "1/6 (x)[y,y,y]"]
    );
}

#[test]
fn boolean_semiring_drops_factorials() {
    let (_, v) = run(&["--semiring", "bool", "taylor", "--size-bound", "4", "(x)y"]);
    assert!(v["terms"]
        .as_array()
        .unwrap()
        .iter()
        .all(|t| t["coeff"] == "1"));
}

#[test]
fn taylor_of_a_system_file() {
    let dir = std::env::temp_dir().join(format!("linapprox-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("loop.sys");
    std::fs::write(&path, "X = (f)X\n@root X\n").unwrap();
    let (code, v) = run(&[
        "taylor",
        "--size-bound",
        "4",
        "--system",
        path.to_str().unwrap(),
    ]);
    std::fs::remove_dir_all(&dir).ok();
    assert_eq!(code, 0);
    let lines: Vec<&str> = v["lines"]
        .as_array()
        .unwrap()
        .iter()
        .map(|l| l.as_str().unwrap())
        .collect();
    assert!(lines.contains(&"1 (f)1"));
    assert!(lines.contains(&"1 (f)[(f)1]"));
}

#[test]
fn coherence_with_derivation() {
    let (code, v) = run(&["coherent", "(x)[y,y]", "(x)[y]"]);
    assert_eq!(code, 0);
    assert_eq!(v["coherent"], true);
    assert_eq!(v["derivation"]["rule"], "app");
    let (_, v) = run(&["coherent", "(x)[y]", "(z)[y]"]);
    assert_eq!(v["coherent"], false);
}

#[test]
fn simulation_is_exact_on_its_certified_region() {
    let (code, v) = run(&["simulate", "--size-bound", "6", "(\\x.(x)x)y"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"], "(y)y");
    assert_eq!(v["exact_on_certified"], true);
}

#[test]
fn extraction_and_its_failure() {
    let (code, v) = run(&["extract", "--fuel", "4", "(\\x.x)(\\y.y)z", "z"]);
    assert_eq!(code, 0);
    assert_eq!(v["steps"], 2);
    let (code, v) = run(&["extract", "--fuel", "4", "(\\x.x)z", "w"]);
    assert_eq!(code, 1);
    assert_eq!(v["status"], "not-found-within-fuel");
}

#[test]
fn commutation_agrees() {
    let (code, v) = run(&["commute", "--size-bound", "10", "(\\x.(x)x)(\\y.y)z"]);
    assert_eq!(code, 0, "{v}");
    assert_eq!(v["status"], "ok");
}

#[test]
fn accordion_trace_hits_every_checkpoint() {
    let (code, v) = run(&["accordion", "trace", "--n", "1", "--fuel", "200"]);
    assert_eq!(code, 0);
    let labels: Vec<u64> = v["checkpoints"]
        .as_array()
        .unwrap()
        .iter()
        .map(|h| h["label"].as_u64().unwrap())
        .collect();
    assert_eq!(labels, [2, 3, 5, 10, 13, 22, 26]);
}

#[test]
fn accordion_approximant_and_layers() {
    let (code, v) = run(&["accordion", "approximant", "--d", "1"]);
    assert_eq!(code, 0);
    assert_eq!(v["offset"], 1);
    let (code, _) = run(&["accordion", "approximant", "--d", "2", "--fuel", "3"]);
    assert_eq!(code, 1);
    let (code, v) = run(&["accordion", "layers", "--d", "1", "--size-bound", "10"]);
    assert_eq!(code, 0);
    assert!(!v["layer"].as_array().unwrap().is_empty());
}

#[test]
fn negative_search_and_its_control() {
    let (code, v) = run(&[
        "accordion",
        "nosearch",
        "--case",
        "t2:0",
        "--n",
        "0",
        "--budget",
        "6",
    ]);
    assert_eq!(code, 0);
    assert_eq!(v["witness"], Value::Null);
    let (code, v) = run(&[
        "accordion",
        "nosearch",
        "--case",
        "control",
        "--n",
        "0",
        "--budget",
        "20",
    ]);
    assert_eq!(code, 0);
    assert!(v["witness"].is_array() || v["witness"].is_object(), "{v}");
}

#[test]
fn errors_and_usage() {
    let (code, v) = run(&["reduce", "(("]);
    assert_eq!(code, 1);
    assert_eq!(v["status"], "error");
    let (code, _) = run(&["frobnicate"]);
    assert_eq!(code, 2);
    let (code, _) = run(&["accordion", "nosearch", "--case", "9"]);
    assert_eq!(code, 2);
}

#[test]
fn pretty_output_is_plain_text() {
    let out = text(&["--pretty", "reduce", "(\\x.x)y"]);
    assert!(out.starts_with("y\n"));
}
