use std::process::Command;

use atomgame_cli::{dispatch, RunReport};
use serde_json::Value;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut argv = vec!["atomgame"];
    argv.extend_from_slice(args);
    dispatch(argv)
}

fn report(args: &[&str]) -> (i32, RunReport) {
    let (code, out, err) = run(args);
    assert!(code == 0 || code == 2, "exit {code}: {err}");
    let r: RunReport = serde_json::from_str(&out).expect("report parses");
    (code, r)
}

#[test]
fn one_atom_game_is_exists() {
    let (code, r) = report(&["game", "solve", "--algebra", "one-atom.json", "--m", "4", "--rounds", "inf"]);
    assert_eq!(code, 0);
    assert_eq!(r.schema, 1);
    assert_eq!(r.outcome["winner"], "exists");
    assert_eq!(r.outcome["audited"], true);
    assert_eq!(r.witness["witness"]["kind"], "safety_region");
}

#[test]
fn ef_k4_k3_is_forall() {
    let (code, r) = report(&["ef", "--p", "4", "--r", "4", "--g", "K4", "--h", "K3"]);
    assert_eq!(code, 0);
    assert_eq!(r.outcome["winner"], "forall");
    assert_eq!(r.outcome["min_forall_rounds"], 4);
}

#[test]
fn rainbow_cone_script_wins_with_proof_tree() {
    let (code, r) = report(&["game", "verify-script", "--rainbow", "3:4:3", "--m", "6", "--reuse"]);
    assert_eq!(code, 0);
    assert_eq!(r.outcome["winner"], "forall");
    assert_eq!(r.witness["kind"], "proof_tree");
    assert!(!r.witness["branches"].as_array().unwrap().is_empty());
}

#[test]
fn short_tint_pool_yields_counterexample() {
    let (code, r) = report(&["game", "verify-script", "--rainbow", "3:4:3", "--m", "6", "--tint-pool", "2"]);
    assert_eq!(code, 0);
    assert_eq!(r.outcome["winner"], Value::Null);
    assert_eq!(r.witness["kind"], "counterexample");
}

#[test]
fn unknown_flag_is_usage_error() {
    let (code, out, err) = run(&["game", "solve", "--frobnicate"]);
    assert_eq!(code, 1);
    assert!(out.is_empty());
    assert!(err.contains("Usage"), "{err}");
    assert_eq!(run(&["teleport"]).0, 1);
}

#[test]
fn exhausted_budget_exits_two_with_report() {
    let (code, r) = report(&[
        "game", "solve", "--algebra", "rainbow:3:4:3", "--m", "5", "--rounds", "inf", "--budget", "10",
    ]);
    assert_eq!(code, 2);
    assert_eq!(r.outcome["status"], "undecided");
    assert_eq!(r.outcome["reason"], "budget");
    assert_eq!(r.budget.limit, Some(10));
}

#[test]
fn structural_error_exits_one() {
    let dir = std::env::temp_dir().join(format!("atomgame-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.json");
    std::fs::write(&bad, r#"{"kind":"ra","atoms":["e"],"identity":["x"],"converse":{"e":"e"},"consistent":[]}"#).unwrap();
    let (code, out, err) = run(&["validate", "--algebra", bad.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(out.is_empty());
    assert!(err.contains("unknown atom"), "{err}");
    assert_eq!(run(&["validate", "--algebra", "missing.json"]).0, 1);
}

#[test]
fn emitted_structure_reloads() {
    let (_, r) = report(&["blur", "build", "--base", "maddux:3", "--l", "2", "--trunc", "1"]);
    assert_eq!(r.outcome["valid"], true);
    let dir = std::env::temp_dir().join(format!("atomgame-cli-rt-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("blown.json");
    std::fs::write(&path, r.witness["structure"].to_string()).unwrap();
    let (code, v) = report(&["validate", "--algebra", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(v.outcome["valid"], true);
    assert_eq!(v.outcome["atoms"], r.outcome["atoms"]);
    let whole = dir.join("report.json");
    std::fs::write(&whole, serde_json::to_string(&r).unwrap()).unwrap();
    let (code, w) = report(&["validate", "--algebra", whole.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(w.outcome["atoms"], r.outcome["atoms"]);
}

#[test]
fn report_round_trips() {
    let (_, out, _) = run(&["basis", "find", "--algebra", "mat:3:maddux:2", "--m", "3"]);
    let r: RunReport = serde_json::from_str(&out).unwrap();
    let again = serde_json::to_string_pretty(&r).unwrap() + "\n";
    assert_eq!(again, out);
    assert_eq!(r.outcome["audited"], true);
}

fn without_timing(out: &str) -> Value {
    let mut v: Value = serde_json::from_str(out).unwrap();
    v.as_object_mut().unwrap().remove("timing");
    v
}

#[test]
fn reports_are_deterministic() {
    let cases: &[&[&str]] = &[
        &["basis", "find", "--algebra", "mat:3:maddux:3", "--m", "4", "--kind", "hyperbasis"],
        &["game", "solve", "--algebra", "mat:3:maddux:2", "--m", "4", "--rounds", "3"],
        &["blur", "check", "--algebra", "maddux:5", "--J", "all:3", "--strong"],
        &["game", "verify-script", "--rainbow", "3:4:3", "--m", "6", "--tint-pool", "3"],
    ];
    for args in cases {
        let a = run(args);
        let b = run(args);
        assert_eq!(a.0, b.0);
        assert_eq!(without_timing(&a.1), without_timing(&b.1), "{args:?}");
    }
}

#[test]
fn relational_basis_and_blur_reports() {
    let (_, r) = report(&["basis", "find", "--algebra", "maddux:1", "--m", "3", "--kind", "relational"]);
    assert_eq!(r.outcome["exists"], false);
    let (_, r) = report(&["blur", "check", "--algebra", "maddux:2", "--J", "a0,a1", "--n", "3"]);
    let names: Vec<&str> = r.witness["conditions"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert_eq!(names, ["(a)", "(b)", "(c)", "(d)", "(e)"]);
}

#[test]
fn binary_reads_budget_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_atomgame"))
        .args(["game", "solve", "--algebra", "rainbow:3:4:3", "--m", "5", "--rounds", "inf"])
        .env("ATOMGAME_BUDGET", "7")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let r: RunReport = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r.budget.limit, Some(7));
}

#[test]
fn binary_jobs_flag_does_not_change_answer() {
    let run_with = |jobs: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_atomgame"))
            .args(["--jobs", jobs, "game", "solve", "--algebra", "mat:3:maddux:3", "--m", "4", "--rounds", "inf"])
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0));
        without_timing(std::str::from_utf8(&out.stdout).unwrap())
    };
    let one = run_with("1");
    let mut four = run_with("4");
    four["command"] = one["command"].clone();
    assert_eq!(one, four);
}
