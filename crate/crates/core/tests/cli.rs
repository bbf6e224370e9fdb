//! End-to-end runs of the `ccalc` binary.

use std::process::{Command, Output};

fn ccalc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ccalc")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn entail_verdicts_and_exit_codes() {
    let o = ccalc(&["entail", "--inline", "b->>a. a->>b.", "a /\\ b", "--fired"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("true"));
    assert_eq!(stdout(&o).matches("fired:").count(), 2);
    assert_eq!(ccalc(&["entail", "--inline", "", "top"]).status.code(), Some(0));
    let o = ccalc(&["entail", "--inline", "a->>b.", "b"]);
    assert_eq!((o.status.code(), stdout(&o).trim()), (Some(1), "false"));
}

#[test]
fn entail_reads_files_and_reports_errors() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.pcl");
    std::fs::write(&path, "a.\na -> b.\n").unwrap();
    assert_eq!(ccalc(&["entail", path.to_str().unwrap(), "b"]).status.code(), Some(0));
    std::fs::write(&path, "a.\n(a ->> b) ->> c.\n").unwrap();
    let o = ccalc(&["entail", path.to_str().unwrap(), "c"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("theory formula 2"));
    assert_eq!(ccalc(&["entail", "--inline", "a ->", "a"]).status.code(), Some(3));
    assert_eq!(ccalc(&["frobnicate"]).status.code(), Some(3));
}

#[test]
fn run_traces() {
    let o = ccalc(&["run", "ex1_handshake", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let trace: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let steps = trace["steps"].as_array().unwrap();
    assert_eq!(steps.len(), 6);
    let last = steps[5]["state"].as_str().unwrap();
    assert!(["lendA(", "lendB(", "lendC("].iter().all(|a| last.contains(a)));

    let o = ccalc(&["run", "ex3_judge", "--seed", "1", "--format", "json"]);
    let trace: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let last = trace["steps"].as_array().unwrap().last().unwrap()["state"].as_str().unwrap().to_string();
    assert!(last.contains("|| jailSeller("), "{last}");

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nil.cc");
    std::fs::write(&path, "main 0").unwrap();
    let o = ccalc(&["run", path.to_str().unwrap(), "--format", "json"]);
    let trace: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(trace["steps"].as_array().unwrap().is_empty());
}

#[test]
fn check_verdicts() {
    let o = ccalc(&["check", "ex4_buffet_carl", "--reach-agent", "SatiatedC"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("reachable"));
    let o = ccalc(&["check", "ex4_buffet_prime_carl", "--reach-agent", "SatiatedC"]);
    assert_eq!((o.status.code(), stdout(&o).starts_with("unreachable")), (Some(1), true));
    let o = ccalc(&["check", "ex1_handshake", "--reach-agent", "lendA", "--max-states", "1"]);
    assert_eq!((o.status.code(), stdout(&o).starts_with("unknown")), (Some(2), true));
    let o = ccalc(&["check", "ex3_judge", "--reach-constraint", "dispute"]);
    assert_eq!(o.status.code(), Some(0));
    let o = ccalc(&["check", "ex4_buffet_carl", "--reach-agent", "SatiatedC", "--semantics", "lts", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["verdict"], "reachable");
    assert_eq!(ccalc(&["check", "ex1_handshake"]).status.code(), Some(3));
}

#[test]
fn explore_exports() {
    let dir = tempfile::tempdir().unwrap();
    let dot = dir.path().join("g.dot");
    let o = ccalc(&["explore", "semaphores", "--format", "json", "--dot-out", dot.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["states"].as_array().unwrap().len(), 4);
    assert!(std::fs::read_to_string(&dot).unwrap().starts_with("digraph"));
    let o = ccalc(&["explore", "semaphores", "--semantics", "lts", "--format", "dot"]);
    assert!(stdout(&o).contains("tau"));
}

#[test]
fn correspondence_and_bisimulation() {
    assert_eq!(ccalc(&["correspond", "ex1_handshake"]).status.code(), Some(0));
    assert_eq!(ccalc(&["correspond", "ex1_handshake", "--mutate-fuse"]).status.code(), Some(1));
    let o = ccalc(&["correspond", "--random", "40", "--seed", "2024", "--max-states", "200"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert_eq!(ccalc(&["bisim", "--random", "30", "--seed", "77"]).status.code(), Some(0));
    assert_eq!(ccalc(&["bisim", "ring4", "ring4"]).status.code(), Some(0));
    assert_eq!(ccalc(&["bisim", "ex4_buffet_carl", "ex4_buffet_prime_carl"]).status.code(), Some(1));
}

#[test]
fn corpus_commands() {
    let o = ccalc(&["corpus", "list"]);
    assert!(stdout(&o).lines().count() >= 19);
    let o = ccalc(&["corpus", "show", "ex1_handshake"]);
    assert!(stdout(&o).contains("main Alice() || Bob() || Carl()"));
    let o = ccalc(&["corpus", "run", "ex4_buffet_carl"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("SatiatedC()"));
    assert_eq!(ccalc(&["corpus", "show", "nope"]).status.code(), Some(3));
}
