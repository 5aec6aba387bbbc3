use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use gr1kit::gr1::Strategy;
use tempfile::TempDir;

fn gr1kit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gr1kit")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn path(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Emit and synthesize the scenario at `bl`, returning (spec, strategy) paths.
fn synthesize(dir: &TempDir, bl: i32) -> (PathBuf, PathBuf) {
    let spec = path(dir, &format!("wd{bl}.spec"));
    let strat = path(dir, &format!("wd{bl}.json"));
    let out = gr1kit(&["emit", "--param", &format!("blInit={bl}"), "-o", s(&spec)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let out = gr1kit(&["synth", s(&spec), "-o", s(&strat)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    (spec, strat)
}

#[test]
fn emit_writes_parseable_spec_and_flags_override_config() {
    let dir = TempDir::new().unwrap();
    let cfg = path(&dir, "wd.cfg");
    fs::write(&cfg, "# scenario\nN = 1\nblInit = 20\n").unwrap();
    let out = gr1kit(&["emit", "--config", s(&cfg), "--param", "blInit=14"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(gr1kit::speclang::parse_spec(&text).is_ok());
    assert!(text.contains("BL = 14"));
    assert!(!text.contains("O1"));
}

#[test]
fn emit_rejects_unknown_key() {
    let out = gr1kit(&["emit", "--param", "bogus=1"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn synth_exit_codes() {
    let dir = TempDir::new().unwrap();
    synthesize(&dir, 15);
    let spec = path(&dir, "high.spec");
    assert_eq!(code(&gr1kit(&["emit", "--param", "blInit=28", "-o", s(&spec)])), 0);
    let out = gr1kit(&["synth", s(&spec)]);
    assert_eq!(code(&out), 10);
    assert!(out.stdout.is_empty());
    let bad = path(&dir, "bad.spec");
    fs::write(&bad, "[SYS_VARS]\nx : 0..3\n[SYS_TRANS]\nx' = = 1\n").unwrap();
    let out = gr1kit(&["synth", s(&bad)]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains(": 4:6: syntax error"));
}

#[test]
fn simulate_is_deterministic_and_checks_pass() {
    let dir = TempDir::new().unwrap();
    let (spec, strat) = synthesize(&dir, 12);
    let a = path(&dir, "a.csv");
    let b = path(&dir, "b.csv");
    for out in [&a, &b] {
        let r = gr1kit(&["simulate", "--strategy", s(&strat), "--spec", s(&spec), "--seed", "42", "-o", s(out)]);
        assert_eq!(code(&r), 0, "{}", String::from_utf8_lossy(&r.stderr));
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    assert_eq!(text.lines().count(), 182);
    assert!(text.starts_with("step,time_s,RS,BL,HF,tries,S,O1,O2,mode,ACT,human_away"));

    let r = gr1kit(&["check", "--spec", s(&spec), "--trace", s(&a), "--mode", "safety"]);
    assert_eq!(code(&r), 0);
    assert!(String::from_utf8_lossy(&r.stdout).starts_with("PASS"));
    let r = gr1kit(&["check", "--spec", s(&spec), "--trace", s(&a), "--mode", "recurrence", "--window", "40"]);
    assert_eq!(code(&r), 0);
    for mode in ["lasso", "closure"] {
        let r = gr1kit(&["check", "--spec", s(&spec), "--strategy", s(&strat), "--mode", mode]);
        assert_eq!(code(&r), 0, "{mode}: {}", String::from_utf8_lossy(&r.stdout));
    }
    let r = gr1kit(&["check", "--spec", s(&spec), "--strategy", s(&strat), "--mode", "lasso", "--adversary", "random"]);
    assert_eq!(code(&r), 2);
}

#[test]
fn check_reports_tampered_trace() {
    let dir = TempDir::new().unwrap();
    let (spec, strat) = synthesize(&dir, 12);
    let csv = path(&dir, "t.csv");
    let r = gr1kit(&["simulate", "--strategy", s(&strat), "--steps", "20", "-o", s(&csv)]);
    assert_eq!(code(&r), 0);
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    // teleport the robot two cells in one step
    let mut cells: Vec<String> = lines[5].split(',').map(String::from).collect();
    cells[2] = ((cells[2].parse::<i32>().unwrap() + 2) % 4).to_string();
    lines[5] = cells.join(",");
    fs::write(&csv, lines.join("\n") + "\n").unwrap();
    let r = gr1kit(&["check", "--spec", s(&spec), "--trace", s(&csv), "--mode", "safety", "--json"]);
    assert_eq!(code(&r), 4);
    assert!(String::from_utf8_lossy(&r.stdout).contains("\"passed\":false"));
}

#[test]
fn scripted_event_shows_retry() {
    let dir = TempDir::new().unwrap();
    let (spec, strat) = synthesize(&dir, 12);
    let probe = path(&dir, "probe.csv");
    let r = gr1kit(&["simulate", "--strategy", s(&strat), "--spec", s(&spec), "--adversary", "scripted", "--seed", "7", "-o", s(&probe)]);
    assert_eq!(code(&r), 0);
    let rows: Vec<Vec<String>> = fs::read_to_string(&probe)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect();
    let first = rows.iter().position(|r| r[2] == "0" && r[5] == "1").expect("a dropoff attempt");
    let events = path(&dir, "ev.txt");
    fs::write(&events, format!("step={first} set S=0\n")).unwrap();
    let csv = path(&dir, "retry.csv");
    let r = gr1kit(&[
        "simulate", "--strategy", s(&strat), "--spec", s(&spec), "--adversary", "scripted", "--seed", "7",
        "--events", s(&events), "-o", s(&csv),
    ]);
    assert_eq!(code(&r), 0);
    let tries: Vec<String> = fs::read_to_string(&csv)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(5).unwrap().to_string())
        .collect();
    assert_eq!(&tries[first..first + 2], ["1", "2"]);
}

#[test]
fn batch_runs_write_one_file_each() {
    let dir = TempDir::new().unwrap();
    let (spec, strat) = synthesize(&dir, 12);
    let out = path(&dir, "runs");
    let r = gr1kit(&[
        "simulate", "--strategy", s(&strat), "--spec", s(&spec), "--runs", "4", "--seed", "3", "--steps", "30", "-o", s(&out),
    ]);
    assert_eq!(code(&r), 0, "{}", String::from_utf8_lossy(&r.stderr));
    assert_eq!(fs::read_dir(&out).unwrap().count(), 4);
    let single = gr1kit(&["simulate", "--strategy", s(&strat), "--spec", s(&spec), "--seed", "5", "--steps", "30"]);
    assert_eq!(String::from_utf8(single.stdout).unwrap(), fs::read_to_string(out.join("run_0002.csv")).unwrap());
}

#[test]
fn strategy_hole_exits_3() {
    let dir = TempDir::new().unwrap();
    let (spec, strat) = synthesize(&dir, 12);
    let mut strategy = Strategy::from_json_str(&fs::read_to_string(&strat).unwrap()).unwrap();
    for node in &mut strategy.nodes {
        node.edges.clear();
    }
    let holed = path(&dir, "holed.json");
    fs::write(&holed, strategy.to_json_string()).unwrap();
    let r = gr1kit(&["simulate", "--strategy", s(&holed), "--spec", s(&spec)]);
    assert_eq!(code(&r), 3, "{}", String::from_utf8_lossy(&r.stderr));
}

#[test]
fn oracle_exit_codes() {
    let dir = TempDir::new().unwrap();
    let r = gr1kit(&["oracle", "--random", "20"]);
    assert_eq!(code(&r), 0);
    assert!(String::from_utf8_lossy(&r.stdout).contains("all equal"));
    let spec = path(&dir, "reduced.spec");
    let r = gr1kit(&[
        "emit", "--param", "N=2", "--param", "blMax=10", "--param", "deltaUnits=5", "--param", "blUpper=9",
        "--param", "kMove=1", "--param", "kDrop=2", "--param", "blInit=5", "-o", s(&spec),
    ]);
    assert_eq!(code(&r), 0);
    assert_eq!(code(&gr1kit(&["oracle", s(&spec)])), 0);
    let big = path(&dir, "big.spec");
    assert_eq!(code(&gr1kit(&["emit", "-o", s(&big)])), 0);
    assert_eq!(code(&gr1kit(&["oracle", s(&big)])), 5);
}

#[test]
fn interactive_mode_prompts_and_reads_choices() {
    use std::io::Write;
    use std::process::Stdio;
    let dir = TempDir::new().unwrap();
    let (spec, strat) = synthesize(&dir, 12);
    let mut child = Command::new(env!("CARGO_BIN_EXE_gr1kit"))
        .args(["simulate", "--strategy", s(&strat), "--spec", s(&spec), "--adversary", "interactive", "--steps", "3"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(b"0\n0\n0\n0\n").unwrap();
    let out = child.wait_with_output().unwrap();
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("env move> "));
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 5);
}
