use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use flock_core::{GameParams, SpeResult};
use tempfile::TempDir;

const EX1: &str = r#"{"beta1": 4.5, "beta2": 4, "E1": 5, "E2": 3, "r": 2, "t_o": 10}"#;
const EX1_D02: &str = r#"{"beta1": 4.5, "beta2": 4, "E1": 3.2, "E2": 3, "r": 2, "t_o": 10}"#;
const EX1_BETA40: &str = r#"{"beta1": 40, "beta2": 4, "E1": 5, "E2": 3, "r": 2, "t_o": 10}"#;

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flockgame")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn solve_discrete_example() {
    let dir = TempDir::new().unwrap();
    let params = write(&dir, "ex1.json", EX1);
    let out = run(&["solve", "--mode", "dt", "--params", p(&params)]);
    assert_eq!(out.status.code(), Some(0));
    let res = SpeResult::from_json(&stdout(&out)).unwrap();
    assert_eq!(res.case.code(), "DT-3.1.a");
    assert_eq!(res.outcomes.len(), 1);
    assert_eq!((res.outcomes[0].leader_time(), res.outcomes[0].follower_time()), (8.0, 9.0));
    res.validate_invariants(&GameParams::from_json(EX1).unwrap()).unwrap();
}

#[test]
fn solve_continuous_empty_branch_and_strict_cooperation() {
    let dir = TempDir::new().unwrap();
    let ex1 = write(&dir, "ex1.json", EX1);
    let out = run(&["solve", "--mode", "ct", "--params", p(&ex1)]);
    let res = SpeResult::from_json(&stdout(&out)).unwrap();
    assert_eq!(res.case.code(), "CT-2.2.b");
    assert!(res.outcomes.is_empty());

    let d02 = write(&dir, "d02.json", EX1_D02);
    let out = run(&["solve", "--mode", "sfg", "--params", p(&d02), "--output", "csv"]);
    assert_eq!(
        stdout(&out),
        "case,t1,t2,type,flock,u1,u2\nSFG-coop,10,10,SFG_COOP,StrictFlock,2.2,2\n"
    );
}

#[test]
fn every_emitted_result_round_trips() {
    let dir = TempDir::new().unwrap();
    for (name, text) in [("a.json", EX1), ("b.json", EX1_D02), ("c.json", EX1_BETA40)] {
        let path = write(&dir, name, text);
        let params = GameParams::from_json(text).unwrap();
        for mode in ["ct", "dt", "sfg"] {
            let out = run(&["solve", "--mode", mode, "--params", p(&path)]);
            let res = SpeResult::from_json(&stdout(&out)).unwrap();
            res.validate_invariants(&params).unwrap();
        }
    }
}

#[test]
fn invalid_params_exit_one() {
    let dir = TempDir::new().unwrap();
    let weak = write(&dir, "weak.json", r#"{"beta1": 3, "beta2": 4, "E1": 5, "E2": 3, "r": 2, "t_o": 10}"#);
    let out = run(&["solve", "--mode", "dt", "--params", p(&weak)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("beta1"));

    let half = write(
        &dir,
        "half.json",
        r#"{"beta1": 4.5, "beta2": 4, "E1": 5, "E2": 3, "r": 2, "t_o": 10, "w": 0.5}"#,
    );
    assert_eq!(run(&["solve", "--mode", "ct", "--params", p(&half)]).status.code(), Some(1));
    assert_eq!(run(&["solve", "--mode", "sfg", "--params", p(&half)]).status.code(), Some(0));
    assert_eq!(run(&["solve", "--mode", "dt", "--params", "missing.json"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    let ex1 = write(&dir, "ex1.json", EX1);
    assert_eq!(run(&["sweep", "--params", p(&ex1), "--range", "5", "--step", "1"]).status.code(), Some(1));
    assert_eq!(run(&["sweep", "--params", p(&ex1), "--range", "3:1", "--step", "1"]).status.code(), Some(1));
    assert_eq!(run(&["verify", "--mode", "dt", "--trials", "0"]).status.code(), Some(1));
}

#[test]
fn verify_random_discrete() {
    let out = run(&["verify", "--mode", "dt", "--trials", "200", "--seed", "0"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).starts_with("200/200 exact matches\n"));
}

#[test]
fn verify_known_tie_instance_notes_the_tie() {
    let dir = TempDir::new().unwrap();
    let ex1 = write(&dir, "ex1.json", EX1);
    let out = run(&["verify", "--mode", "dt", "--params", p(&ex1)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("follower tie at t1 = 8: {7, 9}"));
}

#[test]
fn verify_continuous_and_strict_small_batches() {
    let out = run(&["verify", "--mode", "ct", "--trials", "5", "--step", "0.015625"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let out = run(&["verify", "--mode", "sfg", "--trials", "10", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["passed"], 10);
}

#[test]
fn verify_mismatch_exits_two() {
    // on the window boundary both continuous outcomes share t1 = 7; the
    // leader-favourable oracle keeps only the trailing one
    let dir = TempDir::new().unwrap();
    let edge = write(&dir, "edge.json", r#"{"beta1": 40, "beta2": 4, "E1": 4.25, "E2": 3, "r": 2, "t_o": 10}"#);
    let out = run(&["verify", "--mode", "ct", "--params", p(&edge), "--step", "0.0625"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).contains("first failure"));
}

#[test]
fn sweep_rows_and_determinism() {
    let dir = TempDir::new().unwrap();
    let ex1 = write(&dir, "ex1.json", EX1);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let args = |out: &Path| {
        vec![
            "sweep".to_string(),
            "--params".into(),
            p(&ex1).into(),
            "--range".into(),
            "0.05:6".into(),
            "--step".into(),
            "0.05".into(),
            "--out".into(),
            p(out).into(),
        ]
    };
    let a_args = args(&a);
    assert_eq!(run(&a_args.iter().map(String::as_str).collect::<Vec<_>>()).status.code(), Some(0));
    let mut b_args = args(&b);
    b_args.push("--sequential".into());
    assert_eq!(run(&b_args.iter().map(String::as_str).collect::<Vec<_>>()).status.code(), Some(0));
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 121);
    assert_eq!(
        lines[0],
        "delta_e,case_ct,case_dt,case_sfg,ct_t1,ct_t2,dt_t1,dt_t2,sfg_t1,sfg_t2,dt_flock,ct_exists"
    );
    assert!(lines[4].starts_with("0.2,CT-1,DT-1,SFG-coop,"));
}

#[test]
fn boundaries_json() {
    let dir = TempDir::new().unwrap();
    let ex1 = write(&dir, "ex1.json", EX1);
    let out = run(&["boundaries", "--params", p(&ex1), "--range", "1:1000", "--tol", "1e-9"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["a"].as_array().unwrap().len(), 1);
    assert_eq!(v["b"].as_array().unwrap().len(), 9);
    assert!((v["gate"].as_f64().unwrap() - 3.0).abs() < 1e-8);
    assert_eq!(v["tol"], 1e-9);

    let out = run(&["boundaries", "--params", p(&ex1), "--range", "1:1000", "--reading", "typeset"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["a"].as_array().unwrap().len(), 5);
    assert_eq!(v["b"].as_array().unwrap().len(), 5);

    assert_eq!(run(&["boundaries", "--params", p(&ex1), "--range", "0.5:10"]).status.code(), Some(1));
}

#[test]
fn compare_reproduces_table_rows() {
    let dir = TempDir::new().unwrap();
    let ex1 = write(&dir, "ex1.json", EX1);
    let b40 = write(&dir, "b40.json", EX1_BETA40);
    let out = run(&["compare", "--params", p(&ex1), "--params", p(&b40)]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows[0][..6], ["StrictFlocking", "yes", "yes", "2", "possible", "yes"]);
    assert_eq!(rows[1][..6], ["Continuous", "no", "no", "3", "never", "yes"]);
    assert_eq!(rows[2][..6], ["Discrete", "yes", "no", "5", "possible", "no"]);
}

#[test]
fn oracle_solve_and_table_dump() {
    let dir = TempDir::new().unwrap();
    let ex1 = write(&dir, "ex1.json", EX1);
    let table = dir.path().join("table.csv");
    let out = run(&[
        "solve", "--mode", "dt", "--params", p(&ex1), "--oracle", "--tie", "all-supportable", "--table", p(&table),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["mode"], "AllSupportable");
    assert_eq!(v["maxmin_u1"], 2.0);
    let times: Vec<(f64, f64)> = v["outcomes"]
        .as_array()
        .unwrap()
        .iter()
        .map(|o| (o["t1"].as_f64().unwrap(), o["t2"].as_f64().unwrap()))
        .collect();
    assert_eq!(times, vec![(7.0, 8.0), (8.0, 9.0), (10.0, 9.0)]);
    let csv = std::fs::read_to_string(&table).unwrap();
    assert!(csv.starts_with("t1,br_times,br_utility\n"));
    assert!(csv.contains("\n8,7;9,1.75\n"));
}
