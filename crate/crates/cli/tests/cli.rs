use std::path::Path;
use std::process::{Command, Output};

use ddforge::sequence::PulseSequence;

fn ddforge(args: &[&str]) -> Output {
    ddforge_env(args, &[])
}

fn ddforge_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ddforge"));
    cmd.args(args).env_remove("DDFORGE_SEED");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn slope(o: &Output) -> f64 {
    let v: serde_json::Value = serde_json::from_str(&stdout(o)).unwrap();
    v["slope"].as_f64().unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_reports_counts_and_grid() {
    let out = stdout(&ddforge(&["gen", "cpmg", "--t", "1.0"]));
    assert!(out.contains("pulses: 2 "));
    assert!(out.contains("grid: D=4"));
    let out = stdout(&ddforge(&["gen", "cudd", "--m", "2", "--n", "2", "--t", "1.0"]));
    assert!(out.contains("pulses: 10 (X 2, Y 0, Z 8)"));
    let out = stdout(&ddforge(&["gen", "udd2", "--n", "1", "--t", "1.0"]));
    assert!(out.contains("pulses: 9 "));
    let out = stdout(&ddforge(&["gen", "udd", "--n", "3"]));
    assert!(out.contains("grid: not commensurate"));
}

#[test]
fn gen_writes_schedule_file() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("s.json");
    stdout(&ddforge(&["gen", "cdd_xx", "--level", "2", "--t", "2.5", "--out", path_str(&file)]));
    let seq = PulseSequence::from_json(&std::fs::read_to_string(&file).unwrap()).unwrap();
    assert_eq!(seq.total_duration(), 2.5);
    assert_eq!(seq.instants(), vec![0.25, 0.75]);
}

#[test]
fn order_slopes() {
    assert!((slope(&ddforge(&["order", "none", "--functional", "total"])) - 1.0).abs() < 0.05);
    assert!((slope(&ddforge(&["order", "udd", "--n", "3", "--functional", "flip"])) - 4.0).abs() < 0.25);
    let s = slope(&ddforge(&["order", "cpmg", "--preset", "pure_dephasing", "--functional", "dephase"]));
    assert!((s - 3.0).abs() < 0.25);
}

#[test]
fn order_csv_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let c = dir.path().join("c.csv");
    let base = ["order", "cudd", "--m", "2", "--n", "1", "--seed", "3", "--no-meta"];
    stdout(&ddforge(&[&base[..], &["--jobs", "1", "--out", path_str(&a)]].concat()));
    stdout(&ddforge(&[&base[..], &["--jobs", "4", "--out", path_str(&b)]].concat()));
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ta, tb);
    let text = String::from_utf8(ta).unwrap();
    assert!(text.starts_with("family,param,t,alpha_t,E_flip,E_dephase,E_total\n"));
    assert_eq!(text.lines().count(), 9);
    assert!(text.lines().nth(1).unwrap().starts_with("cudd,m=2;n=1,"));

    stdout(&ddforge(&["order", "cudd", "--m", "2", "--n", "1", "--seed", "3", "--out", path_str(&c)]));
    let with_meta = std::fs::read_to_string(&c).unwrap();
    assert!(with_meta.starts_with("# ddforge "));
    assert_eq!(with_meta.split_once('\n').unwrap().1, text);
}

#[test]
fn summary_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let s = dir.path().join("fit.json");
    let out = stdout(&ddforge(&["order", "cudd", "--m", "2", "--n", "2", "--summary", path_str(&s)]));
    assert_eq!(std::fs::read_to_string(&s).unwrap(), out);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["branch"], "degenerate");
    assert_eq!(v["pairwise"].as_array().unwrap().len(), 7);
}

#[test]
fn config_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"family": "udd", "n": 2, "functional": "flip"}"#).unwrap();
    let from_file = slope(&ddforge(&["order", "--config", path_str(&cfg)]));
    assert!((from_file - 3.0).abs() < 0.25);
    let overridden = slope(&ddforge(&["order", "--config", path_str(&cfg), "--n", "3"]));
    assert!((overridden - 4.0).abs() < 0.25);
}

#[test]
fn seed_layering() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("seed.json");
    std::fs::write(&cfg, r#"{"seed": 7}"#).unwrap();
    let args = ["order", "udd", "--n", "1", "--points", "4"];
    let run = |extra: &[&str], env: &[(&str, &str)]| stdout(&ddforge_env(&[&args[..], extra].concat(), env));
    let seed5 = run(&["--seed", "5"], &[]);
    let seed7 = run(&["--seed", "7"], &[]);
    assert_ne!(seed5, seed7);
    assert_eq!(run(&[], &[("DDFORGE_SEED", "5")]), seed5);
    assert_eq!(run(&["--config", path_str(&cfg)], &[("DDFORGE_SEED", "5")]), seed7);
    assert_eq!(run(&["--seed", "5", "--config", path_str(&cfg)], &[]), seed5);
    assert_eq!(ddforge_env(&args, &[("DDFORGE_SEED", "x")]).status.code(), Some(2));
}

#[test]
fn counts_and_crossover() {
    let out = stdout(&ddforge(&["counts", "--m-max", "3"]));
    for row in ["cdd,3,64,4", "cudd,3,30,4", "udd2,3,195,4"] {
        assert!(out.lines().any(|l| l == row), "{row} missing in\n{out}");
    }
    assert_eq!(ddforge(&["counts", "--m-max", "0"]).status.code(), Some(2));
    let out = stdout(&ddforge(&["crossover"]));
    assert_eq!(out.lines().next(), Some("11"));
    assert_eq!(ddforge(&["crossover", "--n-max", "10"]).status.code(), Some(2));
}

#[test]
fn exit_codes() {
    assert_eq!(ddforge(&["gen", "warp"]).status.code(), Some(2));
    assert_eq!(ddforge(&["gen", "udd"]).status.code(), Some(2));
    assert_eq!(ddforge(&["gen", "cpmg", "--t", "-1"]).status.code(), Some(2));
    assert_eq!(ddforge(&["bogus"]).status.code(), Some(2));
    assert_eq!(ddforge(&["order", "udd", "--n", "2", "--at-max", "1.5", "--at-min", "0.5"]).status.code(), Some(3));
    assert_eq!(ddforge(&["gen", "cpmg", "--out", "/nonexistent-dir/s.json"]).status.code(), Some(4));
    assert_eq!(ddforge(&["gen", "--config", "/nonexistent-dir/c.json"]).status.code(), Some(4));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{not json").unwrap();
    assert_eq!(ddforge(&["gen", "--config", path_str(&bad)]).status.code(), Some(2));
}

#[test]
fn magnus_and_compare_tables() {
    let out = stdout(&ddforge(&["predict-magnus", "--level", "2", "--no-meta"]));
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "level,tau,alpha_tau,predicted_az_norm,extracted_az_norm,relative_deviation");
    assert_eq!(lines.len(), 4);
    let dev: f64 = lines[2].split(',').nth(5).unwrap().parse().unwrap();
    assert!(dev < 1e-2);

    let out = stdout(&ddforge(&["compare", "--no-meta", "--family", "cudd:m=2,n=2", "--family", "udd:n=2"]));
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("cudd,m=2;n=2,10,"));
    assert!(lines[2].starts_with("udd,n=2;axis=Z,2,"));
    let out = stdout(&ddforge(&["compare", "--no-meta", "--m", "2"]));
    assert_eq!(out.lines().count(), 4);
}
