use std::path::Path;
use std::process::{Command, Output};

fn hk(args: &[&str], config: Option<&str>, dir: &Path) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_hk"));
    cmd.args(args).arg("--out").arg(dir);
    if let Some(text) = config {
        let path = dir.join("run.ini");
        std::fs::write(&path, text).unwrap();
        cmd.arg("--config").arg(path);
    }
    cmd.output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

const SCALING: &str = "[run]\nsuites = scaling\nsamples = 200\n";

#[test]
fn passing_run_exits_zero_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let first = hk(&["verify-identities", "--seed", "9"], Some(SCALING), dir.path());
    assert_eq!(code(&first), 0, "{}", String::from_utf8_lossy(&first.stderr));
    let csv = dir.path().join("verify-identities.csv");
    let a = std::fs::read(&csv).unwrap();
    assert!(dir.path().join("verify-identities.json").exists());
    let second = hk(&["verify-identities", "--seed", "9"], Some(SCALING), dir.path());
    assert_eq!(code(&second), 0);
    assert_eq!(a, std::fs::read(&csv).unwrap());
    let header = String::from_utf8(a).unwrap();
    assert!(header.starts_with("schema_version,experiment,check,observed,bound,score,pass"));
}

#[test]
fn failing_check_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "[model]\nweight = 0\n[run]\nsuites = samplers\n[tolerance]\nks = 1e-9\n";
    let out = hk(&["simulate", "--paths", "1000"], Some(cfg), dir.path());
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
}

#[test]
fn bad_usage_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&hk(&["no-such-experiment"], None, dir.path())), 2);
    assert_eq!(code(&hk(&["simulate"], Some("[model]\nalpha = 3\n"), dir.path())), 2);
    assert_eq!(code(&hk(&["simulate"], Some("[bogus]\nx = 1\n"), dir.path())), 2);
    assert_eq!(code(&hk(&["simulate", "--dt", "-1"], None, dir.path())), 2);
    assert_eq!(code(&hk(&["simulate", "--paths", "many"], None, dir.path())), 2);
}

#[test]
fn envelope_table_always_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let grid = "[grids]\nt = 0.1, 1, 10\nx = 0.5, 2\ny = 0.5, 2\n";
    let out = hk(&["envelope"], Some(grid), dir.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("envelope.csv").exists());
}
