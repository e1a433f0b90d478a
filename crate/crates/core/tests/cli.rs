use std::path::PathBuf;
use std::process::{Command, Output};

fn pencil(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../pencils").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pencilab")).args(args).output().expect("spawn pencilab")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn help_exits_zero() {
    assert_eq!(code(&run(&["--help"])), 0);
    assert_eq!(code(&run(&["verify", "--help"])), 0);
}

#[test]
fn usage_errors_exit_two() {
    let e1 = pencil("e1.json");
    assert_eq!(code(&run(&["polygon", e1.to_str().unwrap(), "--no-such-flag"])), 2);
    assert_eq!(code(&run(&["frobnicate"])), 2);
    assert_eq!(code(&run(&["polygon", "/nonexistent/pencil.json"])), 2);
    assert_eq!(code(&run(&["polygon", pencil("bad.json").to_str().unwrap()])), 2);
}

#[test]
fn bad_grid_exits_two() {
    let e1 = pencil("e1.json");
    let o = run(&["verify", e1.to_str().unwrap(), "--suite", "polygon", "--lambda0", "-1"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn e1_degeneration_line() {
    let o = run(&["degeneration", pencil("e1.json").to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("Q(τ)=τ²+1; upper roots: i; regular degeneration: YES; k1=1"), "{}", stdout(&o));
}

#[test]
fn e1_polygon_and_roots() {
    let e1 = pencil("e1.json");
    let o = run(&["polygon", e1.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(!stdout(&o).is_empty());
    let o = run(&["roots", e1.to_str().unwrap(), "--xi-prime", "-1", "--lambda", "2"]);
    assert_eq!(code(&o), 0);
    let o = run(&["solve", e1.to_str().unwrap(), "--xi-prime", "1", "--lambda", "1", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).expect("json output");
    assert!(!v.is_null());
}

#[test]
fn verify_all_writes_every_suite() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "verify",
        pencil("e1.json").to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
        "--grid-decades",
        "4",
    ]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    for s in ["polygon", "trace", "thm41", "asymptotics", "prop52", "halfspace"] {
        let csv = std::fs::read_to_string(dir.path().join(format!("{s}.csv"))).unwrap();
        assert!(csv.starts_with("suite,xi_prime_abs,lambda,j,l,lhs,rhs,ratio"), "{s}");
        assert!(csv.lines().count() > 1, "{s}");
    }
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert!(!summary.is_null());
}

#[test]
fn broken_pencil_fails_multiplier_suite() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "verify",
        pencil("broken.json").to_str().unwrap(),
        "--suite",
        "prop52",
        "--out",
        dir.path().to_str().unwrap(),
        "--grid-decades",
        "4",
    ]);
    assert_eq!(code(&o), 1, "{}", stdout(&o));
    assert!(dir.path().join("prop52.csv").exists());
}
