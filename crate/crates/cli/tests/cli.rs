use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_prism-fosls")).args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("prism-fosls-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    dir
}

#[test]
fn lists_problems() {
    let out = bin(&["--list-problems"]);
    assert!(out.status.success());
    let s = String::from_utf8(out.stdout).unwrap();
    assert_eq!(s.lines().count(), 7);
    assert!(s.lines().any(|l| l == "2d-boundary-edge"));
}

#[test]
fn deterministic_runs_write_identical_files() {
    let a = scratch("a");
    let b = scratch("b");
    for dir in [&a, &b] {
        let out = bin(&[
            "--problem",
            "1d-boundary-sqrt",
            "--mode",
            "adaptive",
            "--max-dofs",
            "2000",
            "--deterministic",
            "-q",
            "--out",
            dir.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let ca = fs::read(a.join("history.csv")).unwrap();
    assert_eq!(ca, fs::read(b.join("history.csv")).unwrap());
    assert_eq!(fs::read(a.join("convergence.svg")).unwrap(), fs::read(b.join("convergence.svg")).unwrap());
    let csv = String::from_utf8(ca).unwrap();
    assert!(csv.starts_with("step,dofs,estimator,wall_time\n"));
    let last = csv.lines().last().unwrap();
    assert!(last.ends_with(",0.0000000000000000e0"));
    let dofs: usize = last.split(',').nth(1).unwrap().parse().unwrap();
    assert!(dofs <= 2000);
    let _ = fs::remove_dir_all(&a);
    let _ = fs::remove_dir_all(&b);
}

#[test]
fn smooth_run_reports_the_error() {
    let dir = scratch("smooth");
    let out = bin(&["--problem", "1d-smooth", "--mode", "uniform", "--max-dofs", "1000", "-q", "--out", dir.to_str().unwrap()]);
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.join("history.csv")).unwrap();
    assert!(csv.starts_with("step,dofs,estimator,error_u,wall_time\n"));
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("fitted rate"));
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn rejects_bad_input() {
    assert!(!bin(&["--problem", "2d-nonmatching", "--mesh", "simplex"]).status.success());
    assert!(!bin(&["--problem", "1d-smooth", "--dim", "2"]).status.success());
    assert!(!bin(&["--problem", "nope"]).status.success());
    assert!(!bin(&["--problem", "1d-smooth", "--theta", "1.5"]).status.success());
    assert!(!bin(&[]).status.success());
}
