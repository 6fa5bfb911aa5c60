use std::fs;
use std::path::Path;
use std::process::Command;

use modal_lab::cli::run;
use modal_lab::complexity::CounterexampleCertificate;

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("modal-lab").chain(args.iter().copied());
    let code = run(argv.map(std::ffi::OsString::from), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

const MOMENTS: &str = r#"
description = "moment pair"

[[rows]]
y_coeffs = [0.0, 1.0]
r_coeffs = [[0.0, 1.0], []]

[[rows]]
y_coeffs = [0.0, 0.0, 1.0]
r_coeffs = [[], [0.0, 1.0]]
"#;

const NO_ROOT: &str = r#"
description = "y^2 + r^2 + 1"

[[rows]]
y_coeffs = [1.0, 0.0, 1.0]
r_coeffs = [[0.0, 0.0, -1.0]]
"#;

const TIE: &str = r#"
family = "gaussian"
weights = [0.5, 0.5]

[[components]]
center = -3.0
sigma = 1.0

[[components]]
center = 3.0
sigma = 1.0
"#;

#[test]
fn mode_of_benchmark() {
    let (code, out, _) = call(&["mode"]);
    assert_eq!(code, 0);
    assert!(out.contains("-1.98704"), "{out}");
}

#[test]
fn tied_modes_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "tie.toml", TIE);
    assert_eq!(call(&["mode", "--config", &path]).0, 4);
}

#[test]
fn missing_root_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "v.toml", NO_ROOT);
    let (code, _, err) = call(&["counterexample", "--config", &path]);
    assert_eq!(code, 3, "{err}");
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(call(&["frobnicate"]).0, 64);
    assert_eq!(call(&["modal-midpoint", "--eps", "-1"]).0, 64);
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "v.toml", MOMENTS);
    assert_eq!(call(&["counterexample", "--config", &path, "--t", "2"]).0, 64);
    assert_eq!(call(&["mode", "--config", "/nonexistent/density.toml"]).0, 2);
}

#[test]
fn counterexample_certificate_file() {
    let dir = tempfile::tempdir().unwrap();
    let v = write(dir.path(), "v.toml", MOMENTS);
    let cert = dir.path().join("cert.json");
    let (code, out, err) = call(&["counterexample", "--config", &v, "--out", cert.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    assert!(!out.is_empty());
    let c = CounterexampleCertificate::from_json(&fs::read_to_string(&cert).unwrap()).unwrap();
    assert_eq!(c.t, 3);
    assert_ne!(c.ball_original, c.ball_perturbed);
}

#[test]
fn table_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let args = ["table1", "--trials", "20", "--n", "200", "--seed", "9", "--out", path.to_str().unwrap()];
        assert_eq!(call(&args).0, 0);
    }
    let text = fs::read(&a).unwrap();
    assert_eq!(text, fs::read(&b).unwrap());
    let header = String::from_utf8(text).unwrap();
    assert_eq!(header.lines().count(), 7);
}

#[test]
fn claims_and_variance_demos_pass() {
    assert_eq!(call(&["claims-check", "--trials", "50"]).0, 0);
    assert_eq!(call(&["demo-variance", "--trials", "20"]).0, 0);
    assert_eq!(call(&["demo-lemma1"]).0, 0);
}

#[test]
fn binary_reports_help_and_errors() {
    let bin = env!("CARGO_BIN_EXE_modal-lab");
    let help = Command::new(bin).arg("--help").output().unwrap();
    assert_eq!(help.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&help.stdout).contains("counterexample"));
    let bad = Command::new(bin).args(["mode", "--bogus"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(64));
}
