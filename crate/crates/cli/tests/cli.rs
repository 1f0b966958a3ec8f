use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_igs-lab"))
}

fn specs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../specs")
}

fn run(args: &[&str], out: &Path) -> Output {
    bin().args(args).arg("--out").arg(out).output().unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn validate_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["diamond", "path2", "theta22", "theta(3,2)"] {
        assert_eq!(run(&["validate", "--preset", name], dir.path()).status.code(), Some(0), "{name}");
    }
    let r = json(&dir.path().join("validate.json"));
    assert_eq!(r["passed"], true);
    let loop_spec = specs().join("loop.toml");
    let o = run(&["validate", loop_spec.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
    assert_eq!(run(&["validate", "--preset", "nope"], dir.path()).status.code(), Some(2));
    assert_eq!(run(&["validate", "--spec", "/nonexistent.toml"], dir.path()).status.code(), Some(2));
}

#[test]
fn spec_file_matches_preset() {
    let dir = tempfile::tempdir().unwrap();
    let spec = specs().join("diamond.toml");
    assert!(run(&["solve", "--spec", spec.to_str().unwrap(), "--p", "2"], dir.path()).status.success());
    let from_file = std::fs::read(dir.path().join("constants.json")).unwrap();
    assert!(run(&["solve", "--preset", "diamond", "--p", "2"], dir.path()).status.success());
    assert_eq!(from_file, std::fs::read(dir.path().join("constants.json")).unwrap());
}

#[test]
fn solve_constants() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run(&["solve", "--preset", "diamond", "--p", "2"], dir.path()).status.success());
    let c = json(&dir.path().join("constants.json"));
    assert!((c[0]["m_p"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-9);
    assert!(run(&["solve", "--preset", "path2", "--p", "3", "--format", "csv"], dir.path()).status.success());
    let csv = std::fs::read_to_string(dir.path().join("constants.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().contains(",0.25,"), "{csv}");
    assert_eq!(run(&["solve", "--p", "1.0"], dir.path()).status.code(), Some(2));
    assert_eq!(run(&["solve", "--tol", "bogus=1"], dir.path()).status.code(), Some(2));
    assert!(run(&["solve", "--preset", "diamond", "--p", "3", "--level", "3"], dir.path()).status.success());
    let s = json(&dir.path().join("solve.json"));
    assert!((s[0]["scaling_ratio"].as_f64().unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn classify_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run(&["classify", "--preset", "diamond", "--p", "2", "--p", "3"], dir.path()).status.success());
    let r = json(&dir.path().join("classify.json"));
    assert_eq!(r["cross_p"][0]["singular"], true);
    assert_eq!(r["sobolev"][0]["verdict"], "singular");
    assert!(run(&["classify", "--preset", "theta22", "--p", "2", "--p", "3"], dir.path()).status.success());
    let r = json(&dir.path().join("classify.json"));
    assert_eq!(r["sobolev"][0]["verdict"], "not-singular");
    assert!(run(&["classify", "--preset", "path2"], dir.path()).status.success());
    let r = json(&dir.path().join("classify.json"));
    for e in r["per_p"].as_array().unwrap() {
        assert_eq!(e["vs_reference"], "absolutely-continuous");
    }
}

#[test]
fn export_formats() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run(&["export", "--preset", "diamond", "--level", "3", "--format", "svg"], dir.path()).status.success());
    let svg = std::fs::read_to_string(dir.path().join("g3.svg")).unwrap();
    assert_eq!(svg.matches("<line").count(), 216);
    assert!(run(&["export", "--level", "0", "--format", "dot"], dir.path()).status.success());
    let dot = std::fs::read_to_string(dir.path().join("g0.dot")).unwrap();
    assert_eq!(dot.matches(" -- ").count(), 1);
    assert_eq!(dot.matches("label=").count(), 3);
    assert!(run(&["export", "--preset", "path2", "--level", "2", "--format", "dot", "--format", "json"], dir.path()).status.success());
    let dot = std::fs::read_to_string(dir.path().join("g2.dot")).unwrap();
    assert_eq!(dot.matches(" -- ").count(), 4);
    assert_eq!(json(&dir.path().join("g2.json"))["edges"].as_array().unwrap().len(), 4);
    let theta = specs().join("theta22.toml");
    assert!(run(&["export", "--spec", theta.to_str().unwrap(), "--format", "svg"], dir.path()).status.success());
}

#[test]
fn unwritable_output_is_an_io_failure() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("plain-file");
    std::fs::write(&file, "x").unwrap();
    let o = run(&["export", "--preset", "path2"], &file);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn thread_variable_is_checked() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .args(["validate", "--preset", "path2", "--out"])
        .arg(dir.path())
        .env("IGS_LAB_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn report_sections() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run(&["report", "--preset", "theta22", "--level", "2"], dir.path()).status.success());
    let r = json(&dir.path().join("report.json"));
    assert!(r["constants"].as_array().unwrap().iter().all(|c| c["dwp_equals_p"] == true));
    assert!(r["checks"]["checks"].as_array().unwrap().iter().all(|c| c["passed"] == true));
    assert_eq!(r["slln"]["verdict"], "not-separated");
}
