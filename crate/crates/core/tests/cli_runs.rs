use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_dualnls");

const GOLDEN: &str = r#"{"m": 1, "k": 1, "chi1": 1, "chi2": 2, "omega1": -1, "omega2": 1,
    "xi1": 0, "xi3": 1, "xi4": 1, "tau0": 1}"#;

const GRID: &str = r#"{"x_min": -2, "x_max": 2, "nx": 9, "y_min": -2, "y_max": 2, "ny": 9,
    "t_min": 0, "t_max": 1, "nt": 3}"#;

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn key(report: &str, k: &str) -> String {
    report
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{k}=")))
        .unwrap_or_else(|| panic!("{k} missing from\n{report}"))
        .to_string()
}

fn read_rows(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(str::to_string).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(|f| f.parse::<f64>().unwrap()).collect())
        .collect();
    (header, rows)
}

#[test]
fn derive_prints_the_coefficients() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", &format!(r#"{{"params": {GOLDEN}}}"#));
    let o = run(&["derive", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = stdout(&o);
    assert_eq!(key(&s, "tau1"), "5.5");
    assert_eq!(key(&s, "omega3"), "-1");
    let zeta0: f64 = key(&s, "zeta0").parse().unwrap();
    assert!((zeta0 + 3.0 / 121.0).abs() < 1e-16);
    let a_im: f64 = key(&s, "a_im").parse().unwrap();
    assert!((a_im - 3f64.sqrt() / 11.0).abs() < 1e-16);
}

#[test]
fn roots_and_solve_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", &format!(r#"{{"params": {GOLDEN}}}"#));
    let o = run(&["roots", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(key(&stdout(&o), "pattern"), "DoubleTwoSimple");
    let o = run(&["solve", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(key(&stdout(&o), "family"), "Q4");
}

#[test]
fn figures_are_finite_and_slices_match() {
    let dir = tempfile::tempdir().unwrap();
    for id in 1..=6u8 {
        let out = dir.path().join(format!("fig{id}.csv"));
        let o = run(&["figure", "--id", &id.to_string(), "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let (header, rows) = read_rows(&out);
        assert_eq!(header, ["x", "y", "t", "re_q", "im_q", "abs_q"]);
        assert_eq!(rows.len(), 61 * 60 * 3);
        assert!(rows.iter().all(|r| r.iter().all(|v| v.is_finite())), "figure {id}");
        if id <= 2 {
            assert!(rows.iter().any(|r| r[4].abs() > 1e-8), "figure {id} has no imaginary part");
        }

        let (sh, slice) = read_rows(&dir.path().join(format!("fig{id}_t1.csv")));
        assert_eq!(sh, ["x", "y", "re_q", "im_q", "abs_q"]);
        let plane: Vec<&Vec<f64>> = rows.iter().filter(|r| r[2] == 1.0).collect();
        assert_eq!(plane.len(), slice.len());
        for (a, b) in plane.iter().zip(&slice) {
            assert_eq!([a[0], a[1], a[3], a[4], a[5]], [b[0], b[1], b[2], b[3], b[4]]);
        }
    }
}

#[test]
fn figure_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    assert!(run(&["figure", "--id", "5", "--out", a.to_str().unwrap()]).status.success());
    assert!(run(&["figure", "--id", "5", "--out", b.to_str().unwrap()]).status.success());
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn eval_then_verify_samples_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let field = dir.path().join("field.csv");
    let cfg = write_config(
        dir.path(),
        "c.json",
        &format!(r#"{{"params": {GOLDEN}, "grid": {GRID}, "output_path": "{}"}}"#, field.display()),
    );
    let o = run(&["eval", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (_, rows) = read_rows(&field);
    assert_eq!(rows.len(), 9 * 9 * 3);

    let report = dir.path().join("report.txt");
    let direct = run(&["verify", "--config", cfg.to_str().unwrap(), "--out", report.to_str().unwrap()]);
    assert!(direct.status.success());
    let again = run(&[
        "verify",
        "--config",
        cfg.to_str().unwrap(),
        "--samples",
        field.to_str().unwrap(),
        "--out",
        report.to_str().unwrap(),
    ]);
    assert!(again.status.success());
    let (d, s) = (stdout(&direct), stdout(&again));
    let sup_d: f64 = key(&d, "sup_norm").parse().unwrap();
    let sup_s: f64 = key(&s, "sup_norm").parse().unwrap();
    assert!((sup_d - sup_s).abs() <= 1e-12, "{sup_d} vs {sup_s}");
    let mismatch: f64 = key(&s, "sample_mismatch").parse().unwrap();
    assert_eq!(mismatch, 0.0);
    let identity: f64 = key(&d, "identity_residual").parse().unwrap();
    assert!(identity < 1e-9);
    assert_eq!(fs::read_to_string(&report).unwrap(), s);
}

#[test]
fn flags_override_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", &format!(r#"{{"params": {GOLDEN}, "grid": {GRID}}}"#));
    let o = run(&["verify", "--config", cfg.to_str().unwrap(), "--fd-step", "0.1", "--stencil-order", "2"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert_eq!(key(&s, "stencil_order"), "2");
    assert_eq!(key(&s, "step").parse::<f64>().unwrap(), 0.1);
}

fn error_json(o: &Output) -> Value {
    serde_json::from_slice(o.stderr.trim_ascii()).unwrap()
}

#[test]
fn validation_failures_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = GOLDEN.replace(r#""m": 1"#, r#""m": -0.5"#);
    let cfg = write_config(dir.path(), "c.json", &format!(r#"{{"params": {bad}}}"#));
    let o = run(&["derive", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let doc = error_json(&o);
    assert_eq!(doc["error"], "InvalidParams");
    assert_eq!(doc["exit_code"], 2);

    let cfg = write_config(dir.path(), "d.json", r#"{"parms": {}}"#);
    assert_eq!(run(&["derive", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(run(&["figure", "--id", "9", "--out", "x.csv"]).status.code(), Some(2));
    assert_eq!(run(&["bogus"]).status.code(), Some(2));
}

#[test]
fn numeric_failures_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let complex = GOLDEN.replace(r#""xi1": 0"#, r#""xi1": -3"#).replace(r#""xi3": 1"#, r#""xi3": -1"#);
    let cfg = write_config(dir.path(), "c.json", &format!(r#"{{"params": {complex}}}"#));
    let o = run(&["roots", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(key(&stdout(&o), "pattern"), "Unsupported");
    let o = run(&["solve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    let doc = error_json(&o);
    assert_eq!(doc["error"], "UnsupportedPattern");
    assert_eq!(doc["exit_code"], 3);
}
