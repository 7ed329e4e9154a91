use std::path::Path;
use std::process::{Command, Output};

use ckforms::liealg::{gab, AlgebraInput};
use ckforms::report::{ClassificationReport, SweepTable};
use ckforms::Rational;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ckforms")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn report(args: &[&str]) -> ClassificationReport {
    let mut full = vec!["analyze", "--format", "json"];
    full.extend_from_slice(args);
    let o = run(&full);
    assert_eq!(code(&o), 0, "stderr: {}", String::from_utf8_lossy(&o.stderr));
    ClassificationReport::from_json(&String::from_utf8(o.stdout).unwrap()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn analyze_complex_hyperbolic_family() {
    let r = report(&["--family", "gab", "--a", "1/2", "--b", "1"]);
    assert_eq!(r.theorem_case, Some(2));
    assert_eq!(r.ck_dims.unordered, [8, 1]);
    assert!(r.flags.is_einstein);
    assert_eq!(r.scalar_curvature, "-6");
}

#[test]
fn analyze_type6_is_conformally_flat() {
    let r = report(&["--family", "type6"]);
    assert_eq!(r.theorem_case, Some(1));
    assert_eq!((r.ck_dims.plus, r.ck_dims.minus), (10, 10));
}

#[test]
fn negative_parameters_need_no_equals_sign() {
    let r = report(&["--family", "gab", "--a", "-1", "--b", "1"]);
    assert_eq!(r.parameters[0].value, "-1");
}

#[test]
fn markdown_output_mentions_dimensions() {
    let o = run(&["analyze", "--family", "type3", "--alpha", "3/2"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("| dim CK+ / CK- | 10 / 10 |"), "{text}");
}

#[test]
fn json_input_matches_family() {
    let dir = tempfile::tempdir().unwrap();
    let g: ckforms::MetricLieAlgebra<Rational> = gab(Rational::new(1.into(), 2.into()), Rational::from_integer(1.into()));
    let text = serde_json::to_string(&AlgebraInput::from_algebra(&g)).unwrap();
    let path = write(dir.path(), "g.json", &text);
    let r = report(&[&path]);
    assert_eq!(r.ck_dims.unordered, [8, 1]);
    assert_eq!(r.backend, "rational");
}

#[test]
fn float_json_input_uses_float_backend() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"{"label":"e","scalars":"float","brackets":[{"i":1,"j":2,"v":["0","0.5","0","0"]}]}"#;
    let path = write(dir.path(), "f.json", text);
    let r = report(&[&path]);
    assert_eq!(r.backend, "float");
}

#[test]
fn jacobi_violation_exits_with_validation_status() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"{"label":"bad","scalars":"rational","brackets":[
        {"i":1,"j":2,"v":["0","0","1","0"]},
        {"i":1,"j":3,"v":["0","0","0","1"]},
        {"i":2,"j":3,"v":["0","1","0","0"]}]}"#;
    let path = write(dir.path(), "bad.json", text);
    let o = run(&["analyze", &path]);
    assert_eq!(code(&o), 3);
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("Jacobi") && err.contains("(e1, e2, e3)"), "{err}");
}

#[test]
fn parse_failures_exit_with_parse_status() {
    let dir = tempfile::tempdir().unwrap();
    let broken = write(dir.path(), "broken.json", "{oops");
    let short = write(dir.path(), "short.json", r#"{"brackets":[{"i":1,"j":2,"v":["0","1"]}]}"#);
    let range = write(dir.path(), "range.json", r#"{"brackets":[{"i":1,"j":5,"v":["0","1","0","0"]}]}"#);
    for args in [
        vec!["analyze", broken.as_str()],
        vec!["analyze", short.as_str()],
        vec!["analyze", range.as_str()],
        vec!["analyze", "--family", "gab", "--a", "1"],
        vec!["analyze", "--family", "gab", "--a", "x", "--b", "1"],
        vec!["analyze", "--family", "type6", "--a", "1"],
        vec!["analyze", "--family", "gab", "--a", "5e-1", "--b", "1", "--backend", "rational"],
        vec!["analyze"],
        vec!["analyze", "/nonexistent/file.json"],
    ] {
        assert_eq!(code(&run(&args)), 2, "{args:?}");
    }
}

#[test]
fn invalid_family_parameter_is_a_validation_error() {
    assert_eq!(code(&run(&["analyze", "--family", "type2", "--c", "0"])), 3);
}

#[test]
fn marginal_float_rank_exits_with_confidence_status() {
    let o = run(&["analyze", "--family", "gab", "--a", "2", "--b", "1", "--backend", "float", "--tol", "1e-3"]);
    assert_eq!(code(&o), 4);
    assert!(String::from_utf8(o.stderr).unwrap().contains("warning"));
}

#[test]
fn output_is_deterministic() {
    let args = ["analyze", "--family", "gab", "--a", "2", "--b", "1", "--format", "json", "--matrices"];
    let first = run(&args);
    assert_eq!(first.stdout, run(&args).stdout);
    let r = ClassificationReport::from_json(&String::from_utf8(first.stdout).unwrap()).unwrap();
    let m = r.killing_matrices.expect("matrices requested");
    assert_eq!(m.plus.len(), 4);
    assert_eq!(m.plus[0].len(), 10);
}

fn sweep(args: &[&str]) -> SweepTable {
    let mut full = vec!["sweep", "--format", "json"];
    full.extend_from_slice(args);
    let o = run(&full);
    assert_eq!(code(&o), 0, "stderr: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn sweep_gab_rows_follow_the_trichotomy() {
    let t = sweep(&["--family", "gab", "--a", "-1,0,1/2,1,2", "--b", "0,1"]);
    assert_eq!(t.rows.len(), 10);
    assert_eq!(t.prop_sd_violations, 0);
    for (k, row) in t.rows.iter().enumerate() {
        assert_eq!(row.index, k);
        let a = row.parameters[0].value.as_str();
        let expected = match a {
            "1/2" | "1" | "-1" => 2,
            _ => 3,
        };
        assert_eq!(row.theorem_case, Some(expected), "a = {a}");
        if a == "1/2" {
            assert_eq!(row.ck_dims, Some([8, 1]));
        }
    }
}

#[test]
fn sweep_type3_is_all_conformally_flat() {
    let t = sweep(&["--family", "type3", "--alpha", "0:1/2:3/2"]);
    assert_eq!(t.rows.len(), 4);
    assert!(t.rows.iter().all(|r| r.theorem_case == Some(1)));
}

#[test]
fn sweep_reports_row_errors_and_continues() {
    let t = sweep(&["--family", "type2", "--c", "-1,0,1"]);
    assert_eq!(t.rows.len(), 3);
    assert!(t.rows[1].error.is_some());
    assert_eq!(t.rows[2].theorem_case, Some(1));
}

#[test]
fn empty_sweep_succeeds() {
    let o = run(&["sweep", "--family", "gab", "--a", "", "--b", "0"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("| # | a | b |"), "{text}");
    assert!(text.contains("0 row(s)"));
}

#[test]
fn selftest_passes_and_catches_a_flipped_sign() {
    let ok = run(&["selftest", "--trials", "5"]);
    assert_eq!(code(&ok), 0);
    assert!(String::from_utf8(ok.stdout).unwrap().contains("selftest passed"));
    let bad = run(&["selftest", "--trials", "5", "--flip-ricci-sign"]);
    assert_eq!(code(&bad), 1);
    let out = String::from_utf8(bad.stdout).unwrap();
    assert!(out.contains("FAIL curvature-decomposition"), "{out}");
}
