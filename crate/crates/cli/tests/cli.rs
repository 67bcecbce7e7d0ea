use std::path::{Path, PathBuf};
use std::process::Command;

use ominv::suite::instances;
use ominv::synthesis::Problem;
use ominv_cli::commands::{plot_rows, PlotOpts, CSV_HEADER};
use ominv_cli::problem_file::{parse_problem, serialize_problem, ParseError};
use proptest::prelude::*;
use serde_json::Value;
use tempfile::TempDir;

fn problem(name: &str) -> Problem {
    instances().into_iter().find(|i| i.name == name).unwrap().problem
}

fn write_problem(dir: &Path, name: &str) -> PathBuf {
    let p = dir.join(format!("{}.json", name));
    std::fs::write(&p, serialize_problem(&problem(name))).unwrap();
    p
}

fn run(args: &[&std::ffi::OsStr]) -> (i32, Value) {
    let out = Command::new(env!("CARGO_BIN_EXE_ominv")).args(args).output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    let v = serde_json::from_str(&text).unwrap_or(Value::String(text));
    (out.status.code().unwrap(), v)
}

#[test]
fn analyze_invariant_then_check() {
    let dir = TempDir::new().unwrap();
    let p = write_problem(dir.path(), "diag2-invariant");
    let cert = dir.path().join("cert.json");
    let (code, v) = run(&["analyze".as_ref(), p.as_os_str(), "--cert".as_ref(), cert.as_os_str()]);
    assert_eq!(code, 0, "{}", v);
    assert_eq!(v["verdict"], "invariant");
    assert!(cert.exists());
    let (code, v) = run(&["check".as_ref(), cert.as_os_str(), p.as_os_str()]);
    assert_eq!(code, 0, "{}", v);
    assert_eq!(v["passed"], true);
}

#[test]
fn analyze_reports_first_hit() {
    let dir = TempDir::new().unwrap();
    let p = write_problem(dir.path(), "diag2-hits");
    let (code, v) = run(&["analyze".as_ref(), p.as_os_str()]);
    assert_eq!(code, 1);
    assert_eq!(v["verdict"], "no_invariant");
    assert_eq!(v["detail"]["reason"], "orbit_hits_f");
    assert_eq!(v["detail"]["n"], 2);
}

#[test]
fn analyze_unknown_explains_gap() {
    let dir = TempDir::new().unwrap();
    let p = write_problem(dir.path(), "dense-half-line");
    let (code, v) = run(&["analyze".as_ref(), p.as_os_str(), "--subdiv-depth".as_ref(), "6".as_ref()]);
    assert_eq!(code, 2);
    assert_eq!(v["verdict"], "unknown");
    assert!(v["detail"]["reason"].as_str().unwrap().contains("measure-zero"), "{}", v);
}

#[test]
fn tampered_certificate_fails_check() {
    let dir = TempDir::new().unwrap();
    let p = write_problem(dir.path(), "diag2-window");
    let cert = dir.path().join("cert.json");
    let (code, _) = run(&["analyze".as_ref(), p.as_os_str(), "--cert".as_ref(), cert.as_os_str()]);
    assert_eq!(code, 0);
    let mut c: Value = serde_json::from_str(&std::fs::read_to_string(&cert).unwrap()).unwrap();
    c["t0"] = Value::String("1".into());
    c["prefix"] = Value::Array(vec![]);
    std::fs::write(&cert, c.to_string()).unwrap();
    let (code, v) = run(&["check".as_ref(), cert.as_os_str(), p.as_os_str()]);
    assert_eq!(code, 1, "{}", v);
    assert_eq!(v["passed"], false);
}

#[test]
fn mismatched_certificate_is_input_error() {
    let dir = TempDir::new().unwrap();
    let p = write_problem(dir.path(), "diag2-invariant");
    let other = write_problem(dir.path(), "rotation-ball");
    let cert = dir.path().join("cert.json");
    run(&["analyze".as_ref(), p.as_os_str(), "--cert".as_ref(), cert.as_os_str()]);
    let (code, v) = run(&["check".as_ref(), cert.as_os_str(), other.as_os_str()]);
    assert_eq!(code, 3, "{}", v);
}

#[test]
fn parse_error_has_location() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("bad.json");
    std::fs::write(&p, "{\n  \"matrix\": [[\"1\"]],\n  \"initial\": [\"1\" \"2\"]\n}").unwrap();
    let (code, v) = run(&["analyze".as_ref(), p.as_os_str()]);
    assert_eq!(code, 3);
    assert!(v["error"].as_str().unwrap().contains("line 3"), "{}", v);

    match parse_problem("{\"matrix\": [[\"1\", \"0\"], [\"0\", \"x\"]], \"initial\": [\"1\", \"1\"], \"halting\": {\"atom\": {\"monomials\": [], \"rel\": \">\"}}}") {
        Err(ParseError::Field { path, .. }) => assert_eq!(path, "$.matrix[1][1]"),
        other => panic!("{:?}", other),
    }
}

#[test]
fn bad_flags_exit_with_input_code() {
    let (code, _) = run(&["analyze".as_ref(), "--no-such-flag".as_ref()]);
    assert_eq!(code, 3);
}

#[test]
fn suite_round_trips() {
    for i in instances() {
        let back = parse_problem(&serialize_problem(&i.problem)).unwrap();
        assert_eq!(back, i.problem, "{}", i.name);
        assert_eq!(back.fingerprint(), i.problem.fingerprint());
    }
}

#[test]
fn plot_writes_csv() {
    let dir = TempDir::new().unwrap();
    let p = write_problem(dir.path(), "spiral3d");
    let out = dir.path().join("plot.csv");
    let (code, _) = run(&["plot".as_ref(), p.as_os_str(), "--out".as_ref(), out.as_os_str(), "--rays".as_ref(), "2".as_ref()]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().next().unwrap(), CSV_HEADER);
    assert!(text.lines().skip(1).all(|l| l.split(',').count() == 6));
}

#[test]
fn plot_selects_coordinates() {
    let rows = plot_rows(&problem("diag2-invariant"), &PlotOpts { orbit: 3, rays: 1, t_samples: 2, coords: None }).unwrap();
    let first = rows.iter().find(|r| r.starts_with("orbit,")).unwrap();
    assert_eq!(first.split(',').count(), 6);
    assert!(first.ends_with(','), "{}", first);
    let dir = TempDir::new().unwrap();
    let p = write_problem(dir.path(), "diag2-invariant");
    let (code, _) = run(&["plot".as_ref(), p.as_os_str(), "--coords".as_ref(), "0,5".as_ref()]);
    assert_eq!(code, 3);
}

fn small_problem() -> impl Strategy<Value = Problem> {
    (1usize..=3)
        .prop_flat_map(|d| {
            let q = (-20i64..=20, 1i64..=6).prop_map(|(n, m)| ominv::Rational::new(n.into(), m.into()));
            (
                proptest::collection::vec(proptest::collection::vec(q.clone(), d), d),
                proptest::collection::vec(q, d),
                proptest::collection::vec((-9i64..=9, proptest::collection::vec(0u32..3, d)), 1..4),
                0usize..6,
            )
        })
        .prop_map(|(rows, x, terms, rel)| {
            use ominv::signdec::{Formula, MPoly, Relation};
            let d = x.len();
            let rel = [Relation::Gt, Relation::Ge, Relation::Eq, Relation::Ne, Relation::Lt, Relation::Le][rel];
            let poly = MPoly::new(d, terms.into_iter().map(|(c, e)| (c.into(), e)).collect());
            let f = Formula::Or(vec![Formula::atom(poly.clone(), rel), Formula::Not(Box::new(Formula::atom(poly, Relation::Gt)))]);
            Problem::new(ominv::algebra::matrix::Matrix::from_rows(rows), x, f).unwrap()
        })
}

proptest! {
    #[test]
    fn serialization_round_trips(p in small_problem()) {
        let back = parse_problem(&serialize_problem(&p)).unwrap();
        prop_assert_eq!(back, p);
    }
}
