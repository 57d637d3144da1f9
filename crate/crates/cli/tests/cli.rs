use std::path::PathBuf;
use std::process::Command;

use gdirac_cli::{Failure, EXIT_NUMERIC, EXIT_USAGE, EXIT_VALIDATION};
use gdirac_core::Error;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures").join(format!("{name}.json"))
}

fn gdirac(args: &[&str]) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_gdirac")).args(args).env("GDIRAC_THREADS", "2").output().unwrap();
    (out.status.code().unwrap(), out.stdout)
}

fn parse_rows(csv: &[u8]) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_reader(csv);
    r.records().map(|row| row.unwrap().iter().map(str::to_string).collect()).collect()
}

#[test]
fn model_figure_data() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("f.csv");
    let model = fixture("model_star");
    let (code, _) = gdirac(&[
        "secular", model.to_str().unwrap(), "--zmin", "-0.5", "--zmax", "0.5", "--samples", "2001", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let rows = parse_rows(&std::fs::read(&out).unwrap());
    assert_eq!(rows.len(), 2001);
    let vals: Vec<(f64, f64, f64)> =
        rows.iter().map(|r| (r[0].parse().unwrap(), r[2].parse().unwrap(), r[3].parse().unwrap())).collect();
    assert!(vals.iter().all(|&(_, re, im)| re > 0.0 && im == 0.0));
    let centre = vals[1000];
    assert_eq!(centre.0, 0.0);
    assert!((centre.1 - 2.5566729).abs() < 1e-6);
    let (zmax, fmax, _) = vals.iter().copied().fold((0.0, f64::MIN, 0.0), |a, b| if b.1 > a.1 { b } else { a });
    assert!((zmax.abs() - 0.2).abs() < 0.02 && fmax > centre.1, "max {fmax} at {zmax}");
    assert!((vals[0].1 - 16.0 / 9.0).abs() < 1e-9);
}

#[test]
fn pole_rows_are_flagged() {
    // First pole of the clamped unit segment (m = 1/2, c = 1): l k = pi/2.
    let pole = (0.25 + std::f64::consts::PI.powi(2) / 4.0).sqrt();
    let zmin = format!("{pole:?}");
    let (code, bytes) = gdirac(&[
        "secular", fixture("decoupled_segment").to_str().unwrap(), "--zmin", &zmin, "--zmax", "3", "--samples", "5",
    ]);
    assert_eq!(code, 0);
    let rows = parse_rows(&bytes);
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[0][2..], ["nan", "nan", "nan", "1"]);
    assert!(rows[1..].iter().all(|r| r[5] == "0" && r[4].parse::<f64>().unwrap().is_finite()));
}

#[test]
fn deterministic_outputs() {
    let g = fixture("corpus_2");
    let g = g.to_str().unwrap();
    let interval = fixture("interval");
    let runs: Vec<Vec<&str>> = vec![
        vec!["secular", g, "--zmin", "-3", "--zmax", "3", "--samples", "301", "--zim", "0.1"],
        vec!["report", g],
        vec!["check", g],
        vec!["form-norm", interval.to_str().unwrap(), "--theta", "0.25", "--seed", "7"],
    ];
    for args in runs {
        let (c1, a) = gdirac(&args);
        let (c2, b) = gdirac(&args);
        assert_eq!((c1, c2), (0, 0), "{args:?}");
        assert!(!a.is_empty());
        assert_eq!(a, b, "{args:?}");
    }
}

#[test]
fn report_and_check_json() {
    let (code, bytes) = gdirac(&["report", fixture("model_star").to_str().unwrap()]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
    assert_eq!(v["gap_roots"].as_array().unwrap().len(), 0);
    assert_eq!(v["essential"]["pos"][1], "inf");

    let (code, bytes) = gdirac(&["check", fixture("corpus_0").to_str().unwrap()]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
    assert_eq!(v["rank_full"], true);
    assert!(v["ab_residual"].as_f64().unwrap() <= 1e-14);

    let (code, bytes) = gdirac(&["model-star"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
    assert_eq!(v["trace_dimension"], 4);

    let (code, bytes) = gdirac(&["thresholds", fixture("model_star").to_str().unwrap()]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
    assert_eq!(v["modes"].as_array().unwrap().len(), 0);
}

#[test]
fn exit_codes() {
    assert_eq!(gdirac(&[]).0, EXIT_USAGE);
    assert_eq!(gdirac(&["secular"]).0, EXIT_USAGE);
    assert_eq!(gdirac(&["--help"]).0, 0);
    assert_eq!(gdirac(&["report", "/definitely/missing.json"]).0, EXIT_VALIDATION);
    let g = fixture("corpus_0");
    let g = g.to_str().unwrap();
    assert_eq!(gdirac(&["secular", g, "--zmin", "1", "--zmax", "0"]).0, EXIT_VALIDATION);
    assert_eq!(gdirac(&["secular", g, "--zmin", "0", "--zmax", "1", "--function", "f"]).0, EXIT_VALIDATION);
    assert_eq!(gdirac(&["form-norm", g, "--theta", "1.5"]).0, EXIT_VALIDATION);

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"edges\": 3}").unwrap();
    assert_eq!(gdirac(&["check", bad.to_str().unwrap()]).0, EXIT_VALIDATION);
}

#[test]
fn error_classes() {
    assert_eq!(Failure::from(Error::ContourCrossesCut).code(), EXIT_NUMERIC);
    assert_eq!(Failure::from(Error::KernelEmpty { sigma_min: 0.1 }).code(), EXIT_NUMERIC);
    assert_eq!(Failure::from(Error::MissingDecomposition).code(), EXIT_NUMERIC);
    assert_eq!(Failure::from(Error::BadParams).code(), EXIT_VALIDATION);
    assert_eq!(Failure::from(Error::Disconnected).code(), EXIT_VALIDATION);
    assert_eq!(Failure::from(Error::ThetaOutOfRange).code(), EXIT_VALIDATION);
}

#[test]
fn failed_output_leaves_no_partial_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let (code, _) = gdirac(&["report", "/definitely/missing.json", "--out", out.to_str().unwrap()]);
    assert_eq!(code, EXIT_VALIDATION);
    assert!(!out.exists());
    let (code, _) = gdirac(&["report", fixture("corpus_1").to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}
