use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use neutralgeom::residuals::ResidualReport;

fn neutralgeom(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_neutralgeom"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn read_report(path: &Path) -> ResidualReport {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn classify_nonflat_instance() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("i3.json");
    let o = neutralgeom(&[
        "classify",
        "--builtin",
        "iii-I3",
        "--grid",
        "41x41",
        "--expect",
        "quasi_minimal",
        "--expect",
        "biconservative",
        "--expect",
        "proper",
        "--expect",
        "biharmonic",
        "--expect",
        "flat=false",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = read_report(&out).verdicts.unwrap();
    assert!(v.is_quasi_minimal && v.is_biconservative && v.is_proper && v.is_biharmonic);
    assert!(!v.is_flat);
}

#[test]
fn classify_reports_verdict_failure() {
    let o = neutralgeom(&[
        "classify",
        "--builtin",
        "i-exp",
        "--grid",
        "41x41",
        "--expect",
        "biharmonic",
        "--out",
        "/dev/null",
    ]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("verdict biharmonic"));
}

#[test]
fn classify_flat_trig_instance() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ii.json");
    let o = neutralgeom(&[
        "classify",
        "--builtin",
        "ii-trig",
        "--expect",
        "flat",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    assert!(read_report(&out).verdicts.unwrap().is_flat);
}

#[test]
fn report_roundtrip_reproduces_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = neutralgeom(&[
        "classify",
        "--builtin",
        "i-st",
        "--grid",
        "9x9",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let report = read_report(&out);
    let mut again = report.clone();
    again.reaggregate();
    assert_eq!(again.verdicts, report.verdicts);
    assert_eq!(again, report);
}

#[test]
fn sample_csv_layout() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("exp.csv");
    let o = neutralgeom(&[
        "sample",
        "--builtin",
        "i-exp",
        "--grid",
        "5x5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let mut r = csv::Reader::from_path(&out).unwrap();
    let header: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(
        header,
        [
            "s",
            "t",
            "x1",
            "x2",
            "x3",
            "x4",
            "K",
            "L",
            "res_bicons",
            "res_biharm",
            "HH"
        ]
    );
    let rows: Vec<csv::StringRecord> = r.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 25);
    for row in &rows {
        assert_eq!(row[6].parse::<f64>().unwrap(), 0.0);
        assert_eq!(&row[7], "");
    }
}

#[test]
fn sample_nonflat_origin_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("i3.csv");
    let o = neutralgeom(&[
        "sample",
        "--builtin",
        "iii-I3",
        "--grid",
        "5x5",
        "--domain=-1,1,0,1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let mut r = csv::Reader::from_path(&out).unwrap();
    let origin = r
        .records()
        .map(Result::unwrap)
        .find(|row| &row[0] == "0.0" && &row[1] == "0.0")
        .unwrap();
    assert!((origin[6].parse::<f64>().unwrap() - 1.0).abs() < 1e-12);
    assert!((origin[7].parse::<f64>().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn sample_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for (path, threads) in [(&a, "1"), (&b, "3")] {
        let o = Command::new(env!("CARGO_BIN_EXE_neutralgeom"))
            .args([
                "sample",
                "--builtin",
                "ii-trig",
                "--grid",
                "11x7",
                "--out",
                path.to_str().unwrap(),
            ])
            .env("NEUTRALGEOM_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(code(&o), 0);
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn spec_file_generation_and_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.json");
    fs::write(&good, r#"{"family": "i", "psi": "s*t + t^3"}"#).unwrap();
    let out = dir.path().join("gen.json");
    let o = neutralgeom(&[
        "generate",
        "--spec",
        good.to_str().unwrap(),
        "--grid",
        "5x5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc["spec_hash"].as_str().unwrap().len(), 64);
    assert_eq!(doc["validation"]["points"].as_array().unwrap().len(), 25);

    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\"family\": \"iii\",\n \"m\": \"exp(-t)\",\n \"alpha\": [\"cos(t)\", \"sin(t)\"],\n \"a\": \"1\"}").unwrap();
    let o = neutralgeom(&["generate", "--spec", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("bad.json:3: at `alpha`"), "{err}");

    fs::write(&bad, r#"{"family": "v", "psi": "s"}"#).unwrap();
    let o = neutralgeom(&["generate", "--spec", bad.to_str().unwrap()]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown family"));
}

#[test]
fn invalid_input_exits_with_error() {
    assert_eq!(code(&neutralgeom(&["classify", "--builtin", "nope"])), 1);
    assert_eq!(
        code(&neutralgeom(&[
            "classify",
            "--builtin",
            "i-st",
            "--grid",
            "3x3"
        ])),
        1
    );
    assert_eq!(
        code(&neutralgeom(&[
            "classify",
            "--builtin",
            "i-st",
            "--tol",
            "bogus=1"
        ])),
        1
    );
    let o = Command::new(env!("CARGO_BIN_EXE_neutralgeom"))
        .args([
            "classify",
            "--builtin",
            "i-st",
            "--grid",
            "5x5",
            "--out",
            "/dev/null",
        ])
        .env("NEUTRALGEOM_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(code(&o), 1);
}

#[test]
fn tightened_tolerance_flips_a_verdict() {
    let o = neutralgeom(&[
        "classify",
        "--builtin",
        "ii-trig",
        "--grid",
        "9x9",
        "--tol",
        "biconservative=0",
        "--expect",
        "biconservative",
        "--out",
        "/dev/null",
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn finite_difference_jets_from_the_command_line() {
    let o = neutralgeom(&[
        "classify",
        "--builtin",
        "iii-I3",
        "--grid",
        "9x9",
        "--jets",
        "fd",
        "--expect",
        "biharmonic",
        "--out",
        "/dev/null",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let o = neutralgeom(&[
        "classify",
        "--builtin",
        "i-st",
        "--grid",
        "9x9",
        "--jets",
        "fd",
        "--fd-order",
        "3",
    ]);
    assert_eq!(code(&o), 1);
}

#[test]
fn selftest_prints_one_line_per_criterion() {
    let o = neutralgeom(&["selftest"]);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(
        stdout
            .lines()
            .filter(|l| l.starts_with("[PASS]") || l.starts_with("[FAIL]"))
            .count(),
        11
    );
    assert!(stdout.contains("10 of 11 criteria passed"), "{stdout}");
    assert_eq!(code(&o), 2);

    let o = neutralgeom(&["selftest", "--tol-scale", "0"]);
    assert_ne!(code(&o), 0);
}
