use std::path::Path;
use std::process::Command;

use serde_json::Value;

fn run(dir: &Path, config: &str, extra: &[&str]) -> (i32, String, String) {
    let cfg = dir.join("config.json");
    std::fs::write(&cfg, config).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_latspec"))
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .args(extra)
        .output()
        .unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("out/report.json")).unwrap()).unwrap()
}

fn pairs(v: &Value) -> Vec<(f64, f64)> {
    v.as_array().unwrap().iter().map(|p| (p[0].as_f64().unwrap(), p[1].as_f64().unwrap())).collect()
}

const TWO_VALUED: &str = r#"{
  "command": "spectrum",
  "operator": {"dim": 1, "laplacian": true,
    "potential": {"kind": "two_valued", "a": 0, "b": 5,
                  "gamma_minus": {"c2": 1}, "gamma_plus": {"c2": 1, "c1": 1}}}
}"#;

const JACOBI: &str = r#"{
  "command": "bands",
  "operator": {"dim": 1,
    "terms": [{"shift": [1], "coef": {"kind": "constant", "value": 1}},
              {"shift": [-1], "coef": {"kind": "constant", "value": 1}}],
    "potential": {"kind": "periodic", "period": [2], "table": [0, 3]}}
}"#;

#[test]
fn two_valued_spectrum() {
    let d = tempfile::tempdir().unwrap();
    let (code, stdout, stderr) = run(d.path(), TWO_VALUED, &[]);
    assert_eq!(code, 0, "{stderr}");
    assert!(stdout.starts_with("spectrum:"));
    let r = report(d.path());
    let sp = pairs(&r["spectrum"]);
    assert_eq!(sp.len(), 2);
    for ((lo, hi), (elo, ehi)) in sp.iter().zip([(0.0, 4.0), (5.0, 9.0)]) {
        assert!((lo - elo).abs() < 1e-12 && (hi - ehi).abs() < 1e-12);
    }
}

#[test]
fn jacobi_bands_with_csv() {
    let d = tempfile::tempdir().unwrap();
    let (code, _, stderr) = run(d.path(), JACOBI, &["--format", "csv", "--grid", "256"]);
    assert_eq!(code, 0, "{stderr}");
    let sp = pairs(&report(d.path())["spectrum"]);
    assert_eq!(sp.len(), 2);
    for ((lo, hi), (elo, ehi)) in sp.iter().zip([(-1.0, 0.0), (3.0, 4.0)]) {
        assert!((lo - elo).abs() < 1e-8 && (hi - ehi).abs() < 1e-8, "{sp:?}");
    }
    let mut rdr = csv::Reader::from_path(d.path().join("out/bands.csv")).unwrap();
    assert_eq!(rdr.headers().unwrap().iter().collect::<Vec<_>>(), ["theta_1", "band_1", "band_2"]);
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 256);
    for r in rows {
        let low: f64 = r[1].parse().unwrap();
        let high: f64 = r[2].parse().unwrap();
        assert!((-1.0 - 1e-12..=1e-12).contains(&low) && (3.0 - 1e-12..=4.0 + 1e-12).contains(&high));
    }
}

#[test]
fn malformed_config_writes_nothing() {
    let d = tempfile::tempdir().unwrap();
    let bad = r#"{"command": "spectrum",
      "operator": {"dim": 1, "laplacian": true,
        "potential": {"kind": "slowly_oscillating", "profile": "sin_sqrt", "envelope": [2, -1]}}}"#;
    let (code, _, stderr) = run(d.path(), bad, &[]);
    assert_eq!(code, 2);
    assert!(stderr.contains("envelope"), "{stderr}");
    assert!(!d.path().join("out").exists());
    let (code, _, _) = run(d.path(), r#"{"command": "spectrum", "surprise": true}"#, &[]);
    assert_eq!(code, 2);
    let (code, _, _) = run(d.path(), TWO_VALUED, &["--mode", "extremal:0"]);
    assert_eq!(code, 2);
}

#[test]
fn reports_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        assert_eq!(run(d.path(), TWO_VALUED, &["--seed", "7"]).0, 0);
    }
    let ra = std::fs::read(a.path().join("out/report.json")).unwrap();
    let rb = std::fs::read(b.path().join("out/report.json")).unwrap();
    assert_eq!(ra, rb);
    let text = String::from_utf8(ra).unwrap();
    assert!(text.contains("9.0000000000000000e0"));
}

#[test]
fn verify_free_laplacian() {
    let d = tempfile::tempdir().unwrap();
    let cfg = r#"{"command": "verify", "operator": {"dim": 1, "laplacian": true}}"#;
    let (code, stdout, stderr) = run(d.path(), cfg, &[]);
    assert_eq!(code, 0, "{stderr}");
    assert!(stdout.contains("coverage_fraction=1.000000"), "{stdout}");
    let r = report(d.path());
    assert_eq!(r["coverage_fraction"].as_f64().unwrap(), 1.0);
    assert!(r["stable_outliers"].as_array().unwrap().is_empty());
}

#[test]
fn verify_periodic_gap_is_clean() {
    let d = tempfile::tempdir().unwrap();
    let cfg = JACOBI.replace("\"bands\"", "\"verify\"");
    let (code, _, stderr) = run(d.path(), &cfg, &[]);
    assert_eq!(code, 0, "{stderr}");
    let r = report(d.path());
    assert!(r["coverage_fraction"].as_f64().unwrap() >= 0.99);
    let gap_outliers = r["stable_outliers"].as_array().unwrap().iter().filter(|v| {
        let x = v.as_f64().unwrap();
        x > 0.0 && x < 3.0
    });
    assert_eq!(gap_outliers.count(), 0);
}

#[test]
fn verify_slowly_oscillating() {
    let d = tempfile::tempdir().unwrap();
    let cfg = r#"{"command": "verify",
      "operator": {"dim": 1, "laplacian": true,
        "potential": {"kind": "slowly_oscillating", "profile": "sin_sqrt", "envelope": [-1, 2]}}}"#;
    let (code, _, stderr) = run(d.path(), cfg, &["--L", "1250", "--L", "2500", "--L", "5000"]);
    assert_eq!(code, 0, "{stderr}");
    let r = report(d.path());
    assert_eq!(pairs(&r["predicted"]), vec![(-1.0, 6.0)]);
    assert!(r["coverage_fraction"].as_f64().unwrap() >= 0.99, "{}", r["coverage_fraction"]);
}

#[test]
fn limitops_lists_checked_members() {
    let d = tempfile::tempdir().unwrap();
    let cfg = TWO_VALUED.replace("\"spectrum\"", "\"limitops\"");
    let (code, stdout, stderr) = run(d.path(), &cfg, &[]);
    assert_eq!(code, 0, "{stderr}");
    assert!(stdout.contains("checks passed"), "{stdout}");
    let r = report(d.path());
    let labels: Vec<&str> = r["members"].as_array().unwrap().iter().map(|m| m["label"].as_str().unwrap()).collect();
    assert_eq!(labels, ["interior of Λ", "gap of Λ", "left edge h", "right edge h"]);
    assert!(r["members"].as_array().unwrap().iter().all(|m| m["partial_limit_check"]["ok"] == true));
}

#[test]
fn oracle_waveguide_and_threebody_run() {
    let d = tempfile::tempdir().unwrap();
    let cfg = r#"{"command": "oracle", "operator": {"dim": 1, "laplacian": true}, "truncation": {"L": [3, 5]}}"#;
    let (code, _, stderr) = run(d.path(), cfg, &["--format", "csv"]);
    assert_eq!(code, 0, "{stderr}");
    let r = report(d.path());
    assert_eq!(r["truncations"][1]["size"], 11);
    assert!(d.path().join("out/eigenvalues.csv").exists());

    let cfg = r#"{"command": "waveguide",
      "waveguide": {"dim": 2, "minus": [0, 0], "plus": [0, 0],
                    "profiles": [{"start": 0, "middle": [-5, -5, -5], "minus": 0, "plus": 0}]}}"#;
    let (code, _, stderr) = run(d.path(), cfg, &[]);
    assert_eq!(code, 0, "{stderr}");
    let sp = pairs(&report(d.path())["spectrum"]);
    assert!(sp.iter().any(|&(lo, hi)| lo <= 0.0 && hi >= 8.0));

    let cfg = r#"{"command": "threebody", "threebody": {"m1": 1, "m2": 2}}"#;
    let (code, _, stderr) = run(d.path(), cfg, &[]);
    assert_eq!(code, 0, "{stderr}");
    let r = report(d.path());
    assert_eq!(pairs(&r["spectrum"]), vec![(0.0, 9.0)]);
}

#[test]
fn lanczos_failure_exits_with_three() {
    let d = tempfile::tempdir().unwrap();
    // a 3-D section of size 9261, tiny residual tolerance and one eigenvalue per end
    let cfg = r#"{"command": "oracle", "operator": {"dim": 3, "laplacian": true},
      "truncation": {"L": [10], "mode": "extremal:1", "residual_tol": 1e-30}}"#;
    let (code, _, stderr) = run(d.path(), cfg, &[]);
    assert_eq!(code, 3, "{stderr}");
}
