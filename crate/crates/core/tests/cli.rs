//! End-to-end checks of the `curvsym` binary: exit codes, determinism and
//! the file/catalog cross-check.

use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn curvsym(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_curvsym")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("valid JSON on stdout")
}

fn sol_file() -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/sol.metric").display().to_string()
}

#[test]
fn analyze_sol_is_pseudo_symmetric_with_l_minus_one() {
    let out = curvsym(&["analyze", "--metric", "sol", "--points", "20", "--planes", "50", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = json(&out);
    let keys: Vec<&str> = doc.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(keys, ["metric", "params", "mode", "seed", "points", "per_point", "aggregate", "suite"]);
    let agg = &doc["aggregate"];
    assert_eq!(agg["flags"]["pseudo_symmetric"], Value::Bool(true));
    assert_eq!(agg["flags"]["semi_symmetric"], Value::Bool(false));
    let l = agg["l_r"]["mean"].as_f64().unwrap();
    assert!((l + 1.0).abs() <= 1e-8, "{l}");
    assert_eq!(doc["per_point"].as_array().unwrap().len(), 20);
}

#[test]
fn analyze_euclidean_is_flat_everywhere() {
    let out = curvsym(&["analyze", "--metric", "euclidean", "--dim", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    for r in doc["per_point"].as_array().unwrap() {
        assert_eq!(r["flags"]["flat"], Value::Bool(true));
    }
}

#[test]
fn spec_file_matches_catalog_byte_for_byte() {
    let a = curvsym(&["analyze", "--metric", &sol_file(), "--seed", "3"]);
    let b = curvsym(&["analyze", "--metric", "sol", "--seed", "3"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn repeated_runs_are_identical() {
    let args = ["analyze", "--metric", "thurston", "--param", "m=-0.25", "--param", "l=1", "--seed", "9"];
    assert_eq!(curvsym(&args).stdout, curvsym(&args).stdout);
}

#[test]
fn floats_carry_seventeen_significant_digits() {
    let out = curvsym(&["analyze", "--metric", "sol", "--points", "1", "--planes", "1"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\"mean\": -1.0000000000000000e0"), "{text}");
}

#[test]
fn verify_passes_on_sol_and_euclidean() {
    for m in ["sol", "euclidean"] {
        let out = curvsym(&["verify", "--metric", m, "--points", "5"]);
        assert_eq!(out.status.code(), Some(0), "{m}");
        let doc = json(&out);
        let rows = doc["suite"].as_array().unwrap();
        assert!(rows.iter().any(|r| r["name"] == "first_bianchi"));
        assert!(rows.iter().all(|r| r["pass"] == Value::Bool(true)));
        if m == "euclidean" {
            assert!(rows.iter().all(|r| r["max_residual"].as_f64().unwrap() < 1e-14));
        }
    }
}

#[test]
fn coarse_fd_step_fails_verification() {
    let out = curvsym(&["verify", "--metric", "sol", "--mode", "fd", "--fd-step", "1e-1"]);
    assert_ne!(out.status.code(), Some(0));
    assert!(!out.stderr.is_empty());
}

#[test]
fn catalog_table_passes() {
    let out = curvsym(&["catalog", "--points", "5", "--planes", "10"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    let rows = doc["suite"].as_array().unwrap();
    let sol = rows.iter().find(|r| r["entry"] == "Sol").unwrap();
    assert!((sol["measured"].as_f64().unwrap() + 1.0).abs() <= 1e-8);
    let s2 = rows.iter().find(|r| r["entry"] == "S2xE1").unwrap();
    assert_eq!(s2["flags"]["semi_symmetric"], Value::Bool(true));
    assert_eq!(s2["measured"].as_f64(), Some(0.0));
    let e3 = rows.iter().find(|r| r["entry"] == "E3").unwrap();
    assert_eq!(e3["flags"]["flat"], Value::Bool(true));
}

#[test]
fn squaroid_csv_has_header_and_rows() {
    let out = curvsym(&["squaroid", "--metric", "space_form", "--dim", "2", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("kind,epsilon,delta,estimate,reference"));
    assert_eq!(lines.count(), 7);
}

#[test]
fn wintgen_reads_a_shape_operator_document() {
    let dir = std::env::temp_dir().join(format!("curvsym-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("ops.json");
    std::fs::write(&path, r#"{"ambient_c": 0.0, "operators": [[[1, 0], [0, 1]]]}"#).unwrap();
    let out = curvsym(&["wintgen", "--input", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let row = &json(&out)["suite"][0];
    // totally umbilical: rho = H^2, no normal curvature
    assert_eq!(row["rho"].as_f64(), Some(1.0));
    assert_eq!(row["h2"].as_f64(), Some(1.0));
    assert_eq!(row["rho_perp"].as_f64(), Some(0.0));
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn errors_exit_with_one() {
    for args in [
        &["analyze", "--metric", "nosuch"][..],
        &["analyze", "--metric", "./missing.metric"],
        &["analyze", "--metric", "thurston"],
        &["analyze", "--metric", "sol", "--points", "0"],
        &["analyze", "--bogus"],
    ] {
        let out = curvsym(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(out.stdout.is_empty(), "{args:?}");
    }
}

#[test]
fn parse_errors_name_the_position() {
    let dir = std::env::temp_dir().join(format!("curvsym-parse-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bad.metric");
    std::fs::write(&path, "dim 2\ncoords x y\ng 0 0 = 1 +\ng 1 1 = 1\n").unwrap();
    let out = curvsym(&["analyze", "--metric", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn out_flag_writes_the_report() {
    let dir = std::env::temp_dir().join(format!("curvsym-out-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("r.json");
    let out = curvsym(&["analyze", "--metric", "sol", "--points", "2", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc["metric"], "sol");
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn near_threshold_fits_exit_with_two() {
    // difference-quotient noise puts the strict pseudo-symmetry fit within
    // a decade of its threshold
    let out = curvsym(&["analyze", "--metric", "sol", "--mode", "fd", "--tol", "strict", "--points", "5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("near threshold"));
    assert!(!json(&out)["aggregate"]["diagnostics"].as_array().unwrap().is_empty());
}
