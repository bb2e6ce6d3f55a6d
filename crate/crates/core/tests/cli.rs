use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn mcpriv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mcpriv")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn malformed_csv_names_line_and_column() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "bad.csv", ",0,1\n0,0.45,0.05\n1,0.05,abc\n");
    let out = mcpriv(&["measures", "--input", &input]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3") && err.contains("column 3"), "{err}");
}

#[test]
fn unnormalized_input_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "j.csv", ",0,1\n0,0.5,0.5\n1,0.5,0.5\n");
    assert_eq!(mcpriv(&["measures", "--input", &input]).status.code(), Some(2));
}

#[test]
fn measures_on_dsbs() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "dsbs.csv", ",0,1\n0,0.45,0.05\n1,0.05,0.45\n");
    let out = mcpriv(&["measures", "--input", &input, "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let rho = v["measures"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["measure"] == "rho_m_spectral")
        .and_then(|r| r["value"].as_f64())
        .unwrap();
    assert!((rho - 0.8).abs() < 1e-12, "{v}");
    assert!(v["checks"].as_array().unwrap().iter().all(|c| c["holds"] == true));
}

#[test]
fn json_input_with_values() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(
        dir.path(),
        "j.json",
        r#"{"x_alphabet": ["a", "b"], "y_alphabet": ["u", "v"], "pmf": [[0.4, 0.1], [0.1, 0.4]]}"#,
    );
    let xv = write(dir.path(), "x.csv", "-1\n1\n");
    let out = mcpriv(&["measures", "--input", &input, "--x-values", &xv]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn stable_filter_rejects_zero_epsilon() {
    let out = mcpriv(&["stable-filter", "--alpha", "1.5", "--eps-grid", "0,0.5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn stable_filter_hits_target() {
    let out = mcpriv(&["stable-filter", "--alpha", "1.5", "--eps-grid", "0.2:0.8:0.2", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let rows = v.as_object().unwrap().values().next().unwrap().as_array().unwrap();
    assert_eq!(rows.len(), 4);
    for r in rows {
        let eps = r["epsilon"].as_f64().unwrap();
        assert!((r["rho_m_at_lambda_star"].as_f64().unwrap() - eps).abs() < 1e-12);
    }
}

#[test]
fn empty_sweep_is_ok() {
    let out = mcpriv(&["bounds-sweep", "--trials", "0"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn small_sweep_holds() {
    let out = mcpriv(&["bounds-sweep", "--trials", "20", "--ratio-filters", "5", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(!json(&out)["trials"].as_array().unwrap().is_empty());
}

#[test]
fn identity_curve_is_the_diagonal() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "eq.csv", ",0,1\n0,0.5,0\n1,0,0.5\n");
    let out =
        mcpriv(&["privacy-curve", "--input", &input, "--eps-grid", "0.2,0.5", "--restarts", "8", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    for r in v["curve"].as_array().unwrap() {
        let (eps, val) = (r["epsilon"].as_f64().unwrap(), r["value"].as_f64().unwrap());
        assert!((val - eps).abs() < 1e-6, "{eps} -> {val}");
    }
}

#[test]
fn bad_grid_is_a_usage_error() {
    assert_eq!(mcpriv(&["stable-filter", "--alpha", "1", "--eps-grid", "0.5:0.1:0.1"]).status.code(), Some(2));
    assert_eq!(mcpriv(&["stable-filter", "--alpha", "1", "--eps-grid", "x"]).status.code(), Some(2));
}

#[test]
fn output_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    let args = ["stable-filter", "--alpha", "2", "--eps-grid", "0.5"];
    let stdout = mcpriv(&args).stdout;
    let mut with_file = args.to_vec();
    with_file.extend(["--output", path.to_str().unwrap()]);
    assert_eq!(mcpriv(&with_file).status.code(), Some(0));
    assert_eq!(std::fs::read(&path).unwrap(), stdout);
}
