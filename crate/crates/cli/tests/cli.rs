//! End-to-end tests of the `semiharm` binary: exit codes, report formats,
//! and byte-level determinism.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_semiharm")
}

fn tmp(name: &str, body: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("semiharm-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().unwrap()
}

#[test]
fn residue_scan_passes_and_is_deterministic() {
    let scenario = tmp(
        "residue.json",
        r#"{
            "operation": "residue",
            "covering_name": "identity",
            "alpha": 1,
            "s": 0,
            "radii": [0.2, 0.3, 0.5]
        }"#,
    );
    let a = run(&["residue", "--scenario", scenario.to_str().unwrap()]);
    let b = run(&["residue", "--scenario", scenario.to_str().unwrap()]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout, "reports must be byte-identical");
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.starts_with("r,res_re,res_im,closed_form_re,closed_form_im,abs_err"));
    // Three radii rows; the flagship value -1 with 17 significant digits.
    assert_eq!(text.lines().count(), 4);
    assert!(text.contains("-1.0000000000000"));
}

#[test]
fn residue_flags_work_without_a_scenario() {
    let r = run(&["residue", "--alpha", "1", "--s", "0"]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let text = String::from_utf8(r.stdout).unwrap();
    assert!(text.contains("-1.0000000000000000e0"));
}

#[test]
fn means_writes_csv_with_contract_columns() {
    let scenario = tmp(
        "means.json",
        r#"{
            "operation": "means",
            "covering_name": "w^2-z",
            "field": "re(w)",
            "centers": [[0.0, 0.0]],
            "radii": [0.4]
        }"#,
    );
    let out_dir = std::env::temp_dir().join(format!("semiharm-out-{}", std::process::id()));
    let r = run(&[
        "means",
        "--scenario",
        scenario.to_str().unwrap(),
        "--nodes",
        "128",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let csv = std::fs::read_to_string(out_dir.join("means.csv")).unwrap();
    assert!(csv.starts_with(
        "field,cov,a,r,nu,solid_re,solid_im,spherical_re,spherical_im,gap_abs,identity_residual"
    ));
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row.len(), 11);
    assert_eq!(row[4], "2", "branch center of w^2-z has nu = 2");
}

#[test]
fn classify_exit_codes_follow_the_verdict() {
    let good = tmp(
        "classify-good.json",
        r#"{ "covering_name": "identity", "field": "re(z1)" }"#,
    );
    let bad = tmp(
        "classify-bad.json",
        r#"{ "covering_name": "identity", "field": "abs2(z1)" }"#,
    );
    let g = run(&["classify", "--scenario", good.to_str().unwrap(), "--nodes", "128"]);
    assert!(g.status.success(), "{}", String::from_utf8_lossy(&g.stderr));
    let body: serde_json::Value =
        serde_json::from_slice(&g.stdout).expect("classify emits JSON");
    assert_eq!(body["verdict"], "semi-harmonic");

    let b = run(&["classify", "--scenario", bad.to_str().unwrap(), "--nodes", "128"]);
    assert_eq!(b.status.code(), Some(1), "non-semi-harmonic must exit 1");
}

#[test]
fn non_monic_covering_is_an_input_error() {
    let scenario = tmp(
        "bad-covering.json",
        r#"{
            "covering": {
                "m": 1,
                "fiber_degree": 2,
                "coeffs": { "w^0": "-z1", "w^2": "3" },
                "base_center": [0, 0],
                "base_radius": 2.0
            },
            "field": "1"
        }"#,
    );
    let r = run(&["means", "--scenario", scenario.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("monic"));
}

#[test]
fn unknown_scenario_keys_are_rejected() {
    let scenario = tmp("unknown-key.json", r#"{ "fieldd": "1" }"#);
    let r = run(&["means", "--scenario", scenario.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(2));
}

#[test]
fn operation_mismatch_is_an_input_error() {
    let scenario = tmp("mismatch.json", r#"{ "operation": "residue" }"#);
    let r = run(&["means", "--scenario", scenario.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(2));
}

#[test]
fn escaping_radius_is_an_input_error() {
    let scenario = tmp(
        "escape.json",
        r#"{ "covering_name": "identity", "radii": [5.0] }"#,
    );
    let r = run(&["means", "--scenario", scenario.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("escapes"));
}

#[test]
fn decompose_reports_exact_parts() {
    let scenario = tmp(
        "decompose.json",
        r#"{ "operation": "decompose", "polynomial": "x1^2", "n_vars": 2 }"#,
    );
    let r = run(&["decompose", "--scenario", scenario.to_str().unwrap()]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let body: serde_json::Value = serde_json::from_slice(&r.stdout).unwrap();
    assert_eq!(body["reconstructionExact"], true);
    assert_eq!(body["parts"].as_array().unwrap().len(), 2);
    let text = body.to_string();
    assert!(text.contains("1/2"), "rational coefficients survive: {text}");
}

#[test]
fn neumann_check_passes_on_the_two_sheeted_covering() {
    let scenario = tmp(
        "neumann.json",
        r#"{ "operation": "neumann", "covering_name": "w^2-z", "polynomial": "x1^2", "samples": 60 }"#,
    );
    let r = run(&["neumann", "--scenario", scenario.to_str().unwrap()]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let body: serde_json::Value = serde_json::from_slice(&r.stdout).unwrap();
    assert_eq!(body["passed"], true);
}

#[test]
fn verify_fast_passes_and_embeds_the_traceability_table() {
    let r = run(&["verify", "--fast"]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let body: serde_json::Value = serde_json::from_slice(&r.stdout).unwrap();
    assert_eq!(body["allPassed"], true);
    let checks = body["checks"].as_array().unwrap();
    // Every module is represented in the traceability table.
    for module in [
        "covering",
        "fields",
        "quadrature",
        "means",
        "residue",
        "harmpoly",
        "classify",
        "calibration",
    ] {
        assert!(
            checks.iter().any(|c| c["module"] == module),
            "missing module {module}"
        );
    }
    assert_eq!(body["calibrations"].as_array().unwrap().len(), 2);
}
