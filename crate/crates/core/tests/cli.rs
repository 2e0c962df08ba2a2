use std::path::PathBuf;

use horizonforge::cli::run_captured;
use horizonforge::io::ProfileDocument;
use serde_json::Value;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name).display().to_string()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("horizonforge-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn error_kind(stderr: &str) -> (String, String) {
    let v: Value = serde_json::from_str(stderr.trim()).expect("stderr is one JSON object");
    (v["error"].as_str().unwrap().to_string(), v["message"].as_str().unwrap().to_string())
}

#[test]
fn lambda1_of_round_sphere_at_half() {
    let m = data("round_s2.json");
    let (code, out, err) = run_captured(&["lambda1", "--metric", &m, "--k", "0.5"]);
    assert_eq!(code, 0, "{err}");
    let v: Value = serde_json::from_str(&out).unwrap();
    let l = v["lambda1"].as_f64().unwrap();
    assert!((l - 1.0).abs() <= 1e-9, "lambda1 = {l}");
    assert_eq!(v["in_strict"], Value::Bool(true));
}

#[test]
fn lambda1_check_mode_passes() {
    let m = data("bumpy_s2.json");
    let (code, out, _) = run_captured(&["--check", "lambda1", "--metric", &m, "--k", "0.5"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.lines().last().unwrap().starts_with("summary"));
    assert!(out.lines().filter(|l| l.starts_with("FAIL")).count() == 0);
}

#[test]
fn bartnik_sequence_writes_masses() {
    let csv = scratch("masses.csv");
    let h = data("round_s2.json");
    let (code, out, err) = run_captured(&[
        "bartnik-sequence",
        "--horizon",
        &h,
        "--eps-count",
        "12",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    let text = std::fs::read_to_string(&csv).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 12);
    let v: Value = serde_json::from_str(&out).unwrap();
    let last = v["final_mass"].as_f64().unwrap();
    assert!((0.5 - 1e-9..=0.5 + 1e-3).contains(&last), "final mass {last}");
}

#[test]
fn unknown_flag_is_a_validation_error() {
    let (code, _, err) = run_captured(&["lambda1", "--metirc", "x.json"]);
    assert_eq!(code, 2);
    assert_eq!(error_kind(&err).0, "validation");
}

#[test]
fn missing_file_is_a_validation_error() {
    let (code, _, err) = run_captured(&["lambda1", "--metric", "/nonexistent/profile.json"]);
    assert_eq!(code, 2);
    assert!(error_kind(&err).1.contains("/nonexistent/profile.json"));
}

#[test]
fn malformed_config_key_names_the_key() {
    let cfg = scratch("bad.json");
    std::fs::write(&cfg, r#"{"command":"lambda1","args":{"metric":"x.json"},"tolerence":{}}"#).unwrap();
    let (code, _, err) = run_captured(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(error_kind(&err).1.contains("tolerence"), "{err}");
}

#[test]
fn unknown_tolerance_key_is_named() {
    let cfg = scratch("badtol.json");
    let m = data("round_s2.json");
    std::fs::write(&cfg, format!(r#"{{"command":"lambda1","args":{{"metric":"{m}"}},"tolerances":{{"membrship":1e-6}}}}"#)).unwrap();
    let (code, _, err) = run_captured(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(error_kind(&err).1.contains("membrship"), "{err}");
}

#[test]
fn iteration_cap_reports_non_convergence() {
    let cfg = scratch("cap.json");
    let m = data("dumbbell_s2.json");
    std::fs::write(
        &cfg,
        format!(r#"{{"command":"lambda1","args":{{"metric":"{m}","k":0.5}},"tolerances":{{"max_iterations":1,"eigen_residual":0}}}}"#),
    )
    .unwrap();
    let (code, _, err) = run_captured(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 3, "{err}");
    assert_eq!(error_kind(&err).0, "non_convergence");
}

#[test]
fn run_config_matches_direct_invocation() {
    let cfg = scratch("ok.json");
    let m = data("bumpy_s2.json");
    std::fs::write(&cfg, format!(r#"{{"command":"lambda1","args":{{"metric":"{m}","k":0.25}}}}"#)).unwrap();
    let a = run_captured(&["run", "--config", cfg.to_str().unwrap()]);
    let b = run_captured(&["lambda1", "--metric", &m, "--k", "0.25"]);
    assert_eq!(a, b);
}

#[test]
fn jobs_do_not_change_output() {
    let h = data("round_s2.json");
    let c1 = scratch("m1.csv");
    let c2 = scratch("m2.csv");
    let a = run_captured(&["--jobs", "1", "bartnik-sequence", "--horizon", &h, "--eps-count", "4", "--out", c1.to_str().unwrap()]);
    let b = run_captured(&["--jobs", "3", "bartnik-sequence", "--horizon", &h, "--eps-count", "4", "--out", c2.to_str().unwrap()]);
    assert_eq!(a.0, 0);
    assert_eq!(std::fs::read(&c1).unwrap(), std::fs::read(&c2).unwrap());
    let strip = |s: &str| s.lines().filter(|l| !l.contains("\"out\"")).collect::<Vec<_>>().join("\n");
    assert_eq!(strip(&a.1), strip(&b.1));
}

#[test]
fn every_data_document_round_trips() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data");
    let mut seen = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let p = entry.unwrap().path();
        let doc = ProfileDocument::read(&p).unwrap();
        let again = ProfileDocument::from_json(&doc.to_json().unwrap()).unwrap();
        assert_eq!(doc, again, "{}", p.display());
        seen += 1;
    }
    assert!(seen >= 8);
}

#[test]
fn nan_value_is_rejected_with_index() {
    let text = std::fs::read_to_string(data("round_s2.json")).unwrap();
    let mut v: Value = serde_json::from_str(&text).unwrap();
    v["values"][17] = Value::Null;
    let err = ProfileDocument::from_json(&v.to_string()).unwrap_err().to_string();
    assert!(err.contains("values[17]"), "{err}");
}

#[test]
fn old_schema_version_is_unsupported() {
    let text = std::fs::read_to_string(data("round_s2.json")).unwrap();
    let mut v: Value = serde_json::from_str(&text).unwrap();
    v["schema_version"] = Value::from(0);
    let err = ProfileDocument::from_json(&v.to_string()).unwrap_err().to_string();
    assert!(err.contains("unsupported schema_version 0"), "{err}");
}

#[test]
fn glue_check_on_shipped_bands() {
    let (code, out, err) = run_captured(&["--check", "glue", "--inner", &data("inner_band.json"), "--outer", &data("outer_band.json")]);
    assert_eq!(code, 0, "{out}{err}");
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_horizonforge");
    let ok = std::process::Command::new(bin).args(["lambda1", "--metric", &data("round_s2.json")]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let bad = std::process::Command::new(bin).args(["frobnicate"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    let v: Value = serde_json::from_slice(&bad.stderr).unwrap();
    assert_eq!(v["error"], "validation");
}
