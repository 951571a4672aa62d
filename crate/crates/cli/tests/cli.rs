use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn divstab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_divstab")).args(args).output().expect("binary runs")
}

fn write_config(name: &str, body: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("divstab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn stderr_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stderr).unwrap_or_else(|e| panic!("stderr is not JSON ({e}): {}", String::from_utf8_lossy(&out.stderr)))
}

const P2: &str = r#"{"model": {"bundled": "P2"}, "tasks": TASKS}"#;

fn p2_with(tasks: &str) -> String {
    P2.replace("TASKS", tasks)
}

#[test]
fn empty_task_list_gives_empty_report() {
    let path = write_config("empty.json", &p2_with("[]"));
    let out = divstab(&["run", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v, Value::Array(vec![]));
}

#[test]
fn zero_denominator_is_a_schema_error_with_path() {
    let path = write_config("zero.json", &p2_with(r#"[{"kind": "volume", "params": {"class": ["3/0"]}}]"#));
    let out = divstab(&["run", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr_json(&out);
    assert_eq!(err["error"]["kind"], "schema");
    let p = err["error"]["path"].as_str().unwrap();
    assert!(p.starts_with("tasks[0]"), "{p}");
}

#[test]
fn unknown_task_kind_is_rejected_with_path() {
    let path = write_config("kind.json", &p2_with(r#"[{"kind": "volume", "params": {}}, {"kind": "kahler", "params": {}}]"#));
    let out = divstab(&["run", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr_json(&out);
    assert!(err["error"]["path"].as_str().unwrap().starts_with("tasks[1]"), "{err}");
    assert!(err["error"]["message"].as_str().unwrap().contains("kahler"));
}

#[test]
fn non_big_line_bundle_is_a_geometry_error() {
    let cfg = r#"{"model": {"bundled": "Bl_pP2"}, "line_bundle": [1, -1], "tasks": [{"kind": "S", "params": {"filtration": {"support": ["ord_E"], "t": [0]}}}]}"#;
    let path = write_config("notbig.json", cfg);
    let out = divstab(&["run", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stderr_json(&out)["error"]["kind"], "geometry");
}

#[test]
fn repeated_runs_are_byte_identical() {
    let a = divstab(&["run", "@blowup_p2_basics"]);
    let b = divstab(&["run", "@blowup_p2_basics"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn list_examples_names_every_bundled_config() {
    let out = divstab(&["--list-examples"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["p2_delta", "blowup_p2_probe", "p2_ma_solve", "p2_toric_finite_k"] {
        assert!(text.contains(name), "{name} missing from:\n{text}");
    }
}

#[test]
fn bundled_p2_delta_reports_the_line() {
    let out = divstab(&["run", "@p2_delta"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let reports: Value = serde_json::from_slice(&out.stdout).unwrap();
    let delta = reports.as_array().unwrap().iter().find(|r| r["kind"] == "delta").expect("a delta task");
    let value = delta["output"]["delta"].as_f64().unwrap();
    assert!(value <= 1.0 + 1e-8 && value > 0.99, "{value}");
    assert_eq!(delta["output"]["witness"], "line");
    assert!(delta["config_sha256"].as_str().unwrap().len() == 64);
    assert!(delta["toolkit"].as_str().unwrap().starts_with("divstab "));
}

#[test]
fn timings_are_opt_in() {
    let plain = divstab(&["run", "@p2_delta"]);
    assert!(!String::from_utf8_lossy(&plain.stdout).contains("wall_time_ms"));
    let timed = divstab(&["run", "@p2_delta", "--timings"]);
    let reports: Value = serde_json::from_slice(&timed.stdout).unwrap();
    assert!(reports[0]["wall_time_ms"].as_f64().is_some());
}

#[test]
fn tolerance_override_reaches_the_header() {
    let out = divstab(&["run", "@p2_delta", "--tolerance-override", "quadrature=1e-11"]);
    assert!(out.status.success());
    let reports: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(reports[0]["tolerances"]["quadrature"].as_f64(), Some(1e-11));
    let bad = divstab(&["run", "@p2_delta", "--tolerance-override", "speed=3"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn output_file_matches_stdout() {
    let path = std::env::temp_dir().join(format!("divstab-out-{}.json", std::process::id()));
    let to_file = divstab(&["run", "@p2_delta", "--out", path.to_str().unwrap()]);
    assert!(to_file.status.success());
    let stdout = divstab(&["run", "@p2_delta"]).stdout;
    assert_eq!(std::fs::read(&path).unwrap(), stdout);
}
