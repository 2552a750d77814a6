//! The `translator-lab` binary: outputs, exit codes and configuration.

use std::fs;
use std::path::Path;
use std::process::Command;

use serde_json::Value;
use translator_lab::cli::export::NodeTable;

fn run(out: &Path, args: &[&str]) -> (i32, String) {
    let o = Command::new(env!("CARGO_BIN_EXE_translator-lab"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap();
    (
        o.status.code().unwrap(),
        String::from_utf8_lossy(&o.stdout).into_owned(),
    )
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn closed_form_prints_the_tilted_value() {
    let dir = tempfile::tempdir().unwrap();
    let (code, stdout) = run(
        dir.path(),
        &["closed-form", "--family", "tilted", "--theta", "0.7853981634", "--eval", "2,1"],
    );
    assert_eq!(code, 0);
    let v: f64 = stdout.split_whitespace().next().unwrap().parse().unwrap();
    let exact = 2.0 * (0.5f64.sqrt()).cos().ln() + 2.0;
    assert!((v - exact).abs() < 1e-9, "{stdout}");
    let report = json(&dir.path().join("report.json"));
    let keys: Vec<_> = report.as_object().unwrap().keys().cloned().collect();
    assert_eq!(
        keys,
        ["apex", "audits", "command", "params", "residual_max", "timing_s"]
    );
    assert!(report["timing_s"].is_null());
}

#[test]
fn bad_parameters_exit_with_one_and_an_error_record() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _) = run(dir.path(), &["solve-rect", "--L", "2", "--b", "-1", "--h", "0.25"]);
    assert_eq!(code, 1);
    let err = json(&dir.path().join("error.json"));
    assert_eq!(err["exit_code"], 1);
    assert_eq!(err["command"], "solve-rect");

    let (code, _) = run(dir.path(), &["solve-rect", "--L", "2"]);
    assert_eq!(code, 1);
    assert!(dir.path().join("error.json").exists());
}

#[test]
fn config_file_fills_missing_flags_and_rejects_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("rect.cfg");
    fs::write(&cfg, "# rectangle\nL = 2\nb = 1\nh = 0.5\n").unwrap();
    let out = dir.path().join("a");
    let cfg_s = cfg.to_str().unwrap();
    let (code, _) = run(&out, &["solve-rect", "--h", "0.25", "--config", cfg_s]);
    assert_eq!(code, 0);
    let report = json(&out.join("report.json"));
    assert_eq!(report["params"]["L"], 2.0);
    assert_eq!(report["params"]["h"], 0.25);

    fs::write(&cfg, "L = 2\nb = 1\nh = 0.5\nwidth = 3\n").unwrap();
    let (code, _) = run(&out, &["solve-rect", "--config", cfg_s]);
    assert_eq!(code, 1);
}

#[test]
fn failed_audit_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    // far too short and coarse for the tilt to settle
    let (code, _) = run(
        dir.path(),
        &["delta-wing", "--b", "2.6", "--h", "0.25", "--L", "4,8", "--cauchy-tol", "10"],
    );
    assert_eq!(code, 2);
    let report = json(&dir.path().join("report.json"));
    let theta = report["audits"]
        .as_array()
        .unwrap()
        .iter()
        .find(|a| a["id"] == "THETA_HAT")
        .unwrap();
    assert_eq!(theta["pass"], false);
    let err = json(&dir.path().join("error.json"));
    assert_eq!(err["exit_code"], 2);
}

#[test]
fn exported_field_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let solve = dir.path().join("solve");
    let (code, _) = run(&solve, &["solve-rect", "--L", "2", "--b", "1", "--h", "0.125"]);
    assert_eq!(code, 0);
    let field = solve.join("field.csv");
    let original = NodeTable::read(&field).unwrap();

    let again = dir.path().join("again");
    let (code, _) = run(&again, &["export", "--input", field.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(code, 0);
    assert_eq!(
        fs::read(&field).unwrap(),
        fs::read(again.join("export.csv")).unwrap()
    );

    let (code, _) = run(&again, &["export", "--input", field.to_str().unwrap(), "--format", "obj"]);
    assert_eq!(code, 0);
    let obj = fs::read_to_string(again.join("export.obj")).unwrap();
    let vertices = obj.lines().filter(|l| l.starts_with("v ")).count();
    assert_eq!(vertices, original.rows.len());
    let solver_obj = fs::read_to_string(solve.join("field.obj")).unwrap();
    let verts = |t: &str| t.lines().filter(|l| l.starts_with("v ")).map(String::from).collect::<Vec<_>>();
    assert_eq!(verts(&obj), verts(&solver_obj));
}
