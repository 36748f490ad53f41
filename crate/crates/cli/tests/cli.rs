use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn bie(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bie"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn concentric() -> Value {
    json!({
        "version": 1,
        "curves": [
            {"kind": "circle", "center": [0.0, 0.0], "radius": 1.0},
            {"kind": "circle", "center": [0.0, 0.0], "radius": 0.4}
        ],
        "sigma": [1.0, 2.0],
        "data": {"0": {"kind": "sine_mode", "m": 3}},
        "settings": {"gmres_tol": 1e-12},
        "reference": {"kind": "concentric", "m": 3, "sigma": 2.0, "alpha": 0.4}
    })
}

fn write_config(dir: &Path, cfg: &Value) -> PathBuf {
    let p = dir.join("config.json");
    std::fs::write(&p, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
    p
}

fn run(dir: &Path, cfg: &Value, args: &[&str]) -> Output {
    let c = write_config(dir, cfg);
    let out = dir.join("out");
    let mut all = vec!["--config", c.to_str().unwrap(), "--out", out.to_str().unwrap()];
    all.extend_from_slice(args);
    bie(&all)
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("out/report.json")).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn solve_then_eval_from_saved_solution() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = concentric();
    let o = run(dir.path(), &cfg, &["solve"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = report(dir.path());
    for c in r["solve"]["charges"].as_array().unwrap() {
        assert!(c.as_f64().unwrap().abs() <= 1e-7);
    }
    assert!(r["reference"]["max_density_error"].as_f64().unwrap() < 1e-8);
    let dens = std::fs::read_to_string(dir.path().join("out/densities.csv")).unwrap();
    assert!(dens.starts_with("interface,node,q,x,y,phi,gamma"));

    cfg["eval"] = json!({"kind": "points", "points": [[0.0, 0.5], [0.0, 0.999], [1.5, 0.0]]});
    let saved = dir.path().join("out/solution.json");
    let o = run(dir.path(), &cfg, &["eval", "--solution", saved.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let field = std::fs::read_to_string(dir.path().join("out/field.csv")).unwrap();
    let lines: Vec<&str> = field.lines().collect();
    assert_eq!(lines[0], "x,y,u,method,dist");
    assert_eq!(lines.len(), 4);
    assert!(lines[3].contains("outside"));
    let r = report(dir.path());
    assert_eq!(r["eval"]["outside"], 1);
    assert!(r["reference"]["max_error"].as_f64().unwrap() < 1e-3);
}

#[test]
fn empty_point_list_gives_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = concentric();
    cfg["eval"] = json!({"kind": "points", "points": []});
    let o = run(dir.path(), &cfg, &["eval"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let field = std::fs::read_to_string(dir.path().join("out/field.csv")).unwrap();
    assert_eq!(field.trim_end(), "x,y,u,method,dist");
}

#[test]
fn incompatible_data_is_named_in_stderr() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = concentric();
    cfg["data"] = json!({"0": {"kind": "fourier", "cos": [1.0]}});
    let o = run(dir.path(), &cfg, &["solve"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("CompatibilityViolation"), "{}", stderr(&o));
}

#[test]
fn unknown_fields_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = concentric();
    cfg["colour"] = json!("blue");
    let o = run(dir.path(), &cfg, &["solve"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("colour"), "{}", stderr(&o));
}

#[test]
fn single_threaded_reports_are_reproducible() {
    let mut cfg = concentric();
    cfg["eval"] = json!({"kind": "raster", "x": [-0.9, 0.9], "y": [-0.9, 0.9], "nx": 9, "ny": 9});
    let mut reports = Vec::new();
    let mut fields = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().unwrap();
        let o = run(dir.path(), &cfg, &["--threads", "1", "eval"]);
        assert!(o.status.success(), "{}", stderr(&o));
        let mut r = report(dir.path());
        r.as_object_mut().unwrap().remove("timings");
        reports.push(r);
        fields.push(std::fs::read_to_string(dir.path().join("out/field.csv")).unwrap());
    }
    assert_eq!(reports[0], reports[1]);
    assert_eq!(fields[0], fields[1]);
}

#[test]
fn empty_rescale_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = concentric();
    cfg["rescale_study"] = json!({"sigmas": []});
    let o = run(dir.path(), &cfg, &["rescale-study"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let table = std::fs::read_to_string(dir.path().join("out/rescale.csv")).unwrap();
    assert_eq!(table.lines().count(), 1);
}

#[test]
fn rescale_sweep_rejects_equal_conductivity() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = concentric();
    cfg["rescale_study"] = json!({"sigmas": [2.0, 1.0], "nodes": [32]});
    let o = run(dir.path(), &cfg, &["rescale-study"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("EqualConductivity"), "{}", stderr(&o));
}

#[test]
fn rescale_row_is_well_formed() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = concentric();
    cfg["rescale_study"] = json!({"sigmas": [2.0], "nodes": [32]});
    let o = run(dir.path(), &cfg, &["rescale-study"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = report(dir.path());
    let row = &r["rescale_study"][0];
    assert_eq!(row["m"], 32);
    assert_eq!(row["converged_rescaled"], true);
    assert_eq!(row["converged_unrescaled"], true);
}

#[test]
fn single_rung_ladder_has_no_differences() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = concentric();
    cfg["refine_study"] = json!({"ladder": [32]});
    let o = run(dir.path(), &cfg, &["refine-study"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let table = std::fs::read_to_string(dir.path().join("out/refine.csv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("32,,,"), "{}", lines[1]);
}

#[test]
fn refinement_ladder_converges_spectrally() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = concentric();
    cfg["refine_study"] = json!({"ladder": [16, 32, 64]});
    let o = run(dir.path(), &cfg, &["refine-study"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = report(dir.path());
    let err: Vec<f64> = r["refine_study"]
        .as_array()
        .unwrap()
        .iter()
        .map(|row| row["gamma_error"].as_f64().unwrap())
        .collect();
    assert!(err[1] <= err[0] / 100.0 || err[1] <= 1e-10);
}

#[test]
fn missing_config_is_an_error() {
    let o = bie(&["solve"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--config"));
}

#[test]
fn selftest_passes() {
    let o = bie(&["selftest", "--seed", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8_lossy(&o.stdout);
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 4);
}
