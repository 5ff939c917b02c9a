//! End-to-end checks of the `llg` binary: artifact layout, determinism,
//! config validation and exit codes. The heavy verification sweep is covered
//! by the library's acceptance suite, not here.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn llg(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_llg"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn write_cfg(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn run_writes_steps_and_prints_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        tmp.path(),
        "run.json",
        r#"{ "problem": "cubic", "mesh_level": 4, "tau": 0.02 }"#,
    );
    let out_dir = tmp.path().join("out");
    let out = llg(
        &["run", "--config", &cfg, "--out", out_dir.to_str().unwrap()],
        tmp.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let summary: serde_json::Value =
        serde_json::from_slice(&out.stdout).expect("stdout is a JSON summary");
    assert_eq!(summary["problem"], "cubic");
    assert_eq!(summary["num_steps"], 10);
    assert!(summary["energy_final"].as_f64().unwrap().is_finite());
    assert!(summary["max_err_h1"].as_f64().unwrap() > 0.0);

    let steps = fs::read_to_string(out_dir.join("run_steps.csv")).unwrap();
    // Header plus the initial state and ten steps.
    assert_eq!(steps.lines().count(), 12);
    assert!(steps.starts_with("step,"));
}

#[test]
fn conv_space_is_byte_stable_under_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        tmp.path(),
        "conv.json",
        r#"{ "problem": "cubic", "mesh_levels": [2, 4], "tau": 0.05 }"#,
    );
    let mut tables = Vec::new();
    for name in ["a", "b"] {
        let out_dir = tmp.path().join(name);
        let out = llg(
            &[
                "conv-space",
                "--config",
                &cfg,
                "--out",
                out_dir.to_str().unwrap(),
                "--deterministic",
            ],
            tmp.path(),
        );
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        tables.push(fs::read(out_dir.join("conv_space.csv")).unwrap());
    }
    assert_eq!(tables[0], tables[1], "repeated runs must match byte for byte");
}

#[test]
fn plot_renders_svg_from_table() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        tmp.path(),
        "conv.json",
        r#"{ "problem": "cubic", "mesh_levels": [2, 4], "tau": 0.05 }"#,
    );
    let out_dir = tmp.path().join("out");
    let out = llg(
        &[
            "conv-space",
            "--config",
            &cfg,
            "--out",
            out_dir.to_str().unwrap(),
            "--deterministic",
        ],
        tmp.path(),
    );
    assert!(out.status.success());

    let table = out_dir.join("conv_space.csv");
    let svg = out_dir.join("orders.svg");
    let out = llg(
        &[
            "plot",
            "--input",
            table.to_str().unwrap(),
            "--output",
            svg.to_str().unwrap(),
        ],
        tmp.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let body = fs::read_to_string(&svg).unwrap();
    assert!(body.starts_with("<svg"), "plot output must be an SVG document");
    assert!(body.contains("polyline"), "plot must contain data series");
}

#[test]
fn unknown_config_key_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        tmp.path(),
        "bad.json",
        r#"{ "problem": "cubic", "mesh_level": 4, "tau": 0.02, "stepsize": 1 }"#,
    );
    let out = llg(&["run", "--config", &cfg], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad config"), "stderr: {err}");
    assert!(err.contains("stepsize"), "should name the offending key: {err}");
}

#[test]
fn desk_guard_names_the_escape_hatch() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        tmp.path(),
        "big.json",
        r#"{ "problem": "cubic", "mesh_level": 128, "tau": 0.02 }"#,
    );
    let out = llg(&["run", "--config", &cfg], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("paper-scale"), "stderr: {err}");
}

#[test]
fn missing_config_is_an_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = llg(&["run"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("config"), "stderr: {err}");
}

#[test]
fn reference_workflow_persists_and_compares() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        tmp.path(),
        "ref.json",
        r#"{ "problem": "radial", "mesh_level": 4, "tau": 0.025,
             "tau_ladder": [0.05, 0.025], "reference": { "tau_factor": 4 } }"#,
    );
    let out_dir = tmp.path().join("out");
    let out = llg(
        &[
            "reference",
            "--config",
            &cfg,
            "--out",
            out_dir.to_str().unwrap(),
            "--deterministic",
        ],
        tmp.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for artifact in ["reference.llgf", "reference.json", "reference_compare.csv"] {
        assert!(
            out_dir.join(artifact).exists(),
            "missing artifact {artifact}"
        );
    }
    let compare = fs::read_to_string(out_dir.join("reference_compare.csv")).unwrap();
    assert_eq!(compare.lines().count(), 3, "header plus one row per tau");
}
