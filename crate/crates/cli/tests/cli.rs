//! Black-box tests of the `qfcsim` binary: exit codes, artifact layout, and
//! reproducibility of the shipped scenarios.

use std::path::Path;
use std::process::{Command, Output};

fn qfcsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qfcsim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn json(dir: &Path, name: &str) -> serde_json::Value {
    serde_json::from_str(&read(dir, name)).expect("valid json")
}

#[test]
fn validate_echoes_normalized_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.json");
    std::fs::write(&path, "{}\n").unwrap();
    let out = qfcsim(&["validate", "--config", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let echoed: serde_json::Value =
        serde_json::from_slice(&out.stdout).expect("echo is valid json");
    assert_eq!(echoed["tcspc.bin_width_ps"], serde_json::json!(512.0));
    assert_eq!(echoed["qfc.eta_max"], serde_json::json!(0.19));
}

#[test]
fn out_of_range_key_exits_4_and_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"emitter.mm_depth": 1.5}"#).unwrap();
    let out = qfcsim(&["validate", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
    let msg = stderr(&out);
    assert!(msg.contains("emitter.mm_depth"), "stderr: {msg}");
}

#[test]
fn unknown_key_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"emitter.typo": 1.0}"#).unwrap();
    let out = qfcsim(&["validate", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr(&out).contains("emitter.typo"));
}

#[test]
fn missing_config_file_exits_3() {
    let out = qfcsim(&["validate", "--config", "/nonexistent/nope.json"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn unknown_scenario_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = qfcsim(&["run", "fig9-bogus", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("fig9-bogus"));
}

#[test]
fn nonpositive_duration_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let out = qfcsim(&[
        "run",
        "custom",
        "--duration",
        "0",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn efficiency_scenario_peaks_at_the_phase_matched_power() {
    let dir = tempfile::tempdir().unwrap();
    let out = qfcsim(&["run", "fig2-efficiency", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = read(dir.path(), "efficiency.csv");
    assert!(csv.starts_with("pump_mw,eta,noise_cps\n"));
    assert_eq!(csv.lines().count(), 26);
    assert!(csv.contains("210.00,0.190000,1150.0"), "csv:\n{csv}");
    let manifest = json(dir.path(), "manifest.json");
    assert_eq!(manifest["scenario"], "fig2-efficiency");
    assert_eq!(manifest["outputs"][0], "efficiency.csv");
}

#[test]
fn tuning_scenario_reports_the_double_resonance_point() {
    let dir = tempfile::tempdir().unwrap();
    let out = qfcsim(&["run", "fig3-tuning", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let summary = json(dir.path(), "summary.json");
    let pump = summary["pump_wavelength_nm"].as_f64().unwrap();
    let temp = summary["oven_temperature_c"].as_f64().unwrap();
    let output = summary["output_wavelength_nm"].as_f64().unwrap();
    assert!((pump - 1343.17).abs() <= 0.01, "pump {pump}");
    assert!((temp - 43.0).abs() <= 0.5, "temp {temp}");
    assert!((output - 780.24).abs() <= 0.01, "output {output}");
    let csv = read(dir.path(), "tuning.csv");
    assert!(csv.starts_with("temperature_c,pump_nm,output_nm\n"));
    assert_eq!(csv.lines().count(), 62);
}

#[test]
fn budget_scenario_ranks_converted_range_highest() {
    let dir = tempfile::tempdir().unwrap();
    let out = qfcsim(&["run", "budget-range", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = read(dir.path(), "range.csv");
    let mut range = std::collections::BTreeMap::new();
    for line in csv.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        range.insert(
            cols[0].parse::<u32>().unwrap(),
            cols[2].parse::<f64>().unwrap(),
        );
    }
    assert_eq!(range.len(), 3);
    assert!(range[&780] > 3.0 * range[&493], "ranges: {range:?}");
    assert!(range[&493] > range[&369], "ranges: {range:?}");
    let summary = json(dir.path(), "summary.json");
    let apd = summary["apd_direct_rate_cps"].as_f64().unwrap();
    assert!((apd - 26_600.0).abs() / 26_600.0 < 0.15, "apd rate {apd}");
}

#[test]
fn pump_optimize_reports_the_snr_maximum() {
    let dir = tempfile::tempdir().unwrap();
    let out = qfcsim(&["run", "pump-optimize", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let summary = json(dir.path(), "summary.json");
    let p_star = summary["p_star_mw"].as_f64().unwrap();
    assert!((p_star - 60.4).abs() < 0.5, "p* {p_star}");
    assert!(summary["snr_star"].as_f64().unwrap() > 0.0);
    let csv = read(dir.path(), "pump_snr.csv");
    assert!(csv.starts_with("pump_mw,snr\n"));
    assert_eq!(csv.lines().count(), 421);
}

#[test]
fn custom_runs_are_byte_identical_across_reruns() {
    let names = ["g2.csv", "histogram.csv", "events.csv", "summary.json"];
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for dir in &dirs {
        let out = qfcsim(&[
            "run",
            "custom",
            "--seed",
            "42",
            "--duration",
            "5",
            "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
    }
    for name in names {
        assert_eq!(
            std::fs::read(dirs[0].path().join(name)).unwrap(),
            std::fs::read(dirs[1].path().join(name)).unwrap(),
            "{name} differs between identical runs"
        );
    }
    let manifest = json(dirs[0].path(), "manifest.json");
    assert_eq!(manifest["seed"], 42);
    assert_eq!(manifest["duration_s"], 5.0);
    assert!(manifest["config_sha256"].as_str().unwrap().len() == 64);
}

#[test]
fn different_seeds_differ() {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for (seed, dir) in ["1", "2"].iter().zip(&dirs) {
        let out = qfcsim(&[
            "run",
            "custom",
            "--seed",
            seed,
            "--duration",
            "5",
            "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
    }
    assert_ne!(
        std::fs::read(dirs[0].path().join("events.csv")).unwrap(),
        std::fs::read(dirs[1].path().join("events.csv")).unwrap()
    );
}

#[test]
fn sweep_writes_one_row_per_grid_point() {
    let dir = tempfile::tempdir().unwrap();
    let out = qfcsim(&[
        "sweep",
        "qfc.pump_mw",
        "10",
        "210",
        "5",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = read(dir.path(), "sweep.csv");
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "qfc.pump_mw,a,eta,noise_cps,snr,expected_g2"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 5);
    assert!(rows[0].starts_with("10"));
    assert!(rows[4].starts_with("210"));
}

#[test]
fn sweep_rejects_out_of_range_values() {
    let dir = tempfile::tempdir().unwrap();
    let out = qfcsim(&[
        "sweep",
        "emitter.mm_depth",
        "0.5",
        "2.0",
        "4",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr(&out).contains("emitter.mm_depth"));
}
