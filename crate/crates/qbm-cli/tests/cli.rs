//! End-to-end runs of the binary: exit codes, file layout, manifest shape,
//! and the closed-form sanity cases.

use std::path::Path;
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

fn qbm(dir: &Path, config: &str, args: &[&str]) -> Output {
    let out = dir.join("out");
    Command::new(env!("CARGO_BIN_EXE_qbm"))
        .arg("--config")
        .arg(dir.join(config))
        .arg("--out")
        .arg(&out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

fn read_csv(dir: &Path, name: &str) -> Vec<Vec<f64>> {
    let text = std::fs::read_to_string(dir.join("out").join(name)).unwrap();
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect()
}

fn manifest(dir: &Path) -> serde_json::Value {
    let text = std::fs::read_to_string(dir.join("out").join("manifest.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

const WEAK: &str = r#"{
    "system": {"omega": 1.0, "mass": 1.0, "beta": 1.0},
    "coupling": {"family": "power_exponential", "lambda": 0.0043262799,
                 "n": 1.0, "omega_c": 1.0},
    "bath": {"n": 120, "omega_max": 8.0},
    "grid": {"t_min": 0.0, "t_max": 20.0, "samples": 5}
}"#;

#[test]
fn resonant_single_mode_splits_symmetrically() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "cfg.json",
        r#"{
            "system": {"omega": 1.0, "mass": 1.0},
            "coupling": {"family": "power_exponential", "lambda": 0.0, "n": 1.0, "omega_c": 1.0},
            "bath": {"modes": [[1.0, 0.1]]}
        }"#,
    );
    let out = qbm(dir.path(), "cfg.json", &["spectrum"]);
    assert!(out.status.success(), "{out:?}");
    let rows = read_csv(dir.path(), "spectrum.csv");
    assert_eq!(rows.len(), 2);
    // Degenerate mode: alpha = omega +- g, each carrying half the weight.
    assert!((rows[0][0] - 0.9).abs() < 1e-12);
    assert!((rows[1][0] - 1.1).abs() < 1e-12);
    assert!((rows[0][1] - 0.5).abs() < 1e-12);
    assert!((rows[1][1] - 0.5).abs() < 1e-12);
}

#[test]
fn decoupled_decay_stays_at_unity() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "cfg.json",
        r#"{
            "system": {"omega": 1.0, "mass": 1.0},
            "coupling": {"family": "power_exponential", "lambda": 0.0, "n": 1.0, "omega_c": 1.0},
            "bath": {"modes": [[0.5, 0.0], [1.5, 0.0]]},
            "grid": {"t_min": 0.0, "t_max": 50.0, "samples": 6}
        }"#,
    );
    let out = qbm(dir.path(), "cfg.json", &["decay"]);
    assert!(out.status.success(), "{out:?}");
    for row in read_csv(dir.path(), "decay.csv") {
        for v in &row[1..] {
            assert_eq!(*v, 1.0);
        }
    }
}

#[test]
fn khalfin_fits_the_threshold_exponent() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "cfg.json", WEAK);
    let out = qbm(dir.path(), "cfg.json", &["khalfin"]);
    assert!(out.status.success(), "{out:?}");
    let m = manifest(dir.path());
    let exponent = m["results"]["exponent"].as_f64().unwrap();
    assert!((exponent + 2.0).abs() < 0.05, "exponent {exponent}");
}

#[test]
fn manifest_records_what_the_run_wrote() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "cfg.json", WEAK);
    let out = qbm(dir.path(), "cfg.json", &["decay"]);
    assert!(out.status.success(), "{out:?}");
    let m = manifest(dir.path());
    assert_eq!(m["command"], "decay");
    assert_eq!(m["version"], env!("CARGO_PKG_VERSION"));
    assert!(m["timestamp"].as_str().unwrap().ends_with('Z'));
    // Config echo is the resolved document: defaults materialized.
    assert_eq!(m["config"]["bath"]["scheme"], "centroid");
    assert_eq!(m["config"]["system"]["n0"], 1.0);
    let outputs = m["outputs"].as_array().unwrap();
    assert_eq!(outputs.len(), 1);
    assert_eq!(outputs[0]["file"], "decay.csv");
    assert_eq!(outputs[0]["rows"], 5);
    let bytes = std::fs::read(dir.path().join("out").join("decay.csv")).unwrap();
    let digest = Sha256::digest(&bytes);
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    assert_eq!(outputs[0]["sha256"].as_str().unwrap(), hex);
    assert!(m["warnings"].as_array().unwrap().is_empty());
    assert!(m["results"]["decay_rate"].as_f64().unwrap() > 0.0);
}

#[test]
fn config_mistakes_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "bad_json.json", "{\"system\": nope");
    write(
        dir.path(),
        "unknown_field.json",
        r#"{"system": {"omega": 1, "mass": 1, "hbar": 6.6},
            "coupling": {"family": "power_exponential", "lambda": 0, "n": 1, "omega_c": 1}}"#,
    );
    write(
        dir.path(),
        "bad_family.json",
        r#"{"system": {"omega": 1, "mass": 1},
            "coupling": {"family": "ohmic", "lambda": 0.1, "n": 1, "omega_c": 1},
            "bath": {"n": 10, "omega_max": 5}}"#,
    );
    write(
        dir.path(),
        "no_bath.json",
        r#"{"system": {"omega": 1, "mass": 1},
            "coupling": {"family": "power_exponential", "lambda": 0.1, "n": 1, "omega_c": 1}}"#,
    );
    write(
        dir.path(),
        "negative_mass.json",
        r#"{"system": {"omega": 1, "mass": -1},
            "coupling": {"family": "power_exponential", "lambda": 0.1, "n": 1, "omega_c": 1},
            "bath": {"n": 10, "omega_max": 5}}"#,
    );
    for cfg in
        ["bad_json.json", "unknown_field.json", "bad_family.json", "no_bath.json", "negative_mass.json"]
    {
        let out = qbm(dir.path(), cfg, &["spectrum"]);
        assert_eq!(out.status.code(), Some(2), "{cfg}: {out:?}");
        assert!(!out.stderr.is_empty(), "{cfg} should explain itself");
    }
    // Missing config file is a config error too.
    let out = qbm(dir.path(), "absent.json", &["spectrum"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn oscillatory_budget_overrun_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = WEAK.replace(
        "\"grid\"",
        "\"khalfin\": {\"t_min\": 1e9, \"t_max\": 1e10, \"samples\": 4}, \"grid\"",
    );
    write(dir.path(), "cfg.json", &cfg);
    let out = qbm(dir.path(), "cfg.json", &["khalfin"]);
    assert_eq!(out.status.code(), Some(3), "{out:?}");
}

#[test]
fn strict_promotes_regime_warnings_to_exit_four() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = WEAK.replace("0.0043262799", "0.5");
    write(dir.path(), "cfg.json", &cfg);
    let loose = qbm(dir.path(), "cfg.json", &["decay"]);
    assert_eq!(loose.status.code(), Some(0), "{loose:?}");
    assert!(String::from_utf8_lossy(&loose.stderr).contains("warning"));
    let strict = qbm(dir.path(), "cfg.json", &["--strict", "decay"]);
    assert_eq!(strict.status.code(), Some(4), "{strict:?}");
    // Outputs are still written; strict only changes the exit code.
    assert!(dir.path().join("out").join("decay.csv").exists());
    let m = manifest(dir.path());
    assert_eq!(m["warnings"].as_array().unwrap().len(), 1);
}

#[test]
fn validate_runs_green_on_the_reference_config() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "cfg.json", WEAK);
    let out = qbm(dir.path(), "cfg.json", &["validate"]);
    assert!(out.status.success(), "{out:?}");
    let text = std::fs::read_to_string(dir.path().join("out").join("validate.csv")).unwrap();
    assert!(text.lines().skip(1).all(|l| l.ends_with("PASS")), "{text}");
    let m = manifest(dir.path());
    assert_eq!(m["results"]["failed"], 0);
}

#[test]
fn bad_thread_environment_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "cfg.json", WEAK);
    let out = Command::new(env!("CARGO_BIN_EXE_qbm"))
        .arg("--config")
        .arg(dir.path().join("cfg.json"))
        .arg("--out")
        .arg(dir.path().join("out"))
        .arg("spectrum")
        .env("QBM_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "{out:?}");
}
