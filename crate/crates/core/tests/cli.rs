//! End-to-end runs of the `pekeris` binary: exit codes, strict configs,
//! artifact layout and determinism.
use std::fs;
use std::path::Path;
use std::process::Command;

fn pekeris(args: &[&str]) -> (i32, serde_json::Value) {
    let out = Command::new(env!("CARGO_BIN_EXE_pekeris")).args(args).output().expect("binary runs");
    let stdout = String::from_utf8(out.stdout).unwrap();
    let line = stdout
        .lines()
        .last()
        .unwrap_or_else(|| panic!("no summary line; stderr: {}", String::from_utf8_lossy(&out.stderr)));
    (out.status.code().unwrap(), serde_json::from_str(line).expect("summary line is json"))
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.display().to_string()
}

const MC: &str = r#"{
  "waveguide": {"depth": 20, "n1": 2, "modes": 3, "mode_fraction": 0.25},
  "medium": {"kernel": {"kind": "separable_cosine", "sigma2": 1}, "a": 0.02},
  "run": {"seed": 9, "montecarlo": {"epsilon": 0.01, "realizations": 12, "distance": 0.5}}
}"#;

#[test]
fn missing_depth_exits_2_without_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "bad.json", r#"{"waveguide": {"n1": 2, "modes": 4}}"#);
    let out = tmp.path().join("out");
    let (code, s) = pekeris(&["--config", &cfg, "--out", out.to_str().unwrap(), "modes"]);
    assert_eq!(code, 2);
    assert_eq!(s["status"], "config_error");
    assert_eq!(s["schema_version"], 1);
    assert!(s["error"].as_str().unwrap().contains("depth"));
    assert!(!out.exists());
}

#[test]
fn unknown_keys_are_config_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "c.json", r#"{"waveguide": {"depth": 20, "n1": 2, "modes": 4}, "extra": 1}"#);
    let (code, _) = pekeris(&["--config", &cfg, "--out", tmp.path().to_str().unwrap(), "modes"]);
    assert_eq!(code, 2);
}

#[test]
fn numerical_failure_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "c.json",
        r#"{"run": {"diffusion": {"a0": 1, "a": 1, "depth": 20, "n1": 2, "cells": 16,
            "z_checkpoints": [0.01], "grid_tolerance": 1e-14}}}"#,
    );
    let out = tmp.path().join("out");
    let (code, s) = pekeris(&["--config", &cfg, "--out", out.to_str().unwrap(), "diffusion"]);
    assert_eq!(code, 3, "{s}");
    assert_eq!(s["stage"], "continuum_diffusion");
    assert!(!out.exists());
}

#[test]
fn modes_csv_has_header_and_round_trip_floats() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "c.json", r#"{"waveguide": {"depth": 20, "n1": 2, "modes": 5}}"#);
    let (code, s) = pekeris(&["--config", &cfg, "--out", tmp.path().to_str().unwrap(), "modes"]);
    assert_eq!(code, 0, "{s}");
    assert_eq!(s["results"]["modes"], 5);
    let text = fs::read_to_string(tmp.path().join("modes.csv")).unwrap();
    let mut lines = text.split("\r\n");
    assert_eq!(lines.next().unwrap(), "j,sigma,beta,zeta,amplitude");
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let sigma: f64 = row[1].parse().unwrap();
    assert_eq!(format!("{sigma:?}"), row[1]);
}

#[test]
fn same_seed_gives_identical_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "mc.json", MC);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    assert_eq!(pekeris(&["--config", &cfg, "--out", a.to_str().unwrap(), "montecarlo"]).0, 0);
    assert_eq!(pekeris(&["--config", &cfg, "--out", b.to_str().unwrap(), "--threads", "1", "montecarlo"]).0, 0);
    let csv_a = fs::read(a.join("montecarlo.csv")).unwrap();
    assert_eq!(csv_a, fs::read(b.join("montecarlo.csv")).unwrap());
    let c = tmp.path().join("c");
    assert_eq!(pekeris(&["--config", &cfg, "--out", c.to_str().unwrap(), "--seed", "10", "montecarlo"]).0, 0);
    assert_ne!(csv_a, fs::read(c.join("montecarlo.csv")).unwrap());
    let summary: serde_json::Value = serde_json::from_slice(&fs::read(a.join("montecarlo.json")).unwrap()).unwrap();
    assert_eq!(summary["schema_version"], 1);
    assert!(summary["max_unitarity_defect"].as_f64().unwrap() < 1e-8);
}

#[test]
fn resolution_preset_is_nondecreasing_and_embeds_config() {
    let tmp = tempfile::tempdir().unwrap();
    let (code, s) = pekeris(&["--out", tmp.path().to_str().unwrap(), "preset", "fig-resolution"]);
    assert_eq!(code, 0, "{s}");
    let text = fs::read_to_string(tmp.path().join("resolution.csv")).unwrap();
    let fwhm: Vec<f64> =
        text.lines().skip(1).filter(|l| !l.is_empty()).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(fwhm.len(), 41);
    assert!(fwhm.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-9)));
    let svg = fs::read_to_string(tmp.path().join("resolution.svg")).unwrap();
    assert!(svg.contains("<metadata><![CDATA[") && svg.contains("\"preset\":\"fig-resolution\""));
    assert!(svg.contains("\"a0\":1.0") && svg.contains("\"depth\":20.0"));
}

#[test]
fn presets_reject_a_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "c.json", "{}");
    assert_eq!(pekeris(&["--config", &cfg, "--out", tmp.path().to_str().unwrap(), "preset", "fig-tau1"]).0, 2);
}

#[test]
fn flags_override_the_config() {
    let tmp = tempfile::tempdir().unwrap();
    let (code, s) =
        pekeris(&["--out", tmp.path().to_str().unwrap(), "diffusion", "--bc", "reflecting", "--z", "0.5,2"]);
    assert_eq!(code, 0, "{s}");
    let mean = s["results"]["mean_power"].as_array().unwrap();
    assert_eq!(mean.len(), 2);
    for m in mean {
        assert!((m.as_f64().unwrap() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn power_and_profile_subcommands() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "c.json",
        r#"{"waveguide": {"depth": 20, "n1": 2, "modes": 30},
            "medium": {"kernel": {"kind": "stationary_exponential", "sigma2": 1, "corr_length": 4}, "a": 1},
            "mirror": {"center": 10, "d_tilde_1": 5, "d_tilde_2": 5, "alpha_m": 0}}"#,
    );
    let dir = tmp.path().to_str().unwrap();
    let (code, s) = pekeris(&["--config", &cfg, "--out", dir, "power", "--z-max", "50", "--checkpoints", "5"]);
    assert_eq!(code, 0, "{s}");
    let rows = fs::read_to_string(tmp.path().join("power.csv")).unwrap().lines().count();
    assert_eq!(rows, 1 + 6 * 30 * 30);
    let (code, s) = pekeris(&["--config", &cfg, "--out", dir, "profile", "--L", "0,20", "--x0", "10"]);
    assert_eq!(code, 0, "{s}");
    let p = s["results"]["profiles"].as_array().unwrap();
    assert!(p[1]["fwhm"].as_f64().unwrap() >= p[0]["fwhm"].as_f64().unwrap() * (1.0 - 1e-9));
    assert!(tmp.path().join("profile.svg").exists());
}
