use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_supertransfer");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("SUPERTRANSFER_OUT").output().expect("binary runs")
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

const SMALL_DIFFUSION: [&str; 4] = ["--set", "diffusion.walkers=2000", "--set", "diffusion.sweep.alpha=[1,10]"];

#[test]
fn malformed_config_is_a_usage_error_and_writes_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.json");
    let out = tmp.path().join("out");
    std::fs::write(&cfg, "{\"diffusion\": {\"walkers\": ").unwrap();
    let o = run(&["diffusion", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());

    std::fs::write(&cfg, r#"{"diffusion": {"walkerz": 10}}"#).unwrap();
    let o = run(&["diffusion", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn bad_overrides_and_flags_are_usage_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let o = out.to_str().unwrap();
    for args in [
        vec!["diffusion", "--out", o, "--set", "diffusion.tau=-3 ps"],
        vec!["diffusion", "--out", o, "--set", "diffusion.tau=3 nm"],
        vec!["diffusion", "--out", o, "--set", "nonsense"],
        vec!["diffusion", "--out", o, "--workers", "0"],
        vec!["frobnicate", "--out", o],
    ] {
        assert_eq!(run(&args).status.code(), Some(2), "{args:?}");
        assert!(!out.exists(), "{args:?}");
    }
}

#[test]
fn diffusion_reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let mut digests = Vec::new();
    for (name, workers) in [("a", "1"), ("b", "3")] {
        let out = tmp.path().join(name);
        let mut args = vec!["diffusion", "--seed", "17", "--workers", workers, "--out", out.to_str().unwrap()];
        args.extend(SMALL_DIFFUSION);
        let o = run(&args);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
        let m = manifest(&out);
        assert_eq!(m["status"], "pass");
        assert_eq!(m["seeds"]["diffusion"], 17);
        let data: Vec<(String, String)> = m["outputs"]
            .as_array()
            .unwrap()
            .iter()
            .filter(|e| e["kind"] == "data")
            .map(|e| (e["path"].as_str().unwrap().to_owned(), e["sha256"].as_str().unwrap().to_owned()))
            .collect();
        assert!(data.iter().any(|(p, _)| p == "sweep.csv"));
        digests.push(data);
    }
    assert_eq!(digests[0], digests[1]);
}

#[test]
fn manifest_records_layers_and_units() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.json");
    std::fs::write(&cfg, r#"{"diffusion": {"tau": "0.05 ns", "walkers": 500}}"#).unwrap();
    let out = tmp.path().join("out");
    let mut args = vec![
        "diffusion",
        "--preset",
        "paper-defaults",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend(SMALL_DIFFUSION);
    let o = run(&args);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let m = manifest(&out);
    assert_eq!(m["schema"], "supertransfer.manifest/1");
    assert_eq!(m["command"], "diffusion");
    assert_eq!(m["preset"], "paper-defaults");
    // Overrides beat the file, which beats the preset.
    assert_eq!(m["config"]["diffusion"]["walk"]["walkers"], 2000);
    assert_eq!(m["config"]["diffusion"]["walk"]["tau"], 50.0);
    let conv = m["unit_conversions"].as_array().unwrap();
    assert!(conv.iter().any(|c| c["field"] == "diffusion.tau" && c["input"] == "0.05 ns"));
    for e in m["outputs"].as_array().unwrap() {
        let bytes = std::fs::read(out.join(e["path"].as_str().unwrap())).unwrap();
        assert_eq!(e["bytes"].as_u64().unwrap() as usize, bytes.len());
    }
    assert!(!m["stages"].as_array().unwrap().is_empty());
}

#[test]
fn output_directory_from_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("env-out");
    let mut args = vec!["diffusion"];
    args.extend(SMALL_DIFFUSION);
    let o = Command::new(BIN).args(&args).env("SUPERTRANSFER_OUT", &out).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(out.join("manifest.json").exists());
}

#[test]
fn zero_dephasing_refuses_the_fit() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let o = run(&[
        "dephasing",
        "--set",
        "dephasing.rate=0",
        "--set",
        "dephasing.sites=4",
        "--set",
        "dephasing.n_max=3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let summary: Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    let text = summary.to_string();
    assert!(text.contains("degenerate"), "{text}");
    assert!(std::fs::read_to_string(out.join("decoherence.csv")).unwrap().starts_with("model,"));
}

#[test]
fn small_experiments_pass() {
    let tmp = tempfile::tempdir().unwrap();
    for (cmd, sets) in [
        ("superradiance", vec!["superradiance.n_max=4"]),
        ("supertransfer", vec!["supertransfer.n_max=2", "supertransfer.m_max=3"]),
        ("sectors", vec!["sectors.bath_modes=0"]),
    ] {
        let out = tmp.path().join(cmd);
        let mut args = vec![cmd, "--out", out.to_str().unwrap()];
        for s in &sets {
            args.extend(["--set", s]);
        }
        let o = run(&args);
        let stdout = String::from_utf8_lossy(&o.stdout);
        assert_eq!(o.status.code(), Some(0), "{cmd}: {stdout}");
        assert!(stdout.lines().any(|l| l.starts_with("PASS ")));
        assert!(!stdout.lines().any(|l| l.starts_with("FAIL ")));
        assert_eq!(manifest(&out)["status"], "pass");
    }
}

#[test]
fn failing_check_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    // An unreachable R² threshold fails the leakage-linearity check.
    let o = run(&[
        "sectors",
        "--set",
        "sectors.bath_modes=0",
        "--set",
        "sectors.r_squared_min=1.5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(manifest(&out)["status"], "fail");
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL "));
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
}
