use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn fslab(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_fslab"));
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("fslab runs")
}

fn run_config(dir: &Path, command: &str, config: &Value, extra: &[&str]) -> Output {
    let path = dir.join(format!("{command}.json"));
    fs::write(&path, serde_json::to_vec(config).unwrap()).unwrap();
    let out = dir.join("out");
    let mut args = vec![command, "--config", path.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    fslab(&args, &[])
}

fn report(dir: &Path) -> Value {
    serde_json::from_slice(&fs::read(dir.join("out/report.json")).unwrap()).unwrap()
}

fn error_json(output: &Output) -> Value {
    serde_json::from_slice(&output.stdout).expect("error JSON on stdout")
}

fn small_entropy() -> Value {
    json!({
        "command": "entropy",
        "parameters": {
            "src": {"s": 2.0, "rho": 1.0, "p": 2, "q": 2, "n": 1.0, "sizes": [1]},
            "dst": {"s": 1.0, "rho": 0.0, "p": 2, "q": 2, "n": 1.0, "sizes": [1]},
            "ks": [1, 2, 3, 4],
            "cloud_size": 64,
            "exact_tolerance": 0.5,
        }
    })
}

#[test]
fn norm_of_zero_function_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let config = json!({
        "parameters": {
            "function": {"level": 6, "shape": "zero"},
            "params": [{"family": "B", "s": 0.5, "p": 2, "q": 2}, {"family": "F", "s": 0.8, "p": 2, "q": "inf"}],
            "expected_total": 0.0,
        }
    });
    let out = run_config(dir.path(), "norm", &config, &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let r = report(dir.path());
    assert_eq!(r["passed"], json!(true));
    assert_eq!(r["results"][0]["report"]["total"], json!(0.0));
    assert_eq!(r["results"][1]["report"]["total"], json!(0.0));
    let omega = fs::read_to_string(dir.path().join("out/norm_0_modulus.csv")).unwrap();
    assert!(omega.starts_with("t,omega\n"));
    assert!(dir.path().join("out/norm_1_scales.csv").exists());
}

#[test]
fn homogeneity_report_carries_predicted_slopes() {
    let dir = tempfile::tempdir().unwrap();
    let config = json!({
        "parameters": {
            "mother": {"level": 8, "extent": 0.125, "radius": 0.125},
            "grid": {"family": "B", "s": [0.75], "p": [1, "inf"], "q": [2]},
            "steps": 3,
        }
    });
    let out = run_config(dir.path(), "homogeneity", &config, &[]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(dir.path());
    for (i, predicted) in [-0.25, 0.75].into_iter().enumerate() {
        let run = &r["results"][i]["run"];
        assert_eq!(run["predicted_slope"], json!(predicted));
        assert!((run["fit"]["slope"].as_f64().unwrap() - predicted).abs() < 1e-9);
    }
    let csv = fs::read_to_string(dir.path().join("out/homogeneity_0.csv")).unwrap();
    assert!(csv.starts_with("lambda,norm\n"));
    assert_eq!(csv.lines().count(), 5);
}

#[test]
fn entropy_writes_curve_and_fit() {
    let dir = tempfile::tempdir().unwrap();
    let config = json!({
        "parameters": {
            "src": {"s": 2.0, "rho": 1.0, "p": 2, "q": 2, "n": 1.0, "sizes": [1, 2]},
            "dst": {"s": 1.0, "rho": 0.0, "p": 2, "q": 2, "n": 1.0, "sizes": [1, 2]},
            "ks": [1, 2, 3, 4],
            "cloud_size": 128,
        }
    });
    let out = run_config(dir.path(), "entropy", &config, &["--seed", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(dir.path());
    assert_eq!(r["seed"], json!(5));
    let manifest = &r["results"]["runs"][0]["manifest"];
    assert!(manifest["slope"].is_f64());
    assert_eq!(manifest["k_range"], json!([1, 4]));
    let csv = fs::read_to_string(dir.path().join("out/entropy_seed5.csv")).unwrap();
    assert!(csv.starts_with("k,e_k\n"));
    assert_eq!(csv.lines().count(), 5);
}

#[test]
fn tightened_tolerance_fails_with_report() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = small_entropy();
    config["parameters"]["exact_tolerance"] = json!(0.0);
    let out = run_config(dir.path(), "entropy", &config, &[]);
    assert_eq!(out.status.code(), Some(1));
    let r = report(dir.path());
    assert_eq!(r["passed"], json!(false));
    let failed: Vec<&Value> = r["assertions"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|a| a["passed"] == json!(false))
        .collect();
    assert_eq!(failed.len(), 1);
    assert_eq!(failed[0]["name"], json!("greedy_matches_exact"));
}

#[test]
fn config_errors_exit_2_without_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let bad = [
        ("entropy", json!({"parameters": {"ks": [1]}})),
        ("entropy", json!({"parameters": {"unknown": 1}})),
        ("norm", small_entropy()),
        (
            "norm",
            json!({"parameters": {"function": {"level": 6}, "params": [{"family": "B", "s": 1.5, "p": 2, "q": 2, "r": 1}]}}),
        ),
        (
            "multiplier",
            json!({"parameters": {"level": 3, "ms": [2], "params": {"family": "B", "s": 0.5, "p": 2, "q": 2}}}),
        ),
    ];
    for (command, config) in bad {
        let out = run_config(dir.path(), command, &config, &[]);
        assert_eq!(out.status.code(), Some(2), "{config}");
        let e = error_json(&out);
        assert_eq!(e["status"], json!("error"));
        assert!(e["message"].is_string());
        assert!(!dir.path().join("out").exists(), "{config}");
    }
    let missing = fslab(&["norm", "--config", "/nonexistent/config.json"], &[]);
    assert_eq!(missing.status.code(), Some(2));
    assert_eq!(error_json(&missing)["kind"], json!("read"));
}

#[test]
fn embedding_without_gap_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = json!({
        "parameters": {
            "pairs": [{"src": {"family": "B", "s": 1.0, "p": 1, "q": 2}, "dst": {"family": "B", "s": 0.5, "p": 2, "q": 2}}],
            "levels": [5, 6],
        }
    });
    let out = run_config(dir.path(), "embed", &config, &[]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_json(&out)["kind"], json!("usage"));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn bad_thread_count_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    fs::write(&path, serde_json::to_vec(&small_entropy()).unwrap()).unwrap();
    let out = fslab(
        &["entropy", "--config", path.to_str().unwrap(), "--out", dir.path().join("out").to_str().unwrap()],
        &[("FSLAB_THREADS", "zero")],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn repeated_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let config = json!({"seed": 11, "parameters": {"cases": 12, "orders": [1, 2], "polynomial_level": 5}});
    for dir in [&a, &b] {
        let path = dir.path().join("c.json");
        fs::write(&path, serde_json::to_vec(&config).unwrap()).unwrap();
        let out = fslab(
            &["identities", "--config", path.to_str().unwrap(), "--out", dir.path().join("out").to_str().unwrap()],
            &[("FSLAB_THREADS", "2")],
        );
        assert_eq!(out.status.code(), Some(0));
    }
    for file in ["identities.csv", "annihilation.csv", "report.json"] {
        assert_eq!(
            fs::read(a.path().join("out").join(file)).unwrap(),
            fs::read(b.path().join("out").join(file)).unwrap(),
            "{file}"
        );
    }
}
