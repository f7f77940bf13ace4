//! End-to-end smoke tests for the advbal binary.

use std::path::Path;
use std::process::Command;

fn advbal() -> Command {
    Command::new(env!("CARGO_BIN_EXE_advbal"))
}

#[test]
fn generate_balance_diagnose_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("ks.csv");

    let out = advbal()
        .args([
            "generate",
            "--benchmark",
            "kang_schafer",
            "--n",
            "300",
            "--seed",
            "5",
            "--out",
        ])
        .arg(&data)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(data.exists());
    assert!(dir.path().join("ks.oracle.csv").exists());

    let weights = dir.path().join("w.csv");
    let report = dir.path().join("report.json");
    let out = advbal()
        .args([
            "balance",
            "--data",
            data.to_str().unwrap(),
            "--treatment-col",
            "a",
            "--outcome-col",
            "y",
            "--covariate-cols",
            "x1,x2,x3,x4",
            "--method",
            "adversarial",
            "--family",
            "lr",
            "--estimand",
            "epo",
            "--treatment-value",
            "1",
            "--out-weights",
        ])
        .arg(&weights)
        .arg("--out-report")
        .arg(&report)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let report_json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    let h = report_json["h_divergence"].as_f64().unwrap();
    assert!((0.0..=2.0).contains(&h));
    assert!(report_json["ess"].as_f64().unwrap() >= 1.0);

    // weights file has one row per treated unit, header included
    let w_text = std::fs::read_to_string(&weights).unwrap();
    assert!(w_text.starts_with("row,weight\n"));

    let out = advbal()
        .args([
            "diagnose",
            "--data",
            data.to_str().unwrap(),
            "--treatment-col",
            "a",
            "--outcome-col",
            "y",
            "--covariate-cols",
            "x1,x2,x3,x4",
            "--treatment-value",
            "1",
            "--weights",
        ])
        .arg(&weights)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout_json: serde_json::Value =
        serde_json::from_slice(&out.stdout).unwrap();
    assert!(stdout_json.get("weight_sq_norm").is_some());
}

fn write_config(path: &Path, output: &Path) {
    let config = serde_json::json!({
        "benchmark": {"kind": "circular"},
        "sizes": [60],
        "replications": 3,
        "methods": [
            {"method": "unweighted"},
            {"method": "ipw", "family": "lr"}
        ],
        "seed": 4,
        "bootstrap_samples": 100,
        "output": {"path": output.to_str().unwrap(), "format": "csv"}
    });
    std::fs::write(path, serde_json::to_string_pretty(&config).unwrap()).unwrap();
}

#[test]
fn run_is_reproducible_and_flag_overrides_work() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    let output = dir.path().join("results.csv");
    write_config(&config, &output);

    let run = |workers: &str| {
        let out = advbal()
            .args(["run", "--config"])
            .arg(&config)
            .args(["--workers", workers])
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        std::fs::read(&output).unwrap()
    };
    let first = run("1");
    let second = run("2");
    assert_eq!(first, second, "serial vs concurrent output differs");

    let text = String::from_utf8(first).unwrap();
    assert!(text.starts_with("method,n,bias,rmse,ci_lo,ci_hi,"));
    assert_eq!(text.lines().count(), 3);

    // JSON format override lands in the same path
    let out = advbal()
        .args(["run", "--config"])
        .arg(&config)
        .args(["--format", "json"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let rows: Vec<serde_json::Value> =
        serde_json::from_str(&std::fs::read_to_string(&output).unwrap()).unwrap();
    assert_eq!(rows.len(), 2);
}

#[test]
fn config_errors_exit_with_code_one() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.json");
    std::fs::write(
        &config,
        r#"{"benchmark": {"kind": "circular"}, "sizes": [],
           "methods": [{"method": "unweighted"}],
           "output": {"path": "o.csv", "format": "csv"}}"#,
    )
    .unwrap();
    let out = advbal()
        .args(["run", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));

    // unknown flags are usage errors
    let out = advbal().args(["run", "--no-such-flag"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));

    // missing data file is a runtime failure
    let out = advbal()
        .args([
            "balance",
            "--data",
            "/nonexistent.csv",
            "--treatment-col",
            "a",
            "--outcome-col",
            "y",
            "--covariate-cols",
            "x1",
            "--method",
            "unweighted",
            "--out-weights",
            "/tmp/w.csv",
            "--out-report",
            "/tmp/r.json",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
