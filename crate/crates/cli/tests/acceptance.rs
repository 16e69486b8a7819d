//! CLI acceptance: deterministic outputs under identical manifests, plus the
//! documented exit codes and output layout.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_bosonic-avc")
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn tmp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("bavc-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn criterion_9_byte_identical_reruns() {
    let started = std::time::Instant::now();
    let cfg = configs().join("epi_scan_thermal.json");
    let out_a = tmp_dir("det-a");
    let out_b = tmp_dir("det-b");
    for out in [&out_a, &out_b] {
        let status = Command::new(bin())
            .args(["epi-scan", "--config"])
            .arg(&cfg)
            .arg("--out-dir")
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
    }
    let a = std::fs::read(out_a.join("epi_scan.csv")).unwrap();
    let b = std::fs::read(out_b.join("epi_scan.csv")).unwrap();
    assert_eq!(a, b, "CSV bodies differ between identical runs");
    let sa = std::fs::read(out_a.join("epi_scan_summary.json")).unwrap();
    let sb = std::fs::read(out_b.join("epi_scan_summary.json")).unwrap();
    assert_eq!(sa, sb, "JSON summaries differ between identical runs");

    // seed overrides flow into the manifest and change the body
    let out_c = tmp_dir("det-c");
    let status = Command::new(bin())
        .args(["epi-scan", "--config"])
        .arg(&cfg)
        .arg("--out-dir")
        .arg(&out_c)
        .args(["--seed", "99"])
        .status()
        .unwrap();
    assert!(status.success());
    let c = std::fs::read(out_c.join("epi_scan.csv")).unwrap();
    assert_ne!(a, c, "different seeds must change the random-diagonal rows");

    for d in [out_a, out_b, out_c] {
        let _ = std::fs::remove_dir_all(d);
    }
    println!(
        "ACCEPTANCE 9: PASS - identical manifests reproduce byte-identical CSV bodies, {:.1?}",
        started.elapsed()
    );
}

#[test]
fn manifest_is_embedded_in_outputs() {
    let cfg = configs().join("epi_scan_thermal.json");
    let out = tmp_dir("manifest");
    let status = Command::new(bin())
        .args(["epi-scan", "--config"])
        .arg(&cfg)
        .arg("--out-dir")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = std::fs::read_to_string(out.join("epi_scan.csv")).unwrap();
    let first = csv.lines().next().unwrap();
    assert!(first.starts_with("# manifest "));
    let manifest: serde_json::Value =
        serde_json::from_str(first.trim_start_matches("# manifest ")).unwrap();
    assert_eq!(manifest["subcommand"], "epi-scan");
    assert!(manifest["config_digest"].as_str().unwrap().len() == 64);
    assert!(manifest["seed_schedule"].as_array().is_some());
    // full double precision in the body
    let row = csv.lines().nth(2).unwrap();
    assert!(row.contains('e'), "cells must be exponential-format doubles");
    let _ = std::fs::remove_dir_all(out);
}

#[test]
fn config_errors_exit_2() {
    let out = tmp_dir("cfg-err");
    // malformed JSON
    let bad = out.join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    let status = Command::new(bin())
        .args(["epi-scan", "--config"])
        .arg(&bad)
        .arg("--out-dir")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&status.stderr);
    assert!(stderr.contains("line"), "diagnostic should cite a line: {stderr}");

    // missing required field
    let missing = out.join("missing.json");
    std::fs::write(&missing, r#"{"tau": 0.5, "energy_budget": 1.0}"#).unwrap();
    let status = Command::new(bin())
        .args(["capacity", "--config"])
        .arg(&missing)
        .arg("--out-dir")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(2));

    // unknown lemma id is a usage error
    let status = Command::new(bin())
        .args(["lemma-check", "--lemma", "17"])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(2));
    let _ = std::fs::remove_dir_all(out);
}

#[test]
fn capacity_run_reports_closed_form() {
    let cfg = configs().join("capacity_symmetric.json");
    let out = tmp_dir("capacity");
    let status = Command::new(bin())
        .args(["capacity", "--config"])
        .arg(&cfg)
        .arg("--out-dir")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let summary: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out.join("capacity_result.json")).unwrap()).unwrap();
    let value = summary["result"]["value_bits"].as_f64().unwrap();
    let closed = summary["result"]["closed_form_bits"].as_f64().unwrap();
    assert!((closed - 0.622_556_2).abs() < 1e-6);
    assert!(value <= closed + 1e-3 && value >= 0.98 * closed);
    let trace = std::fs::read_to_string(out.join("capacity_trace.csv")).unwrap();
    assert!(trace.lines().count() >= 3);
    let _ = std::fs::remove_dir_all(out);
}

#[test]
fn zero_energy_capacity_is_zero() {
    let out = tmp_dir("zero-e");
    let cfg_path = out.join("zero.json");
    std::fs::write(
        &cfg_path,
        r#"{"tau": 0.5, "energy_budget": 0.0, "jammer_power": 1.0,
            "epsilon_schedule": [1.0, 0.5], "e_prime_fractions": [0.9]}"#,
    )
    .unwrap();
    let status = Command::new(bin())
        .args(["capacity", "--config"])
        .arg(&cfg_path)
        .arg("--out-dir")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let summary: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out.join("capacity_result.json")).unwrap()).unwrap();
    assert!(summary["result"]["value_bits"].as_f64().unwrap().abs() < 1e-9);
    let _ = std::fs::remove_dir_all(out);
}

#[test]
fn code_sim_outputs_tables() {
    let cfg = configs().join("code_sim_small.json");
    let out = tmp_dir("code-sim");
    let status = Command::new(bin())
        .args(["code-sim", "--config"])
        .arg(&cfg)
        .arg("--out-dir")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = std::fs::read_to_string(out.join("code_sim.csv")).unwrap();
    assert!(csv.contains("success_vacuum") && csv.contains("cr_symmetrized_value"));
    let meta: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out.join("code_sim_meta.json")).unwrap()).unwrap();
    assert_eq!(meta["energy_constraint"], "per_symbol_average");
    assert_eq!(meta["decoder"], "pretty_good_measurement");
    // determinism of the table under a fixed seed
    let out2 = tmp_dir("code-sim-2");
    Command::new(bin())
        .args(["code-sim", "--config"])
        .arg(&cfg)
        .arg("--out-dir")
        .arg(&out2)
        .status()
        .unwrap();
    assert_eq!(
        std::fs::read(out.join("code_sim.csv")).unwrap(),
        std::fs::read(out2.join("code_sim.csv")).unwrap()
    );
    let _ = std::fs::remove_dir_all(out);
    let _ = std::fs::remove_dir_all(out2);
}

#[test]
fn empty_scan_yields_header_only_csv() {
    let out = tmp_dir("empty-scan");
    let cfg_path = out.join("empty.json");
    std::fs::write(
        &cfg_path,
        r#"{"pairs": [], "lambdas": [0.5], "cutoff": 8, "inequality": "g_sum"}"#,
    )
    .unwrap();
    let status = Command::new(bin())
        .args(["epi-scan", "--config"])
        .arg(&cfg_path)
        .arg("--out-dir")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = std::fs::read_to_string(out.join("epi_scan.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2, "manifest comment + header only: {csv}");
    assert!(lines[1].starts_with("x_label,"));
    let _ = std::fs::remove_dir_all(out);
}

#[test]
fn lemma_all_quick_budget_finishes_fast() {
    let started = std::time::Instant::now();
    let status = Command::new(bin())
        .args(["lemma-check", "--lemma", "all"])
        .status()
        .unwrap();
    assert!(status.success());
    assert!(
        started.elapsed().as_secs_f64() < 60.0,
        "quick budget took {:?}",
        started.elapsed()
    );
}

#[test]
fn state_info_smoke() {
    let output = Command::new(bin())
        .args([
            "state-info", "--kind", "thermal", "--param", "1.0", "--cutoff", "60",
        ])
        .output()
        .unwrap();
    assert!(output.status.success());
    let text = String::from_utf8_lossy(&output.stdout);
    assert!(text.contains("entropy"), "{text}");
    // g(1) = 2 bits
    assert!(text.contains("2.0000000"), "{text}");
    // nats toggle
    let output = Command::new(bin())
        .args([
            "state-info", "--kind", "thermal", "--param", "1.0", "--cutoff", "60", "--nats",
        ])
        .output()
        .unwrap();
    assert!(String::from_utf8_lossy(&output.stdout).contains("nats"));
    // quick lemma run exits 0
    let status = Command::new(bin())
        .args(["lemma-check", "--lemma", "5", "--k", "6", "--d", "3"])
        .status()
        .unwrap();
    assert!(status.success());
}

#[test]
fn block_cache_env_var_round_trip() {
    let cache = tmp_dir("blocks");
    let out = tmp_dir("cache-run");
    let cfg = configs().join("epi_scan_thermal.json");
    let run = |label: &str| {
        let status = Command::new(bin())
            .env("BOSONIC_AVC_CACHE_DIR", &cache)
            .args(["epi-scan", "--config"])
            .arg(&cfg)
            .arg("--out-dir")
            .arg(out.join(label))
            .status()
            .unwrap();
        assert!(status.success());
    };
    run("first");
    let files: Vec<_> = std::fs::read_dir(&cache).unwrap().collect();
    assert!(!files.is_empty(), "cache directory should hold block files");
    run("second");
    assert_eq!(
        std::fs::read(out.join("first/epi_scan.csv")).unwrap(),
        std::fs::read(out.join("second/epi_scan.csv")).unwrap(),
        "loading cached blocks must not change results"
    );
    let _ = std::fs::remove_dir_all(cache);
    let _ = std::fs::remove_dir_all(out);
}
