//! End-to-end CLI tests: subcommands, file formats, and exit codes.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use roofbench_core::harness::ExperimentConfig;
use roofbench_core::harness::{SplitConfig, SplitRule};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_roofbench"))
}

fn temp_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join("roofbench-cli").join(name);
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn tiny_config_file(dir: &Path) -> PathBuf {
    let mut config = ExperimentConfig::default();
    config.generation.n_policies = 240;
    config.split = SplitConfig {
        n_train: 120,
        n_test: 120,
        split_rule: SplitRule::SeededShuffle,
    };
    config.forest.n_trees = 15;
    config.seeds = vec![0];
    let path = dir.join("config.json");
    fs::write(&path, serde_json::to_string_pretty(&config).unwrap()).unwrap();
    path
}

fn run_ok(output: &Output) {
    assert!(
        output.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
}

#[test]
fn config_subcommand_prints_the_defaults() {
    let output = bin().arg("config").output().unwrap();
    run_ok(&output);
    let parsed: ExperimentConfig =
        serde_json::from_slice(&output.stdout).expect("config output parses");
    assert_eq!(parsed, ExperimentConfig::default());
}

#[test]
fn generate_writes_released_table_and_manifest() {
    let dir = temp_dir("generate");
    let config = tiny_config_file(&dir);
    let output = bin()
        .args(["generate", "--config"])
        .arg(&config)
        .args(["--seed", "3", "--out"])
        .arg(dir.join("out"))
        .output()
        .unwrap();
    run_ok(&output);
    let mut seed_dirs: Vec<PathBuf> = Vec::new();
    for hash_dir in fs::read_dir(dir.join("out")).unwrap() {
        for sd in fs::read_dir(hash_dir.unwrap().path()).unwrap() {
            seed_dirs.push(sd.unwrap().path());
        }
    }
    assert_eq!(seed_dirs.len(), 1);
    let released = fs::read_to_string(seed_dirs[0].join("policies_released.csv")).unwrap();
    assert_eq!(
        released.lines().next().unwrap(),
        "PolicyID,HouseValue,HouseAge,WallType,AreaRisk,CreditScore"
    );
    assert_eq!(released.lines().count(), 241);
    let manifest = fs::read_to_string(seed_dirs[0].join("manifest.json")).unwrap();
    assert!(manifest.contains("splitmix64-v1"));
}

#[test]
fn simulate_emits_claims_audit() {
    let dir = temp_dir("simulate");
    let config = tiny_config_file(&dir);
    let output = bin()
        .args(["simulate", "--config"])
        .arg(&config)
        .args(["--out"])
        .arg(dir.join("out"))
        .arg("--claims")
        .output()
        .unwrap();
    run_ok(&output);
    let mut found_claims = false;
    let mut found_full = false;
    for hash_dir in fs::read_dir(dir.join("out")).unwrap() {
        for sd in fs::read_dir(hash_dir.unwrap().path()).unwrap() {
            let sd = sd.unwrap().path();
            found_full |= sd.join("policies_full.csv").exists();
            let claims = sd.join("claims.jsonl");
            if claims.exists() {
                found_claims = true;
                for line in fs::read_to_string(&claims).unwrap().lines() {
                    let v: serde_json::Value = serde_json::from_str(line).unwrap();
                    assert!(v["policy_id"].is_string());
                    assert!(v["loss"].as_f64().unwrap() > 0.0);
                }
            }
        }
    }
    assert!(found_full && found_claims);
}

#[test]
fn run_is_reproducible_and_filterable() {
    let dir = temp_dir("run");
    let config = tiny_config_file(&dir);
    let out_a = dir.join("a");
    let out_b = dir.join("b");
    for out in [&out_a, &out_b] {
        let output = bin()
            .args(["run", "--config"])
            .arg(&config)
            .args(["--tier", "tabular_only", "--tier", "oracle", "--out"])
            .arg(out)
            .output()
            .unwrap();
        run_ok(&output);
        assert!(String::from_utf8_lossy(&output.stdout).contains("oracle"));
    }
    let report = |root: &PathBuf| {
        let hash_dir = fs::read_dir(root).unwrap().next().unwrap().unwrap().path();
        fs::read(hash_dir.join("report.json")).unwrap()
    };
    assert_eq!(
        report(&out_a),
        report(&out_b),
        "reports must be byte-identical"
    );
    let parsed: serde_json::Value = serde_json::from_slice(&report(&out_a)).unwrap();
    assert_eq!(
        parsed["seed_reports"][0]["rows"].as_array().unwrap().len(),
        2
    );
}

#[test]
fn score_round_trip_and_exit_codes() {
    let dir = temp_dir("score");
    let answers = dir.join("answers.csv");
    fs::write(&answers, "PolicyID,NextYearLoss\nA,10.00\nB,0.00\nC,5.00\n").unwrap();
    let preds = dir.join("preds.csv");
    fs::write(&preds, "PolicyID,Prediction\nC,5.0\nB,0.1\nA,10.0\n").unwrap();

    let output = bin()
        .args(["score", "--predictions"])
        .arg(&preds)
        .arg("--answers")
        .arg(&answers)
        .output()
        .unwrap();
    run_ok(&output);
    let v: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    assert!((v["gini"]["normalized"].as_f64().unwrap() - 1.0).abs() < 1e-12);

    // Mismatched ids: data-validation error, exit 3.
    let bad = dir.join("bad.csv");
    fs::write(&bad, "PolicyID,Prediction\nA,1.0\nB,2.0\nZ,3.0\n").unwrap();
    let output = bin()
        .args(["score", "--predictions"])
        .arg(&bad)
        .arg("--answers")
        .arg(&answers)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3));

    // Constant truths: undefined metric, exit 4.
    let flat = dir.join("flat.csv");
    fs::write(&flat, "PolicyID,NextYearLoss\nA,1.00\nB,1.00\nC,1.00\n").unwrap();
    let output = bin()
        .args(["score", "--predictions"])
        .arg(&preds)
        .arg("--answers")
        .arg(&flat)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(4));

    // Bad tie policy name: config error, exit 2.
    let output = bin()
        .args(["score", "--predictions"])
        .arg(&preds)
        .arg("--answers")
        .arg(&answers)
        .args(["--tie-policy", "bogus"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn config_errors_exit_2() {
    let dir = temp_dir("bad-config");
    let path = dir.join("broken.json");
    fs::write(&path, "{ not json").unwrap();
    let output = bin()
        .args(["run", "--config"])
        .arg(&path)
        .args(["--out"])
        .arg(dir.join("out"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));

    // Unknown tier filter is also a config error.
    let config = tiny_config_file(&dir);
    let output = bin()
        .args(["run", "--config"])
        .arg(&config)
        .args(["--tier", "nonsense", "--out"])
        .arg(dir.join("out"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn report_subcommand_merges_seed_batches() {
    let dir = temp_dir("report");
    let config = tiny_config_file(&dir);
    let mut report_paths = Vec::new();
    for seed in ["11", "12"] {
        let out = dir.join(format!("out-{seed}"));
        let output = bin()
            .args(["run", "--config"])
            .arg(&config)
            .args(["--seed", seed, "--out"])
            .arg(&out)
            .output()
            .unwrap();
        run_ok(&output);
        let hash_dir = fs::read_dir(&out).unwrap().next().unwrap().unwrap().path();
        report_paths.push(hash_dir.join("report.json"));
    }
    // Same seed list (after --seed override the configs differ), so merging
    // reports from different effective configs must fail.
    let output = bin().arg("report").args(&report_paths).output().unwrap();
    assert_eq!(output.status.code(), Some(3));

    // Merging a report with itself succeeds and prints the table.
    let output = bin().arg("report").arg(&report_paths[0]).output().unwrap();
    run_ok(&output);
    assert!(String::from_utf8_lossy(&output.stdout).contains("Normalized Gini"));
}
