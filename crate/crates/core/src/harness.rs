//! Experiment orchestration: configuration, dataset lifecycle, the tier
//! comparison, submission scoring, and aggregate reporting.
//!
//! Output layout: one directory per config fingerprint, one subdirectory per
//! seed. Everything written here is byte-stable for a fixed config except
//! `manifest.json` (which carries a wall-clock timestamp) and the
//! `timings.json` sidecar.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels;
use crate::distributions::{rng::stable_hash_hex, SeedSpec, PRNG_ID};
use crate::error::{Error, Result};
use crate::forest::ForestParams;
use crate::loss;
use crate::metrics::{self, CorrelationKind, GiniResult, TiePolicy};
use crate::policy::{
    self, export_policy_table, DatasetManifest, GenerationConfig, PolicyRecord, Visibility,
};
use crate::tiers::{self, ChannelConfig, SplitDataset, TierName, TierSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitRule {
    /// First `n_train` generated policies train; the rest are held out.
    FirstN,
    /// Seeded shuffle, then first `n_train` train / last `n_test` test.
    SeededShuffle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitConfig {
    pub n_train: usize,
    pub n_test: usize,
    pub split_rule: SplitRule,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            n_train: 1000,
            n_test: 1000,
            split_rule: SplitRule::SeededShuffle,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct MetricOptions {
    pub tie_policy: TiePolicy,
    pub correlation: CorrelationKind,
}

/// The whole experiment: every constant of the generative process and the
/// comparison appears here by name, so the shipped default config is the
/// complete specification of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub generation: GenerationConfig,
    pub split: SplitConfig,
    pub tiers: Vec<TierSpec>,
    pub forest: ForestParams,
    pub metrics: MetricOptions,
    /// Master seeds; each runs as an independent job.
    pub seeds: Vec<u64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            generation: GenerationConfig::default(),
            split: SplitConfig::default(),
            tiers: default_tiers(),
            forest: ForestParams::default(),
            metrics: MetricOptions::default(),
            seeds: vec![0, 1, 2, 3, 4],
        }
    }
}

/// The six standard comparison tiers.
pub fn default_tiers() -> Vec<TierSpec> {
    vec![
        TierSpec::tabular_only(),
        TierSpec {
            name: TierName::ClusterLabels,
            encoding: Default::default(),
            // Weak embeddings: the cluster ids carry only partial roof
            // information, mirroring clusters dominated by style and color.
            channel: Some(ChannelConfig::Cluster {
                dim: 32,
                class_separation: 1.2,
                noise_sigma: 1.0,
                k: 3,
            }),
        },
        TierSpec {
            name: TierName::EmbeddingFeatures,
            encoding: Default::default(),
            channel: Some(ChannelConfig::Embedding {
                dim: 32,
                class_separation: 4.0,
                noise_sigma: 1.0,
            }),
        },
        TierSpec {
            name: TierName::NoisyLabel,
            encoding: Default::default(),
            channel: Some(ChannelConfig::NoisyLabel {
                target_correlation: Some(0.8062),
                accuracy: None,
                confusion_mode: Default::default(),
            }),
        },
        TierSpec::true_label(),
        TierSpec::oracle(),
    ]
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.generation.validate()?;
        if self.split.n_train + self.split.n_test != self.generation.n_policies {
            return Err(Error::Config(format!(
                "split {} + {} must equal n_policies {}",
                self.split.n_train, self.split.n_test, self.generation.n_policies
            )));
        }
        if self.split.n_train == 0 || self.split.n_test == 0 {
            return Err(Error::Config("both split sides must be nonempty".into()));
        }
        if self.tiers.is_empty() {
            return Err(Error::Config("at least one tier is required".into()));
        }
        let mut names = std::collections::HashSet::new();
        for tier in &self.tiers {
            tier.validate()?;
            if !names.insert(tier.name) {
                return Err(Error::Config(format!("duplicate tier {}", tier.name)));
            }
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("at least one seed is required".into()));
        }
        Ok(())
    }

    /// Stable fingerprint over the canonical JSON form; changes whenever any
    /// config field changes.
    pub fn fingerprint(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        stable_hash_hex(canonical.as_bytes())
    }

    /// Keep only the named tiers (order preserved).
    pub fn filter_tiers(&mut self, keep: &[TierName]) -> Result<()> {
        if keep.is_empty() {
            return Ok(());
        }
        for name in keep {
            if !self.tiers.iter().any(|t| t.name == *name) {
                return Err(Error::Config(format!("tier {name} is not in the config")));
            }
        }
        self.tiers.retain(|t| keep.contains(&t.name));
        Ok(())
    }
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let path = path.as_ref();
    let body = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let config: ExperimentConfig = serde_json::from_str(&body)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    config.validate()?;
    Ok(config)
}

pub fn write_config(config: &ExperimentConfig, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut body = serde_json::to_string_pretty(config).expect("config serializes");
    body.push('\n');
    fs::write(path, body).map_err(|e| Error::io(path, e))
}

/// One scored tier for one seed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TierRow {
    pub tier: TierName,
    pub normalized_gini: f64,
    pub raw_gini: f64,
    /// Absolute change in normalized Gini when the tie policy is switched
    /// between stable-index and average-extremes.
    pub tie_sensitivity: f64,
    pub channel_correlation: Option<f64>,
    pub channel_correlation_aligned: Option<f64>,
    pub channel_params_hash: Option<String>,
    pub calibrated_accuracy: Option<f64>,
    pub substitute_notice: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeedReport {
    pub seed: u64,
    pub rows: Vec<TierRow>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeedFailure {
    pub seed: u64,
    pub error: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TierAggregate {
    pub tier: TierName,
    pub n_seeds: usize,
    pub mean_normalized_gini: f64,
    pub std_normalized_gini: f64,
    pub mean_channel_correlation: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub config_fingerprint: String,
    pub prng: String,
    pub tie_policy: TiePolicy,
    pub correlation_kind: CorrelationKind,
    pub seeds: Vec<u64>,
    pub seed_reports: Vec<SeedReport>,
    pub failures: Vec<SeedFailure>,
    pub aggregate: Vec<TierAggregate>,
    /// Seeds whose per-seed tier ordering deviates from the expected ladder.
    pub ladder_flags: Vec<String>,
}

/// Wall-clock sidecar; never part of the deterministic report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunTimings {
    pub total_ms: u128,
    pub seeds: Vec<(u64, u128)>,
}

pub struct ExperimentArtifacts {
    pub report: EvaluationReport,
    pub run_dir: PathBuf,
    pub report_path: PathBuf,
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

/// Train/test indices for one generated batch.
pub fn split_indices(n: usize, split: &SplitConfig, master_seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut order: Vec<usize> = (0..n).collect();
    if split.split_rule == SplitRule::SeededShuffle {
        SeedSpec::new(master_seed, "split:shuffle")
            .rng()
            .shuffle(&mut order);
    }
    let train = order[..split.n_train].to_vec();
    let test = order[split.n_train..split.n_train + split.n_test].to_vec();
    (train, test)
}

pub const TRAIN_HEADER: &str =
    "PolicyID,HouseValue,HouseAge,WallType,AreaRisk,CreditScore,NextYearLoss";
pub const PREDICTIONS_HEADER: &str = "PolicyID,Prediction";
pub const ANSWERS_HEADER: &str = "PolicyID,NextYearLoss";

fn write_train_csv(records: &[PolicyRecord], idx: &[usize], path: &Path) -> Result<()> {
    let mut out = String::from(TRAIN_HEADER);
    out.push('\n');
    for &i in idx {
        let rec = &records[i];
        let loss = rec
            .next_year_loss
            .ok_or_else(|| Error::Usage(format!("{}: loss not simulated", rec.policy_id)))?;
        out.push_str(&policy::released_row(rec));
        out.push_str(&format!(",{}\n", policy::fmt_currency(loss)));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

fn write_test_csv(records: &[PolicyRecord], idx: &[usize], path: &Path) -> Result<()> {
    let mut out = String::from(policy::RELEASED_HEADER);
    out.push('\n');
    for &i in idx {
        out.push_str(&policy::released_row(&records[i]));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

fn write_answers_csv(records: &[PolicyRecord], idx: &[usize], path: &Path) -> Result<()> {
    let mut out = String::from(ANSWERS_HEADER);
    out.push('\n');
    for &i in idx {
        let rec = &records[i];
        let loss = rec
            .next_year_loss
            .ok_or_else(|| Error::Usage(format!("{}: loss not simulated", rec.policy_id)))?;
        out.push_str(&format!(
            "{},{}\n",
            rec.policy_id,
            policy::fmt_currency(loss)
        ));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn write_predictions_csv(predictions: &[(String, f64)], path: &Path) -> Result<()> {
    let mut out = String::from(PREDICTIONS_HEADER);
    out.push('\n');
    for (id, pred) in predictions {
        out.push_str(&format!("{id},{}\n", policy::fmt_feature(*pred)));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

fn csv_header(path: &Path) -> Result<Vec<String>> {
    let body = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(body
        .lines()
        .next()
        .unwrap_or("")
        .split(',')
        .map(|s| s.to_string())
        .collect())
}

/// Schema scan run after every dataset write: the test file must carry
/// exactly the released columns and the train file only adds NextYearLoss.
fn scan_dataset_hygiene(train_path: &Path, test_path: &Path) -> Result<()> {
    let released: Vec<&str> = policy::RELEASED_HEADER.split(',').collect();
    let test_cols = csv_header(test_path)?;
    if test_cols != released {
        return Err(Error::Validation(format!(
            "test file columns {test_cols:?} must be exactly the released schema"
        )));
    }
    let train_cols = csv_header(train_path)?;
    let expected: Vec<&str> = TRAIN_HEADER.split(',').collect();
    if train_cols != expected {
        return Err(Error::Validation(format!(
            "train file columns {train_cols:?} must be the released schema plus NextYearLoss"
        )));
    }
    for col in policy::HIDDEN_COLUMNS {
        if col != "NextYearLoss" && (train_cols.iter().any(|c| c == col)) {
            return Err(Error::Validation(format!(
                "hidden column {col} leaked into train file"
            )));
        }
        if test_cols.iter().any(|c| c == col) {
            return Err(Error::Validation(format!(
                "hidden column {col} leaked into test file"
            )));
        }
    }
    Ok(())
}

/// Generate, assign, simulate, and split one seed's dataset.
pub fn build_dataset(config: &ExperimentConfig, seed: u64) -> Result<SplitDataset> {
    let mut gen = config.generation.clone();
    gen.master_seed = seed;
    let mut records = policy::generate_policies(&gen)?;
    // Percentiles are taken over the full batch before splitting.
    policy::assign_roof_health(&mut records, &gen.thresholds)?;
    let outcomes =
        loss::simulate_losses(&records, &gen.frequency_coeffs, &gen.severity_coeffs, seed)?;
    loss::apply_losses(&mut records, &outcomes)?;
    let (train_idx, test_idx) = split_indices(records.len(), &config.split, seed);
    let ds = SplitDataset {
        records,
        train_idx,
        test_idx,
    };
    ds.validate()?;
    Ok(ds)
}

fn run_seed(
    config: &ExperimentConfig,
    seed: u64,
    fingerprint: &str,
    seed_dir: &Path,
) -> Result<SeedReport> {
    create_dir(seed_dir)?;
    let ds = build_dataset(config, seed)?;
    let records = &ds.records;

    // Dataset artifacts.
    DatasetManifest::new(fingerprint, seed, records.len()).write(seed_dir.join("manifest.json"))?;
    export_policy_table(
        records,
        seed_dir.join("policies_full.csv"),
        Visibility::Full,
    )?;
    let train_path = seed_dir.join("train.csv");
    let test_path = seed_dir.join("test.csv");
    write_train_csv(records, &ds.train_idx, &train_path)?;
    write_test_csv(records, &ds.test_idx, &test_path)?;
    write_answers_csv(records, &ds.test_idx, &seed_dir.join("answers.csv"))?;
    scan_dataset_hygiene(&train_path, &test_path)?;

    let prompts = channels::generate_prompts(records, &channels::DescriptorTable::default(), seed)?;
    channels::write_prompt_manifest(&prompts, seed_dir.join("prompts.jsonl"))?;

    let predictions_dir = seed_dir.join("predictions");
    create_dir(&predictions_dir)?;
    let channels_dir = seed_dir.join("channels");
    create_dir(&channels_dir)?;

    let y_test = ds.test_truths()?;
    let mut rows = Vec::with_capacity(config.tiers.len());
    for tier in &config.tiers {
        let run = tiers::run_tier(
            &ds,
            tier,
            &config.forest,
            &config.generation.frequency_coeffs,
            &config.generation.severity_coeffs,
            config.metrics.correlation,
            seed,
        )?;
        write_predictions_csv(
            &run.predictions,
            &predictions_dir.join(format!("{}.csv", tier.name)),
        )?;
        if !run.channel_outputs.is_empty() {
            let name = run.channel_outputs[0].channel_name.clone();
            channels::write_channel_csv(
                &run.channel_outputs,
                channels_dir.join(format!("{name}.csv")),
            )?;
        }
        let preds: Vec<f64> = run.predictions.iter().map(|(_, p)| *p).collect();
        let gini = metrics::normalized_gini(&y_test, &preds, config.metrics.tie_policy)?;
        let other_policy = match config.metrics.tie_policy {
            TiePolicy::StableIndex => TiePolicy::AverageExtremes,
            TiePolicy::AverageExtremes => TiePolicy::StableIndex,
        };
        let gini_other = metrics::normalized_gini(&y_test, &preds, other_policy)?;
        rows.push(TierRow {
            tier: tier.name,
            normalized_gini: gini.normalized,
            raw_gini: gini.raw,
            tie_sensitivity: (gini.normalized - gini_other.normalized).abs(),
            channel_correlation: run.metadata.channel_correlation,
            channel_correlation_aligned: run.metadata.channel_correlation_aligned,
            channel_params_hash: run.metadata.channel_params_hash,
            calibrated_accuracy: run.metadata.calibrated_accuracy,
            substitute_notice: run.metadata.substitute_notice,
        });
    }
    Ok(SeedReport { seed, rows })
}

/// Mean/std aggregation across seed reports, plus per-seed ladder flags.
/// All reports must cover the same tier set.
pub fn summarize_seeds(reports: &[SeedReport]) -> Result<(Vec<TierAggregate>, Vec<String>)> {
    if reports.is_empty() {
        return Err(Error::Usage("no seed reports to summarize".into()));
    }
    let tier_names: Vec<TierName> = reports[0].rows.iter().map(|r| r.tier).collect();
    for rep in reports {
        let names: Vec<TierName> = rep.rows.iter().map(|r| r.tier).collect();
        if names != tier_names {
            return Err(Error::Usage(format!(
                "seed {} covers tiers {names:?}, expected {tier_names:?}",
                rep.seed
            )));
        }
    }
    let mut aggregate = Vec::with_capacity(tier_names.len());
    for (pos, &tier) in tier_names.iter().enumerate() {
        let ginis: Vec<f64> = reports
            .iter()
            .map(|r| r.rows[pos].normalized_gini)
            .collect();
        let n = ginis.len() as f64;
        let mean = ginis.iter().sum::<f64>() / n;
        let std = if ginis.len() > 1 {
            (ginis.iter().map(|g| (g - mean) * (g - mean)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        let corrs: Vec<f64> = reports
            .iter()
            .filter_map(|r| r.rows[pos].channel_correlation)
            .collect();
        let mean_corr = if corrs.is_empty() {
            None
        } else {
            Some(corrs.iter().sum::<f64>() / corrs.len() as f64)
        };
        aggregate.push(TierAggregate {
            tier,
            n_seeds: ginis.len(),
            mean_normalized_gini: mean,
            std_normalized_gini: std,
            mean_channel_correlation: mean_corr,
        });
    }

    // Per-seed ladder check, only when the six standard tiers all ran.
    let mut flags = Vec::new();
    if TierName::ALL.iter().all(|t| tier_names.contains(t)) {
        for rep in reports {
            let gini = |name: TierName| -> f64 {
                rep.rows
                    .iter()
                    .find(|r| r.tier == name)
                    .unwrap()
                    .normalized_gini
            };
            let tabular = gini(TierName::TabularOnly);
            let cluster = gini(TierName::ClusterLabels);
            let noisy = gini(TierName::NoisyLabel);
            let embed = gini(TierName::EmbeddingFeatures);
            let truth = gini(TierName::TrueLabel);
            let oracle = gini(TierName::Oracle);
            let mut problems = Vec::new();
            if tabular >= cluster {
                problems.push("tabular_only >= cluster_labels");
            }
            if cluster >= noisy.min(embed) {
                problems.push("cluster_labels >= min(noisy_label, embedding_features)");
            }
            if noisy.max(embed) >= truth {
                problems.push("max(noisy_label, embedding_features) >= true_label");
            }
            if truth > oracle + 0.01 {
                problems.push("true_label > oracle + 0.01");
            }
            for row in &rep.rows {
                if row.tier != TierName::Oracle && row.normalized_gini > oracle + 0.01 {
                    problems.push("a model tier beat the oracle beyond slack");
                    break;
                }
            }
            if !problems.is_empty() {
                flags.push(format!("seed {}: {}", rep.seed, problems.join("; ")));
            }
        }
    }
    Ok((aggregate, flags))
}

fn fmt_opt_corr(c: Option<f64>) -> String {
    match c {
        Some(v) => format!("{v:.4}"),
        None => "-".to_string(),
    }
}

/// Plain-text table mirroring the tier-comparison layout: baseline group,
/// image-information group, oracle group.
pub fn render_report_table(report: &EvaluationReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "Tier comparison over {} seed(s)   [config {}  prng {}]\n",
        report.seed_reports.len(),
        report.config_fingerprint,
        report.prng
    ));
    out.push_str(&format!(
        "{:<22} {:>8} {:>18} {:>10}\n",
        "Method", "Corr.", "Normalized Gini", "Std"
    ));
    let hr = "-".repeat(62);
    let group = |out: &mut String, title: &str| {
        out.push_str(&hr);
        out.push('\n');
        out.push_str(title);
        out.push('\n');
    };
    let row = |out: &mut String, agg: &TierAggregate| {
        out.push_str(&format!(
            "  {:<20} {:>8} {:>18.4} {:>10.4}\n",
            agg.tier.to_string(),
            fmt_opt_corr(agg.mean_channel_correlation),
            agg.mean_normalized_gini,
            agg.std_normalized_gini
        ));
    };
    let find = |name: TierName| report.aggregate.iter().find(|a| a.tier == name);
    group(&mut out, "Tabular baseline");
    if let Some(a) = find(TierName::TabularOnly) {
        row(&mut out, a);
    }
    group(&mut out, "Image-information tiers (emulated channels)");
    for name in [
        TierName::ClusterLabels,
        TierName::EmbeddingFeatures,
        TierName::NoisyLabel,
        TierName::TrueLabel,
    ] {
        if let Some(a) = find(name) {
            row(&mut out, a);
        }
    }
    group(&mut out, "Upper bound");
    if let Some(a) = find(TierName::Oracle) {
        row(&mut out, a);
    }
    out.push_str(&hr);
    out.push('\n');

    // Substitution notices, once per tier.
    let mut notices: BTreeMap<String, String> = BTreeMap::new();
    for rep in &report.seed_reports {
        for r in &rep.rows {
            if let Some(n) = &r.substitute_notice {
                notices.insert(r.tier.to_string(), n.clone());
            }
        }
    }
    if !notices.is_empty() {
        out.push_str("Notes:\n");
        for (tier, notice) in notices {
            out.push_str(&format!("  {tier}: {notice}\n"));
        }
    }
    if !report.ladder_flags.is_empty() {
        out.push_str("Ladder deviations:\n");
        for flag in &report.ladder_flags {
            out.push_str(&format!("  {flag}\n"));
        }
    }
    if !report.failures.is_empty() {
        out.push_str("Failed seeds:\n");
        for f in &report.failures {
            out.push_str(&format!("  seed {}: {}\n", f.seed, f.error));
        }
    }
    out
}

/// Run the full experiment: every seed, every tier, all artifacts.
///
/// Seeds run as independent parallel jobs; a failing seed is recorded in the
/// report while the others proceed. The call errors only when every seed
/// fails or an artifact cannot be written.
pub fn run_experiment(
    config: &ExperimentConfig,
    out_dir: impl AsRef<Path>,
) -> Result<ExperimentArtifacts> {
    config.validate()?;
    let fingerprint = config.fingerprint();
    let run_dir = out_dir.as_ref().join(&fingerprint);
    create_dir(&run_dir)?;
    write_config(config, run_dir.join("config.json"))?;

    let started = Instant::now();
    let outcomes: Vec<(u64, std::result::Result<SeedReport, String>, u128)> = config
        .seeds
        .par_iter()
        .map(|&seed| {
            let seed_started = Instant::now();
            let seed_dir = run_dir.join(format!("seed-{seed}"));
            let result = run_seed(config, seed, &fingerprint, &seed_dir).map_err(|e| e.to_string());
            (seed, result, seed_started.elapsed().as_millis())
        })
        .collect();

    let mut seed_reports = Vec::new();
    let mut failures = Vec::new();
    let mut timings = Vec::new();
    for (seed, outcome, ms) in outcomes {
        timings.push((seed, ms));
        match outcome {
            Ok(rep) => seed_reports.push(rep),
            Err(error) => failures.push(SeedFailure { seed, error }),
        }
    }
    if seed_reports.is_empty() {
        let first = failures
            .first()
            .map(|f| f.error.clone())
            .unwrap_or_else(|| "no seeds ran".into());
        return Err(Error::Validation(format!(
            "every seed failed; first error: {first}"
        )));
    }
    let (aggregate, ladder_flags) = summarize_seeds(&seed_reports)?;
    let report = EvaluationReport {
        config_fingerprint: fingerprint,
        prng: PRNG_ID.to_string(),
        tie_policy: config.metrics.tie_policy,
        correlation_kind: config.metrics.correlation,
        seeds: config.seeds.clone(),
        seed_reports,
        failures,
        aggregate,
        ladder_flags,
    };

    let report_path = run_dir.join("report.json");
    let mut body = serde_json::to_string_pretty(&report).expect("report serializes");
    body.push('\n');
    fs::write(&report_path, body).map_err(|e| Error::io(&report_path, e))?;
    let table_path = run_dir.join("report.txt");
    fs::write(&table_path, render_report_table(&report)).map_err(|e| Error::io(&table_path, e))?;
    let timings_path = run_dir.join("timings.json");
    let sidecar = RunTimings {
        total_ms: started.elapsed().as_millis(),
        seeds: timings,
    };
    fs::write(
        &timings_path,
        serde_json::to_string_pretty(&sidecar).expect("timings serialize"),
    )
    .map_err(|e| Error::io(&timings_path, e))?;

    Ok(ExperimentArtifacts {
        report,
        run_dir,
        report_path,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ScoreReport {
    pub gini: GiniResult,
    pub n: usize,
    pub warnings: Vec<String>,
}

fn read_two_column_csv(path: &Path, expect_first: &str) -> Result<Vec<(String, f64)>> {
    let body = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = body.lines();
    let header = lines.next().unwrap_or("");
    let cols: Vec<&str> = header.split(',').collect();
    if cols.len() != 2 || cols[0] != expect_first {
        return Err(Error::Validation(format!(
            "{}: expected a two-column CSV starting with {expect_first}, got {header:?}",
            path.display()
        )));
    }
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let Some((id, value)) = line.split_once(',') else {
            return Err(Error::Validation(format!(
                "{}: line {} is not two columns",
                path.display(),
                lineno + 2
            )));
        };
        let value: f64 = value.trim().parse().map_err(|_| {
            Error::Validation(format!(
                "{}: line {} has a non-numeric value {value:?}",
                path.display(),
                lineno + 2
            ))
        })?;
        rows.push((id.to_string(), value));
    }
    Ok(rows)
}

fn list_some(ids: &[&String]) -> String {
    const CAP: usize = 10;
    let shown: Vec<&str> = ids.iter().take(CAP).map(|s| s.as_str()).collect();
    if ids.len() > CAP {
        format!("{} (+{} more)", shown.join(", "), ids.len() - CAP)
    } else {
        shown.join(", ")
    }
}

/// Score an external predictions file against a private answers file. The
/// join is id-based, so row order does not matter; id sets must match exactly.
pub fn score_submission(
    predictions_path: impl AsRef<Path>,
    answers_path: impl AsRef<Path>,
    tie_policy: TiePolicy,
) -> Result<ScoreReport> {
    let predictions_path = predictions_path.as_ref();
    let answers_path = answers_path.as_ref();
    let preds = read_two_column_csv(predictions_path, "PolicyID")?;
    let answers = read_two_column_csv(answers_path, "PolicyID")?;

    let mut pred_map: BTreeMap<&String, f64> = BTreeMap::new();
    let mut dupes: Vec<&String> = Vec::new();
    for (id, v) in &preds {
        if pred_map.insert(id, *v).is_some() {
            dupes.push(id);
        }
    }
    if !dupes.is_empty() {
        return Err(Error::Validation(format!(
            "duplicate prediction ids: {}",
            list_some(&dupes)
        )));
    }
    let answer_ids: std::collections::BTreeSet<&String> =
        answers.iter().map(|(id, _)| id).collect();
    if answer_ids.len() != answers.len() {
        return Err(Error::Validation(
            "duplicate ids in the answers file".into(),
        ));
    }
    let missing: Vec<&String> = answers
        .iter()
        .map(|(id, _)| id)
        .filter(|id| !pred_map.contains_key(*id))
        .collect();
    let extra: Vec<&String> = preds
        .iter()
        .map(|(id, _)| id)
        .filter(|id| !answer_ids.contains(*id))
        .collect();
    if !missing.is_empty() || !extra.is_empty() {
        let mut parts = Vec::new();
        if !missing.is_empty() {
            parts.push(format!("missing predictions for: {}", list_some(&missing)));
        }
        if !extra.is_empty() {
            parts.push(format!("unknown ids: {}", list_some(&extra)));
        }
        return Err(Error::Validation(parts.join("; ")));
    }

    let y: Vec<f64> = answers.iter().map(|(_, v)| *v).collect();
    let y_hat: Vec<f64> = answers.iter().map(|(id, _)| pred_map[id]).collect();
    let mut warnings = Vec::new();
    if y_hat.windows(2).all(|w| w[0] == w[1]) && y_hat.len() > 1 {
        warnings.push("predictions are constant: the score reflects tie handling only".to_string());
    }
    let gini = metrics::normalized_gini(&y, &y_hat, tie_policy)?;
    Ok(ScoreReport {
        n: y.len(),
        gini,
        warnings,
    })
}

/// Re-aggregate previously written report files.
pub fn aggregate_reports(paths: &[PathBuf]) -> Result<EvaluationReport> {
    if paths.is_empty() {
        return Err(Error::Usage("no report files given".into()));
    }
    let mut merged: Option<EvaluationReport> = None;
    for path in paths {
        let body = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let report: EvaluationReport = serde_json::from_str(&body)
            .map_err(|e| Error::Validation(format!("{}: {e}", path.display())))?;
        match &mut merged {
            None => merged = Some(report),
            Some(m) => {
                if m.config_fingerprint != report.config_fingerprint {
                    return Err(Error::Usage(format!(
                        "{}: config fingerprint {} does not match {}",
                        path.display(),
                        report.config_fingerprint,
                        m.config_fingerprint
                    )));
                }
                m.seed_reports.extend(report.seed_reports);
                m.failures.extend(report.failures);
                for s in report.seeds {
                    if !m.seeds.contains(&s) {
                        m.seeds.push(s);
                    }
                }
            }
        }
    }
    let mut report = merged.expect("at least one report");
    report.seed_reports.sort_by_key(|r| r.seed);
    let (aggregate, flags) = summarize_seeds(&report.seed_reports)?;
    report.aggregate = aggregate;
    report.ladder_flags = flags;
    Ok(report)
}
