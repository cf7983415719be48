//! `roofbench` command-line interface.
//!
//! Exit codes: 0 success, 2 config error, 3 data-validation error,
//! 4 undefined metric, 1 other failures.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use roofbench_core::channels::{self, DescriptorTable};
use roofbench_core::error::{Error, Result};
use roofbench_core::harness::{self, ExperimentConfig};
use roofbench_core::loss;
use roofbench_core::metrics::TiePolicy;
use roofbench_core::policy::{self, Visibility};
use roofbench_core::tiers::TierName;

#[derive(Parser)]
#[command(
    name = "roofbench",
    about = "Seed-reproducible property-insurance benchmark: generate data, run the tier comparison, score submissions",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Experiment config file (JSON); defaults to the built-in configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed; repeatable. Overrides the config's seed list.
    #[arg(long)]
    seed: Vec<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Run only the named tiers; repeatable.
    #[arg(long)]
    tier: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate policy tables and the dataset manifest.
    Generate(CommonArgs),
    /// Generate and simulate losses; writes train/test/answers files.
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        /// Also write a per-claim audit file (claims.jsonl).
        #[arg(long)]
        claims: bool,
    },
    /// Emit the prompt manifest and the roof information channels.
    Channels(CommonArgs),
    /// Run the full experiment and write the evaluation report.
    Run(CommonArgs),
    /// Score a predictions CSV against an answers CSV.
    Score {
        /// Predictions file ("PolicyID,Prediction").
        #[arg(long)]
        predictions: PathBuf,
        /// Answers file ("PolicyID,NextYearLoss").
        #[arg(long)]
        answers: PathBuf,
        /// Tie policy: stable_index or average_extremes.
        #[arg(long, default_value = "stable_index")]
        tie_policy: String,
    },
    /// Aggregate previously written report.json files.
    Report {
        /// Report files to merge; seed sets are combined.
        reports: Vec<PathBuf>,
    },
    /// Print the default experiment config as JSON.
    Config,
}

fn effective_config(common: &CommonArgs) -> Result<ExperimentConfig> {
    let mut config = match &common.config {
        Some(path) => harness::load_config(path)?,
        None => ExperimentConfig::default(),
    };
    if !common.seed.is_empty() {
        config.seeds = common.seed.clone();
    }
    let keep: Vec<TierName> = common
        .tier
        .iter()
        .map(|s| TierName::parse(s))
        .collect::<Result<_>>()?;
    config.filter_tiers(&keep)?;
    config.validate()?;
    Ok(config)
}

fn seed_dir(config: &ExperimentConfig, out: &Path, seed: u64) -> Result<PathBuf> {
    let dir = out.join(config.fingerprint()).join(format!("seed-{seed}"));
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    Ok(dir)
}

fn cmd_generate(common: &CommonArgs) -> Result<()> {
    let config = effective_config(common)?;
    for &seed in &config.seeds {
        let mut gen = config.generation.clone();
        gen.master_seed = seed;
        let mut records = policy::generate_policies(&gen)?;
        policy::assign_roof_health(&mut records, &gen.thresholds)?;
        let dir = seed_dir(&config, &common.out, seed)?;
        policy::export_policy_table(
            &records,
            dir.join("policies_released.csv"),
            Visibility::Released,
        )?;
        policy::DatasetManifest::new(config.fingerprint(), seed, records.len())
            .write(dir.join("manifest.json"))?;
        eprintln!(
            "seed {seed}: {} policies -> {}",
            records.len(),
            dir.display()
        );
    }
    Ok(())
}

fn cmd_simulate(common: &CommonArgs, claims: bool) -> Result<()> {
    let config = effective_config(common)?;
    for &seed in &config.seeds {
        let ds = harness::build_dataset(&config, seed)?;
        let dir = seed_dir(&config, &common.out, seed)?;
        policy::export_policy_table(&ds.records, dir.join("policies_full.csv"), Visibility::Full)?;
        if claims {
            let outcomes = loss::simulate_losses(
                &ds.records,
                &config.generation.frequency_coeffs,
                &config.generation.severity_coeffs,
                seed,
            )?;
            loss::write_claims_jsonl(&outcomes, dir.join("claims.jsonl"))?;
        }
        eprintln!("seed {seed}: losses simulated -> {}", dir.display());
    }
    Ok(())
}

fn cmd_channels(common: &CommonArgs) -> Result<()> {
    let config = effective_config(common)?;
    for &seed in &config.seeds {
        let mut gen = config.generation.clone();
        gen.master_seed = seed;
        let mut records = policy::generate_policies(&gen)?;
        policy::assign_roof_health(&mut records, &gen.thresholds)?;
        let dir = seed_dir(&config, &common.out, seed)?;
        let prompts = channels::generate_prompts(&records, &DescriptorTable::default(), seed)?;
        channels::write_prompt_manifest(&prompts, dir.join("prompts.jsonl"))?;
        let chan_dir = dir.join("channels");
        std::fs::create_dir_all(&chan_dir).map_err(|e| Error::io(&chan_dir, e))?;
        for tier in &config.tiers {
            let outputs = match (tier.name, &tier.channel) {
                (TierName::TrueLabel, _) => channels::true_label_channel(&records)?,
                (
                    TierName::NoisyLabel,
                    Some(roofbench_core::ChannelConfig::NoisyLabel {
                        target_correlation,
                        accuracy,
                        confusion_mode,
                    }),
                ) => {
                    let accuracy = match (accuracy, target_correlation) {
                        (Some(a), _) => *a,
                        (None, Some(target)) => {
                            let mut counts = [0usize; 3];
                            for rec in &records {
                                counts[rec.roof_health()?.ordinal()] += 1;
                            }
                            let n = records.len() as f64;
                            channels::calibrate_labeler(
                                *target,
                                *confusion_mode,
                                &counts.map(|c| c as f64 / n),
                                seed,
                            )?
                        }
                        (None, None) => continue,
                    };
                    channels::noisy_label_channel(&records, accuracy, *confusion_mode, seed)?
                }
                (
                    TierName::EmbeddingFeatures,
                    Some(roofbench_core::ChannelConfig::Embedding {
                        dim,
                        class_separation,
                        noise_sigma,
                    }),
                ) => channels::embedding_channel(
                    &records,
                    *dim,
                    *class_separation,
                    *noise_sigma,
                    seed,
                )?,
                (
                    TierName::ClusterLabels,
                    Some(roofbench_core::ChannelConfig::Cluster {
                        dim,
                        class_separation,
                        noise_sigma,
                        k,
                    }),
                ) => {
                    let embeddings = channels::embedding_channel(
                        &records,
                        *dim,
                        *class_separation,
                        *noise_sigma,
                        seed,
                    )?;
                    channels::cluster_channel(&embeddings, *k, seed)?
                }
                _ => continue,
            };
            if let Some(first) = outputs.first() {
                let name = first.channel_name.clone();
                channels::write_channel_csv(&outputs, chan_dir.join(format!("{name}.csv")))?;
            }
        }
        eprintln!("seed {seed}: prompts and channels -> {}", dir.display());
    }
    Ok(())
}

fn cmd_run(common: &CommonArgs) -> Result<()> {
    let config = effective_config(common)?;
    let artifacts = harness::run_experiment(&config, &common.out)?;
    print!("{}", harness::render_report_table(&artifacts.report));
    eprintln!("report: {}", artifacts.report_path.display());
    Ok(())
}

fn parse_tie_policy(s: &str) -> Result<TiePolicy> {
    match s {
        "stable_index" => Ok(TiePolicy::StableIndex),
        "average_extremes" => Ok(TiePolicy::AverageExtremes),
        other => Err(Error::Config(format!(
            "unknown tie policy {other:?} (expected stable_index or average_extremes)"
        ))),
    }
}

fn cmd_score(predictions: &PathBuf, answers: &PathBuf, tie_policy: &str) -> Result<()> {
    let tie = parse_tie_policy(tie_policy)?;
    let score = harness::score_submission(predictions, answers, tie)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&score).expect("score serializes")
    );
    Ok(())
}

fn cmd_report(reports: &[PathBuf]) -> Result<()> {
    let merged = harness::aggregate_reports(reports)?;
    print!("{}", harness::render_report_table(&merged));
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Generate(common) => cmd_generate(common),
        Command::Simulate { common, claims } => cmd_simulate(common, *claims),
        Command::Channels(common) => cmd_channels(common),
        Command::Run(common) => cmd_run(common),
        Command::Score {
            predictions,
            answers,
            tie_policy,
        } => cmd_score(predictions, answers, tie_policy),
        Command::Report { reports } => cmd_report(reports),
        Command::Config => {
            let config = ExperimentConfig::default();
            println!(
                "{}",
                serde_json::to_string_pretty(&config).expect("config serializes")
            );
            Ok(())
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(&cli) {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}
