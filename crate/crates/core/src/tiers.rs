//! Tier definitions and per-tier execution: each tier is one feature-assembly
//! recipe fed to the forest, except the oracle, which bypasses modeling
//! entirely.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::channels::{self, ChannelOutput, ConfusionMode};
use crate::distributions::SeedSpec;
use crate::error::{Error, Result};
use crate::forest::{fit_forest, predict_forest, FeatureMatrix, ForestParams};
use crate::loss;
use crate::metrics;
use crate::policy::{FrequencyCoeffs, PolicyRecord, RoofHealth, SeverityCoeffs, WallType};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TierName {
    TabularOnly,
    ClusterLabels,
    EmbeddingFeatures,
    NoisyLabel,
    TrueLabel,
    Oracle,
}

impl TierName {
    pub const ALL: [TierName; 6] = [
        TierName::TabularOnly,
        TierName::ClusterLabels,
        TierName::EmbeddingFeatures,
        TierName::NoisyLabel,
        TierName::TrueLabel,
        TierName::Oracle,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TierName::TabularOnly => "tabular_only",
            TierName::ClusterLabels => "cluster_labels",
            TierName::EmbeddingFeatures => "embedding_features",
            TierName::NoisyLabel => "noisy_label",
            TierName::TrueLabel => "true_label",
            TierName::Oracle => "oracle",
        }
    }

    pub fn parse(s: &str) -> Result<TierName> {
        Self::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown tier {s:?}")))
    }
}

impl fmt::Display for TierName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How a 3-level label channel enters the feature matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LabelEncoding {
    #[default]
    OneHot,
    Ordinal,
}

/// Channel configuration for the tiers that consume one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "channel", rename_all = "snake_case")]
pub enum ChannelConfig {
    /// Accuracy-calibrated noisy labeler. Exactly one of `accuracy` or
    /// `target_correlation` must be set; a target is resolved by calibration
    /// against the batch's class proportions.
    NoisyLabel {
        target_correlation: Option<f64>,
        accuracy: Option<f64>,
        confusion_mode: ConfusionMode,
    },
    /// Class-conditional synthetic embeddings.
    Embedding {
        dim: usize,
        class_separation: f64,
        noise_sigma: f64,
    },
    /// k-means cluster ids over a synthetic embedding channel.
    Cluster {
        dim: usize,
        class_separation: f64,
        noise_sigma: f64,
        k: usize,
    },
}

/// One row of the tier comparison: a named feature recipe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TierSpec {
    pub name: TierName,
    #[serde(default)]
    pub encoding: LabelEncoding,
    pub channel: Option<ChannelConfig>,
}

impl TierSpec {
    pub fn tabular_only() -> Self {
        TierSpec {
            name: TierName::TabularOnly,
            encoding: LabelEncoding::OneHot,
            channel: None,
        }
    }

    pub fn oracle() -> Self {
        TierSpec {
            name: TierName::Oracle,
            encoding: LabelEncoding::OneHot,
            channel: None,
        }
    }

    pub fn true_label() -> Self {
        TierSpec {
            name: TierName::TrueLabel,
            encoding: LabelEncoding::OneHot,
            channel: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match (self.name, &self.channel) {
            (TierName::TabularOnly | TierName::TrueLabel | TierName::Oracle, None) => Ok(()),
            (
                TierName::NoisyLabel,
                Some(ChannelConfig::NoisyLabel {
                    target_correlation,
                    accuracy,
                    ..
                }),
            ) => match (target_correlation, accuracy) {
                (Some(_), None) | (None, Some(_)) => Ok(()),
                _ => Err(Error::Config(format!(
                    "{}: set exactly one of target_correlation or accuracy",
                    self.name
                ))),
            },
            (TierName::EmbeddingFeatures, Some(ChannelConfig::Embedding { .. })) => Ok(()),
            (TierName::ClusterLabels, Some(ChannelConfig::Cluster { k, .. })) => {
                if *k < 2 {
                    Err(Error::Config(format!("{}: k must be >= 2", self.name)))
                } else {
                    Ok(())
                }
            }
            _ => Err(Error::Config(format!(
                "{}: channel configuration does not match the tier",
                self.name
            ))),
        }
    }
}

/// Policy batch with a fixed train/test split (indices into `records`).
#[derive(Debug, Clone)]
pub struct SplitDataset {
    pub records: Vec<PolicyRecord>,
    pub train_idx: Vec<usize>,
    pub test_idx: Vec<usize>,
}

impl SplitDataset {
    pub fn validate(&self) -> Result<()> {
        let mut seen = vec![false; self.records.len()];
        for &i in self.train_idx.iter().chain(&self.test_idx) {
            if i >= self.records.len() {
                return Err(Error::Validation(format!("split index {i} out of range")));
            }
            if seen[i] {
                return Err(Error::Validation(format!(
                    "policy {} appears in both train and test",
                    self.records[i].policy_id
                )));
            }
            seen[i] = true;
        }
        if self.train_idx.is_empty() || self.test_idx.is_empty() {
            return Err(Error::Usage("both split sides must be nonempty".into()));
        }
        Ok(())
    }

    pub fn test_truths(&self) -> Result<Vec<f64>> {
        self.test_idx
            .iter()
            .map(|&i| {
                self.records[i].next_year_loss.ok_or_else(|| {
                    Error::Usage(format!("{}: loss not simulated", self.records[i].policy_id))
                })
            })
            .collect()
    }
}

pub const TABULAR_COLUMNS: [&str; 5] = [
    "HouseValue",
    "HouseAge",
    "WallTypeIsWood",
    "AreaRisk",
    "CreditScore",
];

const ROOF_ONEHOT_COLUMNS: [&str; 3] = ["RoofGood", "RoofFair", "RoofBad"];

/// Assemble the tier's feature matrix over all records (no target attached).
/// Tabular columns always come first; channel columns follow in a
/// deterministic order.
pub fn assemble_features(
    records: &[PolicyRecord],
    channel: Option<&[ChannelOutput]>,
    tier: &TierSpec,
) -> Result<FeatureMatrix> {
    if tier.name == TierName::Oracle {
        return Err(Error::Usage(
            "the oracle tier does not use a feature matrix".into(),
        ));
    }
    let needs_channel = tier.name != TierName::TabularOnly;
    let channel = match (needs_channel, channel) {
        (false, _) => None,
        (true, Some(c)) => {
            if c.len() != records.len() {
                return Err(Error::Usage(format!(
                    "channel rows ({}) do not match records ({})",
                    c.len(),
                    records.len()
                )));
            }
            Some(c)
        }
        (true, None) => {
            return Err(Error::Usage(format!(
                "tier {} requires a channel output",
                tier.name
            )))
        }
    };

    let mut column_names: Vec<String> = TABULAR_COLUMNS.iter().map(|s| s.to_string()).collect();
    match tier.name {
        TierName::ClusterLabels => {
            let k = 1 + channel
                .unwrap()
                .iter()
                .map(|c| c.cluster_id.unwrap_or(0))
                .max()
                .unwrap_or(0);
            let k = k.max(2);
            match tier.encoding {
                LabelEncoding::OneHot => {
                    for j in 0..k {
                        column_names.push(format!("Cluster{j}"));
                    }
                }
                LabelEncoding::Ordinal => column_names.push("ClusterId".into()),
            }
        }
        TierName::EmbeddingFeatures => {
            let dim = channel
                .unwrap()
                .first()
                .and_then(|c| c.embedding.as_ref())
                .map(|e| e.len())
                .unwrap_or(0);
            for j in 0..dim {
                column_names.push(format!("Emb{j}"));
            }
        }
        TierName::NoisyLabel | TierName::TrueLabel => match tier.encoding {
            LabelEncoding::OneHot => {
                column_names.extend(ROOF_ONEHOT_COLUMNS.iter().map(|s| s.to_string()))
            }
            LabelEncoding::Ordinal => column_names.push("RoofCode".into()),
        },
        TierName::TabularOnly => {}
        TierName::Oracle => unreachable!(),
    }

    let n_extra = column_names.len() - TABULAR_COLUMNS.len();
    let mut rows = Vec::with_capacity(records.len());
    let mut ids = Vec::with_capacity(records.len());
    for (i, rec) in records.iter().enumerate() {
        let mut row = vec![
            rec.house_value,
            rec.house_age,
            if rec.wall_type == WallType::Wood {
                1.0
            } else {
                0.0
            },
            rec.area_risk,
            rec.credit_score as f64,
        ];
        if let Some(chan) = channel {
            let c = &chan[i];
            if c.policy_id != rec.policy_id {
                return Err(Error::Usage(format!(
                    "channel row {} does not match record {}",
                    c.policy_id, rec.policy_id
                )));
            }
            match tier.name {
                TierName::ClusterLabels => {
                    let id = c.cluster_id.ok_or_else(|| {
                        Error::Usage(format!("{}: channel lacks a cluster id", c.policy_id))
                    })?;
                    match tier.encoding {
                        LabelEncoding::OneHot => {
                            let mut onehot = vec![0.0; n_extra];
                            onehot[id] = 1.0;
                            row.extend(onehot);
                        }
                        LabelEncoding::Ordinal => row.push(id as f64),
                    }
                }
                TierName::EmbeddingFeatures => {
                    let emb = c.embedding.as_ref().ok_or_else(|| {
                        Error::Usage(format!("{}: channel lacks an embedding", c.policy_id))
                    })?;
                    if emb.len() != n_extra {
                        return Err(Error::Usage(format!(
                            "{}: embedding width {} does not match {}",
                            c.policy_id,
                            emb.len(),
                            n_extra
                        )));
                    }
                    row.extend_from_slice(emb);
                }
                TierName::NoisyLabel | TierName::TrueLabel => {
                    let label = c.predicted_label.ok_or_else(|| {
                        Error::Usage(format!("{}: channel lacks a label", c.policy_id))
                    })?;
                    match tier.encoding {
                        LabelEncoding::OneHot => {
                            let mut onehot = [0.0; 3];
                            onehot[label.ordinal()] = 1.0;
                            row.extend_from_slice(&onehot);
                        }
                        LabelEncoding::Ordinal => row.push(label.ordinal() as f64),
                    }
                }
                TierName::TabularOnly | TierName::Oracle => unreachable!(),
            }
        }
        rows.push(row);
        ids.push(rec.policy_id.clone());
    }
    FeatureMatrix::from_rows(column_names, ids, rows, None)
}

/// Everything reported about a tier besides the score.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TierMetadata {
    pub tier: TierName,
    /// Ordinal correlation between the channel output and the true roof
    /// health, measured over the whole batch; absent for tiers without a
    /// label-like channel. Cluster ids are correlated raw (unaligned).
    pub channel_correlation: Option<f64>,
    /// Diagnostic: cluster correlation after the best 3! index alignment.
    pub channel_correlation_aligned: Option<f64>,
    pub channel_params_hash: Option<String>,
    /// Present on tiers whose channel emulates an external vision pipeline.
    pub substitute_notice: Option<String>,
    /// Accuracy the labeler calibration resolved to, when applicable.
    pub calibrated_accuracy: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct TierRun {
    /// `(policy_id, prediction)` for the test rows, in test order.
    pub predictions: Vec<(String, f64)>,
    pub metadata: TierMetadata,
    /// Channel outputs used by the tier (for artifact export); empty when the
    /// tier has no channel.
    pub channel_outputs: Vec<ChannelOutput>,
}

const NOTICE_NOISY: &str = "substitute channel: accuracy-calibrated synthetic labeler standing in \
for labels extracted from images by a vision-language model";
const NOTICE_EMBEDDING: &str =
    "substitute channel: class-conditional synthetic embeddings standing \
in for image features from a pretrained vision encoder";
const NOTICE_CLUSTER: &str = "substitute channel: k-means cluster ids over class-conditional \
synthetic embeddings standing in for clustered image features";

fn truth_labels(records: &[PolicyRecord]) -> Result<Vec<RoofHealth>> {
    records.iter().map(|r| r.roof_health()).collect()
}

fn channel_label_correlation(
    records: &[PolicyRecord],
    outputs: &[ChannelOutput],
    kind: metrics::CorrelationKind,
) -> Result<f64> {
    let truth = truth_labels(records)?;
    let labels: Vec<RoofHealth> = outputs
        .iter()
        .map(|c| {
            c.predicted_label
                .ok_or_else(|| Error::Usage(format!("{}: channel lacks a label", c.policy_id)))
        })
        .collect::<Result<_>>()?;
    metrics::ordinal_correlation_with(&truth, &labels, kind)
}

fn class_proportions(records: &[PolicyRecord]) -> Result<[f64; 3]> {
    let mut counts = [0usize; 3];
    for rec in records {
        counts[rec.roof_health()?.ordinal()] += 1;
    }
    let n = records.len() as f64;
    Ok(counts.map(|c| c as f64 / n))
}

/// Execute one tier: derive its channel, assemble features, train on the
/// train rows, and predict the test rows. The oracle tier ignores the forest
/// parameters entirely and returns the closed-form expected loss.
pub fn run_tier(
    dataset: &SplitDataset,
    tier: &TierSpec,
    forest_params: &ForestParams,
    freq: &FrequencyCoeffs,
    sev: &SeverityCoeffs,
    correlation_kind: metrics::CorrelationKind,
    master_seed: u64,
) -> Result<TierRun> {
    tier.validate()?;
    dataset.validate()?;
    let records = &dataset.records;

    if tier.name == TierName::Oracle {
        let all = loss::oracle_predict(records, freq, sev)?;
        let predictions = dataset.test_idx.iter().map(|&i| all[i].clone()).collect();
        return Ok(TierRun {
            predictions,
            metadata: TierMetadata {
                tier: tier.name,
                channel_correlation: Some(1.0),
                channel_correlation_aligned: None,
                channel_params_hash: None,
                substitute_notice: None,
                calibrated_accuracy: None,
            },
            channel_outputs: Vec::new(),
        });
    }

    let mut metadata = TierMetadata {
        tier: tier.name,
        channel_correlation: None,
        channel_correlation_aligned: None,
        channel_params_hash: None,
        substitute_notice: None,
        calibrated_accuracy: None,
    };

    let channel_outputs: Vec<ChannelOutput> = match (tier.name, &tier.channel) {
        (TierName::TabularOnly, _) => Vec::new(),
        (TierName::TrueLabel, _) => {
            let outputs = channels::true_label_channel(records)?;
            metadata.channel_correlation = Some(channel_label_correlation(
                records,
                &outputs,
                correlation_kind,
            )?);
            outputs
        }
        (
            TierName::NoisyLabel,
            Some(ChannelConfig::NoisyLabel {
                target_correlation,
                accuracy,
                confusion_mode,
            }),
        ) => {
            let accuracy = match (accuracy, target_correlation) {
                (Some(a), _) => *a,
                (None, Some(target)) => {
                    let proportions = class_proportions(records)?;
                    channels::calibrate_labeler(
                        *target,
                        *confusion_mode,
                        &proportions,
                        master_seed,
                    )?
                }
                (None, None) => unreachable!("validated"),
            };
            metadata.calibrated_accuracy = Some(accuracy);
            let outputs =
                channels::noisy_label_channel(records, accuracy, *confusion_mode, master_seed)?;
            metadata.channel_correlation = Some(channel_label_correlation(
                records,
                &outputs,
                correlation_kind,
            )?);
            metadata.substitute_notice = Some(NOTICE_NOISY.to_string());
            outputs
        }
        (
            TierName::EmbeddingFeatures,
            Some(ChannelConfig::Embedding {
                dim,
                class_separation,
                noise_sigma,
            }),
        ) => {
            let outputs = channels::embedding_channel(
                records,
                *dim,
                *class_separation,
                *noise_sigma,
                master_seed,
            )?;
            metadata.substitute_notice = Some(NOTICE_EMBEDDING.to_string());
            outputs
        }
        (
            TierName::ClusterLabels,
            Some(ChannelConfig::Cluster {
                dim,
                class_separation,
                noise_sigma,
                k,
            }),
        ) => {
            let embeddings = channels::embedding_channel(
                records,
                *dim,
                *class_separation,
                *noise_sigma,
                master_seed,
            )?;
            let clusters = channels::cluster_channel(&embeddings, *k, master_seed)?;
            // Reported correlation uses the raw arbitrary indices (the naive
            // workflow); the aligned value is logged for diagnostics.
            let truth = truth_labels(records)?;
            let ids: Vec<f64> = clusters
                .iter()
                .map(|c| c.cluster_id.unwrap_or(0) as f64)
                .collect();
            let codes: Vec<f64> = truth.iter().map(|t| t.ordinal() as f64).collect();
            metadata.channel_correlation = metrics::pearson(&ids, &codes).ok();
            if *k == 3 {
                metadata.channel_correlation_aligned =
                    channels::aligned_cluster_correlation(&clusters, &truth).ok();
            }
            metadata.substitute_notice = Some(NOTICE_CLUSTER.to_string());
            clusters
        }
        (name, channel) => {
            return Err(Error::Config(format!(
                "tier {name} cannot run with channel {channel:?}"
            )))
        }
    };
    if let Some(c) = channel_outputs.first() {
        metadata.channel_params_hash = Some(c.channel_params_hash.clone());
    }

    let features = assemble_features(
        records,
        if channel_outputs.is_empty() {
            None
        } else {
            Some(&channel_outputs)
        },
        tier,
    )?;
    let mut train = features.select_rows(&dataset.train_idx);
    train.target = Some(
        dataset
            .train_idx
            .iter()
            .map(|&i| {
                records[i].next_year_loss.ok_or_else(|| {
                    Error::Usage(format!("{}: loss not simulated", records[i].policy_id))
                })
            })
            .collect::<Result<_>>()?,
    );
    let test = features.select_rows(&dataset.test_idx);

    let mut params = forest_params.clone();
    params.seed = SeedSpec::new(master_seed, format!("forest:{}", tier.name)).substream_seed();
    let model = fit_forest(&train, &params)?;
    let preds = predict_forest(&model, &test)?;
    let predictions = test.policy_ids.iter().cloned().zip(preds).collect();
    Ok(TierRun {
        predictions,
        metadata,
        channel_outputs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loss::{apply_losses, simulate_losses};
    use crate::policy::{assign_roof_health, generate_policies, GenerationConfig};

    fn small_dataset(n: usize, seed: u64) -> SplitDataset {
        let config = GenerationConfig {
            n_policies: n,
            master_seed: seed,
            ..GenerationConfig::default()
        };
        let mut records = generate_policies(&config).unwrap();
        assign_roof_health(&mut records, &config.thresholds).unwrap();
        let outcomes = simulate_losses(
            &records,
            &config.frequency_coeffs,
            &config.severity_coeffs,
            seed,
        )
        .unwrap();
        apply_losses(&mut records, &outcomes).unwrap();
        let half = n / 2;
        SplitDataset {
            records,
            train_idx: (0..half).collect(),
            test_idx: (half..n).collect(),
        }
    }

    fn default_forest() -> ForestParams {
        ForestParams {
            n_trees: 30,
            ..ForestParams::default()
        }
    }

    #[test]
    fn tabular_matrix_shape_and_columns() {
        let ds = small_dataset(100, 21);
        let m = assemble_features(&ds.records, None, &TierSpec::tabular_only()).unwrap();
        assert_eq!(m.n_rows, 100);
        assert_eq!(m.n_cols, 5);
        assert_eq!(m.column_names, TABULAR_COLUMNS.to_vec());
    }

    #[test]
    fn true_label_one_hot_rows() {
        let ds = small_dataset(60, 22);
        let outputs = channels::true_label_channel(&ds.records).unwrap();
        let m = assemble_features(&ds.records, Some(&outputs), &TierSpec::true_label()).unwrap();
        assert_eq!(m.n_cols, 8);
        for r in 0..m.n_rows {
            let onehot: f64 = (5..8).map(|c| m.value(r, c)).sum();
            assert_eq!(onehot, 1.0, "exactly one roof indicator per row");
        }
    }

    #[test]
    fn embedding_matrix_width() {
        let ds = small_dataset(40, 23);
        let outputs = channels::embedding_channel(&ds.records, 32, 4.0, 1.0, 23).unwrap();
        let tier = TierSpec {
            name: TierName::EmbeddingFeatures,
            encoding: LabelEncoding::OneHot,
            channel: Some(ChannelConfig::Embedding {
                dim: 32,
                class_separation: 4.0,
                noise_sigma: 1.0,
            }),
        };
        let m = assemble_features(&ds.records, Some(&outputs), &tier).unwrap();
        assert_eq!(m.n_cols, 5 + 32);
    }

    #[test]
    fn missing_channel_is_a_usage_error() {
        let ds = small_dataset(40, 24);
        assert!(matches!(
            assemble_features(&ds.records, None, &TierSpec::true_label()),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn oracle_ignores_forest_params() {
        let ds = small_dataset(80, 25);
        let cfg = GenerationConfig::default();
        let a = run_tier(
            &ds,
            &TierSpec::oracle(),
            &default_forest(),
            &cfg.frequency_coeffs,
            &cfg.severity_coeffs,
            metrics::CorrelationKind::Pearson,
            25,
        )
        .unwrap();
        let extreme = ForestParams {
            n_trees: 1,
            min_leaf: 40,
            ..ForestParams::default()
        };
        let b = run_tier(
            &ds,
            &TierSpec::oracle(),
            &extreme,
            &cfg.frequency_coeffs,
            &cfg.severity_coeffs,
            metrics::CorrelationKind::Pearson,
            25,
        )
        .unwrap();
        assert_eq!(a.predictions, b.predictions);
        assert_eq!(a.metadata.channel_correlation, Some(1.0));
    }

    #[test]
    fn true_label_metadata_reports_unit_correlation() {
        let ds = small_dataset(80, 26);
        let cfg = GenerationConfig::default();
        let run = run_tier(
            &ds,
            &TierSpec::true_label(),
            &default_forest(),
            &cfg.frequency_coeffs,
            &cfg.severity_coeffs,
            metrics::CorrelationKind::Pearson,
            26,
        )
        .unwrap();
        assert_eq!(run.metadata.channel_correlation, Some(1.0));
        assert!(run.metadata.substitute_notice.is_none());
    }

    #[test]
    fn tabular_metadata_has_no_correlation() {
        let ds = small_dataset(80, 27);
        let cfg = GenerationConfig::default();
        let run = run_tier(
            &ds,
            &TierSpec::tabular_only(),
            &default_forest(),
            &cfg.frequency_coeffs,
            &cfg.severity_coeffs,
            metrics::CorrelationKind::Pearson,
            27,
        )
        .unwrap();
        assert!(run.metadata.channel_correlation.is_none());
        assert_eq!(run.predictions.len(), ds.test_idx.len());
    }

    #[test]
    fn overlapping_split_is_an_integrity_error() {
        let mut ds = small_dataset(40, 28);
        ds.test_idx[0] = ds.train_idx[0];
        let cfg = GenerationConfig::default();
        assert!(matches!(
            run_tier(
                &ds,
                &TierSpec::tabular_only(),
                &default_forest(),
                &cfg.frequency_coeffs,
                &cfg.severity_coeffs,
                metrics::CorrelationKind::Pearson,
                28,
            ),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn mismatched_tier_channel_config_is_rejected() {
        let bad = TierSpec {
            name: TierName::NoisyLabel,
            encoding: LabelEncoding::OneHot,
            channel: Some(ChannelConfig::Embedding {
                dim: 8,
                class_separation: 1.0,
                noise_sigma: 1.0,
            }),
        };
        assert!(bad.validate().is_err());
        let both = TierSpec {
            name: TierName::NoisyLabel,
            encoding: LabelEncoding::OneHot,
            channel: Some(ChannelConfig::NoisyLabel {
                target_correlation: Some(0.8),
                accuracy: Some(0.9),
                confusion_mode: ConfusionMode::Uniform,
            }),
        };
        assert!(both.validate().is_err());
    }
}
