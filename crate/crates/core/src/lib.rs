//! Seed-reproducible synthetic property-insurance data and a tiered
//! model-evaluation harness.
//!
//! The generator draws a policy table whose hidden three-level roof condition
//! drives a compound frequency-severity loss, emits the aerial-photo prompts
//! that would encode that condition in images, and compares feature tiers
//! (tabular only, clustered labels, embeddings, noisy labels, true labels,
//! and the closed-form oracle) under the normalized Gini metric. Everything
//! is deterministic per `(config, seed)` and independent of thread count.

pub mod channels;
pub mod distributions;
pub mod error;
pub mod forest;
pub mod harness;
pub mod loss;
pub mod metrics;
pub mod policy;
pub mod tiers;

pub use channels::{ChannelOutput, ConfusionMode, DescriptorTable, PromptSpec};
pub use distributions::{DistributionParams, SeedSpec, StreamRng, PRNG_ID};
pub use error::{Error, Result};
pub use forest::{FeatureMatrix, ForestModel, ForestParams};
pub use harness::{
    EvaluationReport, ExperimentConfig, MetricOptions, ScoreReport, SplitConfig, SplitRule,
};
pub use loss::ClaimOutcome;
pub use metrics::{CorrelationKind, GiniResult, TiePolicy};
pub use policy::{GenerationConfig, PolicyRecord, RoofHealth, WallType};
pub use tiers::{ChannelConfig, LabelEncoding, SplitDataset, TierName, TierSpec};
