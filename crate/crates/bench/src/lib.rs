//! Shared fixtures for the criterion benchmarks.

use roofbench_core::harness::{build_dataset, ExperimentConfig};
use roofbench_core::tiers::SplitDataset;

/// Default-config dataset at the standard size, seed 0.
pub fn default_dataset() -> SplitDataset {
    build_dataset(&ExperimentConfig::default(), 0).expect("default dataset builds")
}
