//! Random-forest regression: bootstrap-bagged variance-reduction trees with
//! per-node column subsampling. Training is deterministic for a fixed seed and
//! independent of thread scheduling (each tree owns a `tree:{i}` substream).

mod tree;

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::SeedSpec;
use crate::error::{Error, Result};
use tree::{GrowParams, Grower, Tree};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    /// `None` grows until the leaf-size floor.
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    /// Candidate columns per node; `None` means ceil(p / 3).
    pub mtry: Option<usize>,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 300,
            max_depth: None,
            min_leaf: 5,
            mtry: None,
            bootstrap: true,
            seed: 0,
        }
    }
}

impl ForestParams {
    pub fn effective_mtry(&self, p: usize) -> usize {
        self.mtry.unwrap_or(p.div_ceil(3)).max(1)
    }

    pub fn validate(&self, p: usize) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::Param("n_trees must be >= 1".into()));
        }
        if self.min_leaf == 0 {
            return Err(Error::Param("min_leaf must be >= 1".into()));
        }
        if let Some(m) = self.mtry {
            if m == 0 || m > p {
                return Err(Error::Param(format!("mtry must lie in 1..={p}, got {m}")));
            }
        }
        Ok(())
    }
}

/// Row-major numeric matrix with named columns, keyed by policy id. Target is
/// attached for training rows.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub column_names: Vec<String>,
    pub policy_ids: Vec<String>,
    data: Vec<f64>,
    pub n_rows: usize,
    pub n_cols: usize,
    pub target: Option<Vec<f64>>,
}

impl FeatureMatrix {
    pub fn from_rows(
        column_names: Vec<String>,
        policy_ids: Vec<String>,
        rows: Vec<Vec<f64>>,
        target: Option<Vec<f64>>,
    ) -> Result<Self> {
        let n_cols = column_names.len();
        let n_rows = rows.len();
        if policy_ids.len() != n_rows {
            return Err(Error::Usage(format!(
                "{} policy ids for {n_rows} rows",
                policy_ids.len()
            )));
        }
        if let Some(t) = &target {
            if t.len() != n_rows {
                return Err(Error::Usage(format!(
                    "{} targets for {n_rows} rows",
                    t.len()
                )));
            }
        }
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for row in &rows {
            if row.len() != n_cols {
                return Err(Error::Usage(format!(
                    "row width {} does not match {n_cols} columns",
                    row.len()
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::Validation(
                    "feature matrix contains non-finite values".into(),
                ));
            }
            data.extend_from_slice(row);
        }
        Ok(FeatureMatrix {
            column_names,
            policy_ids,
            data,
            n_rows,
            n_cols,
            target,
        })
    }

    #[inline]
    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.n_cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.n_cols..(row + 1) * self.n_cols]
    }

    /// New matrix holding the given rows (in the given order).
    pub fn select_rows(&self, rows: &[usize]) -> FeatureMatrix {
        let mut data = Vec::with_capacity(rows.len() * self.n_cols);
        let mut ids = Vec::with_capacity(rows.len());
        for &r in rows {
            data.extend_from_slice(self.row(r));
            ids.push(self.policy_ids[r].clone());
        }
        let target = self
            .target
            .as_ref()
            .map(|t| rows.iter().map(|&r| t[r]).collect());
        FeatureMatrix {
            column_names: self.column_names.clone(),
            policy_ids: ids,
            data,
            n_rows: rows.len(),
            n_cols: self.n_cols,
            target,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ForestModel {
    pub column_names: Vec<String>,
    trees: Vec<Tree>,
}

impl ForestModel {
    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    /// Tree structures as JSON, for audit.
    pub fn write_json(&self, dest: impl AsRef<Path>) -> Result<()> {
        let path = dest.as_ref();
        let body = serde_json::to_string(self).expect("model serializes");
        fs::write(path, body).map_err(|e| Error::io(path, e))
    }
}

/// Train a forest on the matrix's target. Requires at least `2 * min_leaf`
/// rows and a nonnegative target.
pub fn fit_forest(train: &FeatureMatrix, params: &ForestParams) -> Result<ForestModel> {
    params.validate(train.n_cols)?;
    let y = train
        .target
        .as_ref()
        .ok_or_else(|| Error::Usage("training matrix has no target".into()))?;
    if train.n_rows < 2 * params.min_leaf {
        return Err(Error::Usage(format!(
            "need at least {} training rows, got {}",
            2 * params.min_leaf,
            train.n_rows
        )));
    }
    if y.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::Validation(
            "target must be finite and nonnegative".into(),
        ));
    }
    let n = train.n_rows;
    let accessor = |r: usize, c: usize| train.value(r, c);
    let trees: Vec<Tree> = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = SeedSpec::new(params.seed, format!("tree:{t}")).rng();
            let rows: Vec<usize> = if params.bootstrap {
                (0..n)
                    .map(|_| rng.next_u64_below(n as u64) as usize)
                    .collect()
            } else {
                (0..n).collect()
            };
            let grower = Grower {
                x: &accessor,
                y,
                n_cols: train.n_cols,
                params: GrowParams {
                    max_depth: params.max_depth,
                    min_leaf: params.min_leaf,
                    mtry: params.effective_mtry(train.n_cols),
                },
            };
            grower.grow(rows, &mut rng)
        })
        .collect();
    Ok(ForestModel {
        column_names: train.column_names.clone(),
        trees,
    })
}

/// Mean prediction over trees. The feature columns must match training
/// by name and order.
pub fn predict_forest(model: &ForestModel, features: &FeatureMatrix) -> Result<Vec<f64>> {
    if model.column_names != features.column_names {
        return Err(Error::Usage(format!(
            "feature columns {:?} do not match the model's training columns {:?}",
            features.column_names, model.column_names
        )));
    }
    let n_trees = model.trees.len() as f64;
    Ok((0..features.n_rows)
        .map(|r| {
            let row = features.row(r);
            model.trees.iter().map(|t| t.predict_row(row)).sum::<f64>() / n_trees
        })
        .collect())
}
