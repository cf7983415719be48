//! Everything that stands in for the image modality.
//!
//! No image is ever synthesized or read here. The generator emits the exact
//! per-policy prompt a text-to-image model would receive (the latent roof
//! condition is recoverable from the prompt text), and the downstream tiers
//! consume parameterized information channels instead of real vision
//! pipelines: a perfect labeler, an accuracy-calibrated noisy labeler,
//! class-conditional synthetic embeddings, and k-means cluster ids over those
//! embeddings.

pub mod kmeans;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{self, rng::stable_hash_hex, SeedSpec};
use crate::error::{Error, Result};
use crate::metrics;
use crate::policy::{PolicyRecord, RoofHealth};

pub const ROOF_STYLES: [&str; 5] = ["gable", "hip", "flat", "mansard", "shed"];
pub const SHINGLE_COLORS: [&str; 5] = ["dark-gray", "light-gray", "brown", "black", "red-tile"];

const PROMPT_TEMPLATE_HEAD: &str = "Realistic straight-down aerial photo of a detached house, \
full roof and surrounding lawn in view";

/// Descriptor pools for one roof category.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptorSet {
    pub surface: Vec<String>,
    pub edge: Vec<String>,
    pub extra: Vec<String>,
}

/// Per-category descriptor pools. Strings are globally unique so any prompt
/// maps back to exactly one category by table lookup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptorTable {
    pub good: DescriptorSet,
    pub fair: DescriptorSet,
    pub bad: DescriptorSet,
}

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

impl Default for DescriptorTable {
    fn default() -> Self {
        DescriptorTable {
            good: DescriptorSet {
                surface: strings(&[
                    "even rows of intact shingles",
                    "uniform shingle coverage with crisp lines",
                ]),
                edge: strings(&["well-sealed ridge lines", "straight tightly fitted edges"]),
                extra: strings(&[
                    "clean flashing and a debris-free surface",
                    "freshly swept gutters along the eaves",
                ]),
            },
            fair: DescriptorSet {
                surface: strings(&[
                    "slightly faded shingles",
                    "patchy discoloration across several shingles",
                ]),
                edge: strings(&[
                    "ridge line with mild wear",
                    "minor lifting along the roof edge",
                ]),
                extra: strings(&[
                    "scattered leaf debris near the chimney",
                    "lightly tarnished flashing",
                ]),
            },
            bad: DescriptorSet {
                surface: strings(&[
                    "multiple missing shingles",
                    "widespread cracked and curling shingles",
                ]),
                edge: strings(&["damaged or sagging ridge", "crumbling eaves with gaps"]),
                extra: strings(&[
                    "heavy debris buildup and rusted flashing",
                    "visible patches and exposed underlayment",
                ]),
            },
        }
    }
}

impl DescriptorTable {
    pub fn for_category(&self, roof: RoofHealth) -> &DescriptorSet {
        match roof {
            RoofHealth::Good => &self.good,
            RoofHealth::Fair => &self.fair,
            RoofHealth::Bad => &self.bad,
        }
    }

    /// Which category a descriptor string belongs to, if any.
    pub fn category_of(&self, descriptor: &str) -> Option<RoofHealth> {
        for roof in RoofHealth::ALL {
            let set = self.for_category(roof);
            if set.surface.iter().any(|s| s == descriptor)
                || set.edge.iter().any(|s| s == descriptor)
                || set.extra.iter().any(|s| s == descriptor)
            {
                return Some(roof);
            }
        }
        None
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = std::collections::HashSet::new();
        for roof in RoofHealth::ALL {
            let set = self.for_category(roof);
            for (slot, pool) in [
                ("surface", &set.surface),
                ("edge", &set.edge),
                ("extra", &set.extra),
            ] {
                if pool.is_empty() {
                    return Err(Error::Config(format!(
                        "descriptor table: {roof} has no {slot} descriptors"
                    )));
                }
                for s in pool {
                    if !seen.insert(s.clone()) {
                        return Err(Error::Config(format!(
                            "descriptor table: {s:?} appears in more than one category"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// One fully expanded image prompt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptSpec {
    pub policy_id: String,
    pub roof_style: String,
    pub shingle_color: String,
    pub surface: String,
    pub edge: String,
    pub extra: String,
    #[serde(rename = "prompt")]
    pub prompt_text: String,
}

pub fn render_prompt(
    roof_style: &str,
    shingle_color: &str,
    surface: &str,
    edge: &str,
    extra: &str,
) -> String {
    format!(
        "{PROMPT_TEMPLATE_HEAD}, {roof_style} roof with {shingle_color} shingles, \
{surface}, {edge}, {extra}."
    )
}

/// Expand one prompt per policy. Style and color are uniform picks; the three
/// descriptors come from the policy's true category pools.
pub fn generate_prompts(
    records: &[PolicyRecord],
    table: &DescriptorTable,
    master_seed: u64,
) -> Result<Vec<PromptSpec>> {
    table.validate()?;
    records
        .par_iter()
        .map(|rec| {
            let roof = rec.roof_health()?;
            let mut rng = SeedSpec::new(master_seed, format!("prompt:{}", rec.policy_id)).rng();
            let style = ROOF_STYLES[rng.pick_index(ROOF_STYLES.len())];
            let color = SHINGLE_COLORS[rng.pick_index(SHINGLE_COLORS.len())];
            let set = table.for_category(roof);
            let surface = set.surface[rng.pick_index(set.surface.len())].clone();
            let edge = set.edge[rng.pick_index(set.edge.len())].clone();
            let extra = set.extra[rng.pick_index(set.extra.len())].clone();
            let prompt_text = render_prompt(style, color, &surface, &edge, &extra);
            Ok(PromptSpec {
                policy_id: rec.policy_id.clone(),
                roof_style: style.to_string(),
                shingle_color: color.to_string(),
                surface,
                edge,
                extra,
                prompt_text,
            })
        })
        .collect()
}

/// JSONL manifest, one prompt per line.
pub fn write_prompt_manifest(prompts: &[PromptSpec], dest: impl AsRef<Path>) -> Result<()> {
    let path = dest.as_ref();
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    for p in prompts {
        writeln!(
            f,
            "{}",
            serde_json::to_string(p).expect("prompt serializes")
        )
        .map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

/// Hook for wiring a real text-to-image backend. The shipped implementation
/// is a no-op that never produces an image.
pub trait ImageSynthesisClient {
    /// Submit one prompt; returns the path of the synthesized image when the
    /// backend produces one.
    fn submit_prompt(&self, prompt: &PromptSpec) -> Result<Option<PathBuf>>;
}

#[derive(Debug, Default, Clone, Copy)]
pub struct NoopImageClient;

impl ImageSynthesisClient for NoopImageClient {
    fn submit_prompt(&self, _prompt: &PromptSpec) -> Result<Option<PathBuf>> {
        Ok(None)
    }
}

/// Output of one information channel for one policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelOutput {
    pub policy_id: String,
    pub predicted_label: Option<RoofHealth>,
    pub embedding: Option<Vec<f64>>,
    pub cluster_id: Option<usize>,
    pub channel_name: String,
    pub channel_params_hash: String,
}

pub const CHANNEL_TRUE_LABEL: &str = "true_label";
pub const CHANNEL_NOISY_LABEL: &str = "noisy_label";
pub const CHANNEL_EMBEDDING: &str = "embedding";
pub const CHANNEL_CLUSTER: &str = "cluster";

/// Perfect labeling: the channel simply reveals the true roof health.
pub fn true_label_channel(records: &[PolicyRecord]) -> Result<Vec<ChannelOutput>> {
    records
        .iter()
        .map(|rec| {
            Ok(ChannelOutput {
                policy_id: rec.policy_id.clone(),
                predicted_label: Some(rec.roof_health()?),
                embedding: None,
                cluster_id: None,
                channel_name: CHANNEL_TRUE_LABEL.to_string(),
                channel_params_hash: stable_hash_hex(b"true_label"),
            })
        })
        .collect()
}

/// How a wrong label is chosen when the labeler errs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ConfusionMode {
    /// Both wrong labels equally likely.
    #[default]
    Uniform,
    /// Good<->Bad confusions halved, then renormalized.
    AdjacentBiased,
}

fn wrong_label(truth: RoofHealth, mode: ConfusionMode, u: f64) -> RoofHealth {
    let others: [RoofHealth; 2] = match truth {
        RoofHealth::Good => [RoofHealth::Fair, RoofHealth::Bad],
        RoofHealth::Fair => [RoofHealth::Good, RoofHealth::Bad],
        RoofHealth::Bad => [RoofHealth::Good, RoofHealth::Fair],
    };
    let p_first = match (mode, truth) {
        (ConfusionMode::Uniform, _) => 0.5,
        (ConfusionMode::AdjacentBiased, RoofHealth::Fair) => 0.5,
        // The extreme swap is the halved option; Fair is the other.
        (ConfusionMode::AdjacentBiased, RoofHealth::Good) => 2.0 / 3.0, // Fair vs Bad
        (ConfusionMode::AdjacentBiased, RoofHealth::Bad) => 1.0 / 3.0,  // Good vs Fair
    };
    if u < p_first {
        others[0]
    } else {
        others[1]
    }
}

fn check_accuracy(accuracy: f64) -> Result<()> {
    if !(accuracy.is_finite() && (1.0 / 3.0..=1.0).contains(&accuracy)) {
        return Err(Error::Param(format!(
            "labeler accuracy must lie in [1/3, 1], got {accuracy}"
        )));
    }
    Ok(())
}

/// Keep the true label with probability `accuracy`; otherwise draw a wrong one
/// per `mode`. At accuracy 1 this is identical to [`true_label_channel`].
pub fn noisy_label_channel(
    records: &[PolicyRecord],
    accuracy: f64,
    mode: ConfusionMode,
    master_seed: u64,
) -> Result<Vec<ChannelOutput>> {
    check_accuracy(accuracy)?;
    let params_hash = stable_hash_hex(format!("noisy_label:{accuracy}:{mode:?}").as_bytes());
    records
        .par_iter()
        .map(|rec| {
            let truth = rec.roof_health()?;
            let mut rng = SeedSpec::new(master_seed, format!("noisy:{}", rec.policy_id)).rng();
            let keep = rng.next_f64() < accuracy;
            let pick = rng.next_f64();
            let label = if keep {
                truth
            } else {
                wrong_label(truth, mode, pick)
            };
            Ok(ChannelOutput {
                policy_id: rec.policy_id.clone(),
                predicted_label: Some(label),
                embedding: None,
                cluster_id: None,
                channel_name: CHANNEL_NOISY_LABEL.to_string(),
                channel_params_hash: params_hash.clone(),
            })
        })
        .collect()
}

const CALIBRATION_BATCH: usize = 100_000;
const CALIBRATION_TOL: f64 = 0.005;
const CALIBRATION_MAX_ITERS: usize = 40;

/// Simulated labeler batch reused across bisection steps (common random
/// numbers keep the measured correlation monotone in accuracy).
struct CalibrationBatch {
    truth: Vec<RoofHealth>,
    keep_draw: Vec<f64>,
    wrong_draw: Vec<f64>,
}

impl CalibrationBatch {
    fn new(class_proportions: &[f64; 3], master_seed: u64) -> Result<Self> {
        let probs = class_proportions.to_vec();
        let sum: f64 = probs.iter().sum();
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) || (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Param(format!(
                "class proportions must be nonnegative and sum to 1, got {probs:?}"
            )));
        }
        let mut truth_rng = SeedSpec::new(master_seed, "calibrate:truth").rng();
        let mut noise_rng = SeedSpec::new(master_seed, "calibrate:noise").rng();
        let mut truth = Vec::with_capacity(CALIBRATION_BATCH);
        let mut keep_draw = Vec::with_capacity(CALIBRATION_BATCH);
        let mut wrong_draw = Vec::with_capacity(CALIBRATION_BATCH);
        for _ in 0..CALIBRATION_BATCH {
            let idx = distributions::categorical_index(&mut truth_rng, &probs);
            truth.push(RoofHealth::from_ordinal(idx).expect("three classes"));
            keep_draw.push(noise_rng.next_f64());
            wrong_draw.push(noise_rng.next_f64());
        }
        Ok(CalibrationBatch {
            truth,
            keep_draw,
            wrong_draw,
        })
    }

    fn correlation_at(&self, accuracy: f64, mode: ConfusionMode) -> f64 {
        let labels: Vec<RoofHealth> = self
            .truth
            .iter()
            .zip(self.keep_draw.iter().zip(&self.wrong_draw))
            .map(|(&t, (&keep, &wrong))| {
                if keep < accuracy {
                    t
                } else {
                    wrong_label(t, mode, wrong)
                }
            })
            .collect();
        metrics::ordinal_correlation(&self.truth, &labels).unwrap_or(0.0)
    }
}

/// Find the labeler accuracy whose measured ordinal correlation hits
/// `target_correlation`, by bisection over [1/3, 1] against a simulated
/// 100k-label batch. Correlation is monotone in accuracy, which makes the
/// bisection valid; iteration stops within +-0.005 of the target or after 40
/// steps.
pub fn calibrate_labeler(
    target_correlation: f64,
    mode: ConfusionMode,
    class_proportions: &[f64; 3],
    master_seed: u64,
) -> Result<f64> {
    if !(target_correlation.is_finite() && 0.0 < target_correlation && target_correlation <= 1.0) {
        return Err(Error::Param(format!(
            "target correlation must lie in (0, 1], got {target_correlation}"
        )));
    }
    let batch = CalibrationBatch::new(class_proportions, master_seed)?;
    let mut lo = 1.0 / 3.0;
    let mut hi = 1.0;
    let c_hi = batch.correlation_at(hi, mode);
    if target_correlation > c_hi + CALIBRATION_TOL {
        return Err(Error::Calibration(format!(
            "target correlation {target_correlation} exceeds the achievable maximum {c_hi:.4} under {mode:?}"
        )));
    }
    let c_lo = batch.correlation_at(lo, mode);
    if target_correlation < c_lo - CALIBRATION_TOL {
        return Err(Error::Calibration(format!(
            "target correlation {target_correlation} is below the achievable minimum {c_lo:.4} under {mode:?}"
        )));
    }
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..CALIBRATION_MAX_ITERS {
        mid = 0.5 * (lo + hi);
        let c = batch.correlation_at(mid, mode);
        if (c - target_correlation).abs() <= CALIBRATION_TOL {
            return Ok(mid);
        }
        if c < target_correlation {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(mid)
}

/// Orthonormal class-mean directions derived from the seed. For width 2 the
/// three directions cannot be mutually orthogonal; they fall back to a
/// maximally separated equiangular layout in the plane.
fn class_directions(dim: usize, master_seed: u64) -> [Vec<f64>; 3] {
    let mut rng = SeedSpec::new(master_seed, "embedding:means").rng();
    if dim == 2 {
        let theta0 = rng.next_f64() * std::f64::consts::TAU;
        return [0.0, 1.0, 2.0].map(|k| {
            let t = theta0 + k * std::f64::consts::TAU / 3.0;
            vec![t.cos(), t.sin()]
        });
    }
    loop {
        let raw: Vec<Vec<f64>> = (0..3)
            .map(|_| {
                (0..dim)
                    .map(|_| distributions::normal(&mut rng, 0.0, 1.0))
                    .collect()
            })
            .collect();
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(3);
        let mut ok = true;
        for v in raw {
            let mut w = v;
            for b in &basis {
                let proj: f64 = w.iter().zip(b).map(|(x, y)| x * y).sum();
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= proj * bi;
                }
            }
            let norm: f64 = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm < 1e-9 {
                ok = false;
                break;
            }
            for wi in w.iter_mut() {
                *wi /= norm;
            }
            basis.push(w);
        }
        if ok {
            return [basis[0].clone(), basis[1].clone(), basis[2].clone()];
        }
    }
}

/// Class-conditional Gaussian embeddings: mean = class_separation times the
/// class direction, plus isotropic noise of scale `noise_sigma`.
pub fn embedding_channel(
    records: &[PolicyRecord],
    dim: usize,
    class_separation: f64,
    noise_sigma: f64,
    master_seed: u64,
) -> Result<Vec<ChannelOutput>> {
    if dim < 2 {
        return Err(Error::Param(format!(
            "embedding dim must be >= 2, got {dim}"
        )));
    }
    if !(class_separation.is_finite() && class_separation >= 0.0) {
        return Err(Error::Param(format!(
            "class separation must be >= 0, got {class_separation}"
        )));
    }
    if !(noise_sigma.is_finite() && noise_sigma > 0.0) {
        return Err(Error::Param(format!(
            "noise sigma must be > 0, got {noise_sigma}"
        )));
    }
    let directions = class_directions(dim, master_seed);
    let means: [Vec<f64>; 3] = directions.map(|d| d.iter().map(|x| x * class_separation).collect());
    let params_hash =
        stable_hash_hex(format!("embedding:{dim}:{class_separation}:{noise_sigma}").as_bytes());
    records
        .par_iter()
        .map(|rec| {
            let roof = rec.roof_health()?;
            let mut rng = SeedSpec::new(master_seed, format!("embedding:{}", rec.policy_id)).rng();
            let mean = &means[roof.ordinal()];
            let embedding: Vec<f64> = mean
                .iter()
                .map(|m| m + distributions::normal(&mut rng, 0.0, noise_sigma))
                .collect();
            Ok(ChannelOutput {
                policy_id: rec.policy_id.clone(),
                predicted_label: None,
                embedding: Some(embedding),
                cluster_id: None,
                channel_name: CHANNEL_EMBEDDING.to_string(),
                channel_params_hash: params_hash.clone(),
            })
        })
        .collect()
}

/// k-means over an embedding channel's vectors. Cluster indices are arbitrary
/// labels; no class alignment is implied.
pub fn cluster_channel(
    embeddings: &[ChannelOutput],
    k: usize,
    master_seed: u64,
) -> Result<Vec<ChannelOutput>> {
    let points: Vec<Vec<f64>> = embeddings
        .iter()
        .map(|c| {
            c.embedding
                .clone()
                .ok_or_else(|| Error::Usage(format!("{}: missing embedding", c.policy_id)))
        })
        .collect::<Result<_>>()?;
    let mut rng = SeedSpec::new(master_seed, "kmeans").rng();
    let fit = kmeans::kmeans(&points, k, &mut rng)?;
    let params_hash = stable_hash_hex(format!("cluster:k={k}").as_bytes());
    Ok(embeddings
        .iter()
        .zip(fit.assignments)
        .map(|(c, cluster)| ChannelOutput {
            policy_id: c.policy_id.clone(),
            predicted_label: None,
            embedding: None,
            cluster_id: Some(cluster),
            channel_name: CHANNEL_CLUSTER.to_string(),
            channel_params_hash: params_hash.clone(),
        })
        .collect())
}

/// Channel outputs as CSV keyed by policy id. Schema depends on what the
/// channel carries: labels, a cluster id, or embedding coordinates.
pub fn write_channel_csv(outputs: &[ChannelOutput], dest: impl AsRef<Path>) -> Result<()> {
    let path = dest.as_ref();
    let mut out = String::new();
    if outputs.is_empty() {
        out.push_str("PolicyID\n");
    } else if outputs[0].predicted_label.is_some() {
        out.push_str("PolicyID,PredictedLabel\n");
        for c in outputs {
            let label = c
                .predicted_label
                .ok_or_else(|| Error::Usage(format!("{}: missing label", c.policy_id)))?;
            out.push_str(&format!("{},{}\n", c.policy_id, label.as_str()));
        }
    } else if outputs[0].cluster_id.is_some() {
        out.push_str("PolicyID,ClusterId\n");
        for c in outputs {
            let id = c
                .cluster_id
                .ok_or_else(|| Error::Usage(format!("{}: missing cluster id", c.policy_id)))?;
            out.push_str(&format!("{},{id}\n", c.policy_id));
        }
    } else {
        let dim = outputs[0].embedding.as_ref().map(|e| e.len()).unwrap_or(0);
        out.push_str("PolicyID");
        for j in 0..dim {
            out.push_str(&format!(",Emb{j}"));
        }
        out.push('\n');
        for c in outputs {
            let emb = c
                .embedding
                .as_ref()
                .ok_or_else(|| Error::Usage(format!("{}: missing embedding", c.policy_id)))?;
            out.push_str(&c.policy_id);
            for v in emb {
                out.push_str(&format!(",{}", crate::policy::fmt_feature(*v)));
            }
            out.push('\n');
        }
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Best ordinal correlation over all 3! assignments of cluster index to roof
/// category. Only defined for 3 clusters.
pub fn aligned_cluster_correlation(
    clusters: &[ChannelOutput],
    truth: &[RoofHealth],
) -> Result<f64> {
    let ids: Vec<usize> = clusters
        .iter()
        .map(|c| {
            c.cluster_id
                .ok_or_else(|| Error::Usage(format!("{}: missing cluster id", c.policy_id)))
        })
        .collect::<Result<_>>()?;
    if ids.iter().any(|&c| c > 2) {
        return Err(Error::Usage(
            "alignment search requires exactly 3 clusters".into(),
        ));
    }
    let perms: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let mut best = f64::NEG_INFINITY;
    for perm in perms {
        let mapped: Vec<RoofHealth> = ids
            .iter()
            .map(|&c| RoofHealth::from_ordinal(perm[c]).expect("3 classes"))
            .collect();
        if let Ok(r) = metrics::ordinal_correlation(truth, &mapped) {
            best = best.max(r);
        }
    }
    if best.is_finite() {
        Ok(best)
    } else {
        Err(Error::UndefinedMetric(
            "aligned correlation undefined (constant labels)".into(),
        ))
    }
}
