//! Structured policy-table generation: released features, the hidden latent
//! score, and the percentile-thresholded RoofHealth assignment.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{self, DistributionParams, SeedSpec, PRNG_ID};
use crate::error::{Error, Result};

/// Three-level roof condition. Ordinal coding is fixed: Good=0, Fair=1, Bad=2;
/// the frequency/severity offsets and the ordinal correlation both index by it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RoofHealth {
    Good,
    Fair,
    Bad,
}

impl RoofHealth {
    pub const ALL: [RoofHealth; 3] = [RoofHealth::Good, RoofHealth::Fair, RoofHealth::Bad];

    pub fn ordinal(self) -> usize {
        match self {
            RoofHealth::Good => 0,
            RoofHealth::Fair => 1,
            RoofHealth::Bad => 2,
        }
    }

    pub fn from_ordinal(code: usize) -> Option<RoofHealth> {
        Self::ALL.get(code).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RoofHealth::Good => "Good",
            RoofHealth::Fair => "Fair",
            RoofHealth::Bad => "Bad",
        }
    }

    pub fn parse(s: &str) -> Result<RoofHealth> {
        match s {
            "Good" => Ok(RoofHealth::Good),
            "Fair" => Ok(RoofHealth::Fair),
            "Bad" => Ok(RoofHealth::Bad),
            other => Err(Error::Validation(format!("unknown roof health {other:?}"))),
        }
    }
}

impl fmt::Display for RoofHealth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WallType {
    Wood,
    Brick,
}

impl WallType {
    pub fn as_str(self) -> &'static str {
        match self {
            WallType::Wood => "Wood",
            WallType::Brick => "Brick",
        }
    }

    pub fn parse(s: &str) -> Result<WallType> {
        match s {
            "Wood" => Ok(WallType::Wood),
            "Brick" => Ok(WallType::Brick),
            other => Err(Error::Validation(format!("unknown wall type {other:?}"))),
        }
    }
}

/// One insured property. The six released features come first; everything
/// from `latent_score` down is hidden or an outcome and never appears in a
/// `released` export.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyRecord {
    pub policy_id: String,
    pub house_value: f64,
    pub house_age: f64,
    pub wall_type: WallType,
    pub area_risk: f64,
    pub credit_score: u32,
    pub latent_score: f64,
    pub latent_noise: Option<f64>,
    pub roof_health: Option<RoofHealth>,
    pub next_year_loss: Option<f64>,
}

impl PolicyRecord {
    pub fn roof_health(&self) -> Result<RoofHealth> {
        self.roof_health
            .ok_or_else(|| Error::Usage(format!("{}: roof health not assigned", self.policy_id)))
    }
}

pub fn policy_id(index1: usize) -> String {
    format!("POL-{index1:06}")
}

/// Coefficients of the latent score
/// `S = age_coeff*age + risk_coeff*risk + credit_coeff*(credit/credit_denominator) + eps`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreCoeffs {
    pub age_coeff: f64,
    pub risk_coeff: f64,
    pub credit_coeff: f64,
    pub credit_denominator: f64,
    pub noise_sigma: f64,
}

impl Default for ScoreCoeffs {
    fn default() -> Self {
        ScoreCoeffs {
            age_coeff: 0.02,
            risk_coeff: 3.0,
            credit_coeff: -2.0,
            credit_denominator: 850.0,
            noise_sigma: 1.0,
        }
    }
}

/// Percentile cut points for the Good/Fair/Bad partition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoofThresholds {
    pub fair_percentile: f64,
    pub bad_percentile: f64,
}

impl Default for RoofThresholds {
    fn default() -> Self {
        RoofThresholds {
            fair_percentile: 55.0,
            bad_percentile: 80.0,
        }
    }
}

/// Claim-count model: `lambda = exp(intercept + log_value_coeff*ln(value/value_ref)
/// + age_coeff*age + risk_coeff*risk + alpha_rh[roof])`, counts NB(size nb_r, mean lambda).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyCoeffs {
    pub intercept: f64,
    pub log_value_coeff: f64,
    pub value_ref: f64,
    pub age_coeff: f64,
    pub risk_coeff: f64,
    /// Indexed by RoofHealth ordinal code.
    pub alpha_rh: [f64; 3],
    pub nb_r: f64,
}

impl Default for FrequencyCoeffs {
    fn default() -> Self {
        FrequencyCoeffs {
            intercept: -3.0,
            log_value_coeff: 0.03,
            value_ref: 250_000.0,
            age_coeff: 0.01,
            risk_coeff: 0.05,
            alpha_rh: [0.0, 1.2, 2.4],
            nb_r: 10.0,
        }
    }
}

/// Per-claim severity model:
/// `mu = intercept + wood_coeff*1(wall=Wood) + risk_coeff*risk + beta_rh[roof]`,
/// severities Gamma(gamma_k, exp(mu)/gamma_k) so the mean single-claim loss is
/// exp(mu) for any configured shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeverityCoeffs {
    pub intercept: f64,
    pub wood_coeff: f64,
    pub risk_coeff: f64,
    /// Indexed by RoofHealth ordinal code.
    pub beta_rh: [f64; 3],
    pub gamma_k: f64,
}

impl Default for SeverityCoeffs {
    fn default() -> Self {
        SeverityCoeffs {
            intercept: 7.0,
            wood_coeff: 0.02,
            risk_coeff: 0.02,
            beta_rh: [0.0, 1.0, 2.0],
            gamma_k: 2.0,
        }
    }
}

/// Every distribution parameter and coefficient of the generative process.
/// The defaults are the shipped configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationConfig {
    pub n_policies: usize,
    pub master_seed: u64,
    pub value_params: DistributionParams,
    pub age_scale: f64,
    pub age_beta_params: DistributionParams,
    pub wall_probs: DistributionParams,
    pub risk_beta_params: DistributionParams,
    pub fico_params: DistributionParams,
    pub score_coeffs: ScoreCoeffs,
    pub thresholds: RoofThresholds,
    pub frequency_coeffs: FrequencyCoeffs,
    pub severity_coeffs: SeverityCoeffs,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        GenerationConfig {
            n_policies: 2000,
            master_seed: 0,
            value_params: DistributionParams::LogNormal {
                mu_log: 12.9,
                sigma_log: 0.45,
            },
            age_scale: 120.0,
            age_beta_params: DistributionParams::Beta { a: 4.0, b: 3.0 },
            wall_probs: DistributionParams::Categorical {
                labels: vec!["Wood".into(), "Brick".into()],
                probs: vec![0.9, 0.1],
            },
            risk_beta_params: DistributionParams::Beta { a: 2.0, b: 5.0 },
            // Five score bands with round national-share weights; uniform
            // within band, rounded to integers.
            fico_params: DistributionParams::FicoBuckets {
                bucket_bounds: vec![(300, 579), (580, 669), (670, 739), (740, 799), (800, 850)],
                bucket_probs: vec![0.16, 0.17, 0.21, 0.25, 0.21],
            },
            score_coeffs: ScoreCoeffs::default(),
            thresholds: RoofThresholds::default(),
            frequency_coeffs: FrequencyCoeffs::default(),
            severity_coeffs: SeverityCoeffs::default(),
        }
    }
}

impl GenerationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_policies == 0 {
            return Err(Error::Config("n_policies must be >= 1".into()));
        }
        self.value_params.validate()?;
        self.age_beta_params.validate()?;
        self.wall_probs.validate()?;
        self.risk_beta_params.validate()?;
        self.fico_params.validate()?;
        if let DistributionParams::Categorical { labels, .. } = &self.wall_probs {
            for l in labels {
                WallType::parse(l).map_err(|_| {
                    Error::Config(format!("wall_probs labels must be Wood/Brick, got {l:?}"))
                })?;
            }
        } else {
            return Err(Error::Config(
                "wall_probs must be a categorical distribution".into(),
            ));
        }
        if !(self.age_scale.is_finite() && self.age_scale >= 0.0) {
            return Err(Error::Config(format!(
                "age_scale must be >= 0, got {}",
                self.age_scale
            )));
        }
        if !self.score_coeffs.noise_sigma.is_finite() || self.score_coeffs.noise_sigma < 0.0 {
            return Err(Error::Config("score noise_sigma must be >= 0".into()));
        }
        if self.score_coeffs.credit_denominator == 0.0 {
            return Err(Error::Config("credit_denominator must be nonzero".into()));
        }
        let t = &self.thresholds;
        if !(0.0 < t.fair_percentile
            && t.fair_percentile < t.bad_percentile
            && t.bad_percentile < 100.0)
        {
            return Err(Error::Config(format!(
                "thresholds must satisfy 0 < fair < bad < 100, got {} / {}",
                t.fair_percentile, t.bad_percentile
            )));
        }
        if !self.frequency_coeffs.nb_r.is_finite() || self.frequency_coeffs.nb_r <= 0.0 {
            return Err(Error::Config("frequency nb_r must be > 0".into()));
        }
        if !self.frequency_coeffs.value_ref.is_finite() || self.frequency_coeffs.value_ref <= 0.0 {
            return Err(Error::Config("frequency value_ref must be > 0".into()));
        }
        if !self.severity_coeffs.gamma_k.is_finite() || self.severity_coeffs.gamma_k <= 0.0 {
            return Err(Error::Config("severity gamma_k must be > 0".into()));
        }
        Ok(())
    }
}

fn draw_one(params: &DistributionParams, master: u64, label: String) -> f64 {
    // Params are validated once up front; sample() re-checks cheaply.
    distributions::sample(params, &SeedSpec::new(master, label), 1)
        .expect("params validated before generation")[0]
}

/// Generate the policy table. Every feature of policy `i` (1-based) is drawn
/// from its own `policy:{i}:{field}` substream, so output is identical no
/// matter how generation is scheduled across threads.
pub fn generate_policies(config: &GenerationConfig) -> Result<Vec<PolicyRecord>> {
    config.validate()?;
    let master = config.master_seed;
    let wall_labels = match &config.wall_probs {
        DistributionParams::Categorical { labels, .. } => labels.clone(),
        _ => unreachable!("validated categorical"),
    };
    let records: Vec<PolicyRecord> = (1..=config.n_policies)
        .into_par_iter()
        .map(|i| {
            let house_value = draw_one(&config.value_params, master, format!("policy:{i}:value"));
            let house_age = config.age_scale
                * draw_one(&config.age_beta_params, master, format!("policy:{i}:age"));
            let wall_idx =
                draw_one(&config.wall_probs, master, format!("policy:{i}:wall")) as usize;
            let wall_type = WallType::parse(&wall_labels[wall_idx]).expect("validated labels");
            let area_risk = draw_one(&config.risk_beta_params, master, format!("policy:{i}:risk"));
            let credit_score =
                draw_one(&config.fico_params, master, format!("policy:{i}:credit")) as u32;
            let noise = distributions::normal(
                &mut SeedSpec::new(master, format!("policy:{i}:noise")).rng(),
                0.0,
                config.score_coeffs.noise_sigma,
            );
            let c = &config.score_coeffs;
            let latent_score = c.age_coeff * house_age
                + c.risk_coeff * area_risk
                + c.credit_coeff * (credit_score as f64 / c.credit_denominator)
                + noise;
            PolicyRecord {
                policy_id: policy_id(i),
                house_value,
                house_age,
                wall_type,
                area_risk,
                credit_score,
                latent_score,
                latent_noise: Some(noise),
                roof_health: None,
                next_year_loss: None,
            }
        })
        .collect();
    Ok(records)
}

/// Nearest-rank percentile: the value at rank `ceil(q * n / 100)` (1-based)
/// of the sorted batch.
pub fn nearest_rank_percentile(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let n = sorted.len();
    let rank = (q * n as f64 / 100.0).ceil() as usize;
    sorted[rank.clamp(1, n) - 1]
}

/// Partition the batch's latent scores at the configured percentiles.
/// Boundary inclusion: `S <= q_fair` is Good, `q_fair < S <= q_bad` is Fair,
/// above is Bad.
pub fn assign_roof_health(records: &mut [PolicyRecord], thresholds: &RoofThresholds) -> Result<()> {
    if records.is_empty() {
        return Err(Error::Usage(
            "cannot assign roof health to an empty batch".into(),
        ));
    }
    let mut scores: Vec<f64> = records.iter().map(|r| r.latent_score).collect();
    scores.sort_unstable_by(f64::total_cmp);
    let q_fair = nearest_rank_percentile(&scores, thresholds.fair_percentile);
    let q_bad = nearest_rank_percentile(&scores, thresholds.bad_percentile);
    for rec in records.iter_mut() {
        let s = rec.latent_score;
        rec.roof_health = Some(if s <= q_fair {
            RoofHealth::Good
        } else if s <= q_bad {
            RoofHealth::Fair
        } else {
            RoofHealth::Bad
        });
    }
    Ok(())
}

/// Which columns an export carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Visibility {
    /// PolicyID plus the six released feature columns only.
    Released,
    /// Released columns plus RoofHealth, LatentScore and NextYearLoss.
    Full,
}

pub const RELEASED_HEADER: &str = "PolicyID,HouseValue,HouseAge,WallType,AreaRisk,CreditScore";
pub const FULL_HEADER: &str =
    "PolicyID,HouseValue,HouseAge,WallType,AreaRisk,CreditScore,RoofHealth,LatentScore,NextYearLoss";

/// Column names that must never appear in a released export.
pub const HIDDEN_COLUMNS: [&str; 4] = ["RoofHealth", "LatentScore", "LatentNoise", "NextYearLoss"];

/// Fixed-notation formatting keeps exports byte-stable: 6 decimals for
/// features and scores, 2 for currency.
pub fn fmt_feature(x: f64) -> String {
    format!("{x:.6}")
}

pub fn fmt_currency(x: f64) -> String {
    format!("{x:.2}")
}

pub fn released_row(rec: &PolicyRecord) -> String {
    format!(
        "{},{},{},{},{},{}",
        rec.policy_id,
        fmt_currency(rec.house_value),
        fmt_feature(rec.house_age),
        rec.wall_type.as_str(),
        fmt_feature(rec.area_risk),
        rec.credit_score
    )
}

/// Write the policy table. `Full` requires roof health and losses to be
/// populated; `Released` never contains hidden columns.
pub fn export_policy_table(
    records: &[PolicyRecord],
    dest: impl AsRef<Path>,
    visibility: Visibility,
) -> Result<()> {
    let path = dest.as_ref();
    let mut out = String::new();
    match visibility {
        Visibility::Released => {
            out.push_str(RELEASED_HEADER);
            out.push('\n');
            for rec in records {
                out.push_str(&released_row(rec));
                out.push('\n');
            }
        }
        Visibility::Full => {
            out.push_str(FULL_HEADER);
            out.push('\n');
            for rec in records {
                let roof = rec.roof_health.ok_or_else(|| {
                    Error::Usage(format!(
                        "{}: full export requires roof health",
                        rec.policy_id
                    ))
                })?;
                let loss = rec.next_year_loss.ok_or_else(|| {
                    Error::Usage(format!(
                        "{}: full export requires next-year loss",
                        rec.policy_id
                    ))
                })?;
                out.push_str(&released_row(rec));
                out.push_str(&format!(
                    ",{},{},{}\n",
                    roof.as_str(),
                    fmt_feature(rec.latent_score),
                    fmt_currency(loss)
                ));
            }
        }
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Read a policy table written by [`export_policy_table`]. Returns the records
/// and the visibility detected from the header. Latent noise is not exported
/// and comes back as `None`.
pub fn ingest_policy_table(src: impl AsRef<Path>) -> Result<(Vec<PolicyRecord>, Visibility)> {
    let path = src.as_ref();
    let mut reader = csv::Reader::from_path(path).map_err(|e| match e.kind() {
        csv::ErrorKind::Io(_) => Error::io(path, std::io::Error::other(e.to_string())),
        _ => Error::Validation(format!("{}: {e}", path.display())),
    })?;
    let headers = reader
        .headers()
        .map_err(|e| Error::Validation(format!("{}: {e}", path.display())))?
        .clone();
    let header_line = headers.iter().collect::<Vec<_>>().join(",");
    let visibility = if header_line == RELEASED_HEADER {
        Visibility::Released
    } else if header_line == FULL_HEADER {
        Visibility::Full
    } else {
        return Err(Error::Validation(format!(
            "{}: unrecognized policy-table header {header_line:?}",
            path.display()
        )));
    };
    let parse_f64 = |s: &str, what: &str| -> Result<f64> {
        s.parse::<f64>()
            .map_err(|_| Error::Validation(format!("{}: bad {what} value {s:?}", path.display())))
    };
    let mut records = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| Error::Validation(format!("{}: {e}", path.display())))?;
        let get = |i: usize| row.get(i).unwrap_or("");
        let mut rec = PolicyRecord {
            policy_id: get(0).to_string(),
            house_value: parse_f64(get(1), "HouseValue")?,
            house_age: parse_f64(get(2), "HouseAge")?,
            wall_type: WallType::parse(get(3))?,
            area_risk: parse_f64(get(4), "AreaRisk")?,
            credit_score: get(5)
                .parse::<u32>()
                .map_err(|_| Error::Validation(format!("bad CreditScore {:?}", get(5))))?,
            latent_score: 0.0,
            latent_noise: None,
            roof_health: None,
            next_year_loss: None,
        };
        if visibility == Visibility::Full {
            rec.roof_health = Some(RoofHealth::parse(get(6))?);
            rec.latent_score = parse_f64(get(7), "LatentScore")?;
            rec.next_year_loss = Some(parse_f64(get(8), "NextYearLoss")?);
        }
        records.push(rec);
    }
    Ok((records, visibility))
}

/// Metadata written alongside every generated dataset.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub prng: String,
    pub config_hash: String,
    pub master_seed: u64,
    pub n_policies: usize,
    /// Wall-clock generation time (Unix seconds); the only field that varies
    /// between identical runs.
    pub generated_at_unix: u64,
}

impl DatasetManifest {
    pub fn new(config_hash: impl Into<String>, master_seed: u64, n_policies: usize) -> Self {
        let generated_at_unix = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        DatasetManifest {
            prng: PRNG_ID.to_string(),
            config_hash: config_hash.into(),
            master_seed,
            n_policies,
            generated_at_unix,
        }
    }

    pub fn write(&self, dest: impl AsRef<Path>) -> Result<()> {
        let path = dest.as_ref();
        let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let body = serde_json::to_string_pretty(self).expect("manifest serializes");
        writeln!(f, "{body}").map_err(|e| Error::io(path, e))
    }
}
