//! Compound frequency-severity loss simulation and the closed-form expected
//! loss used by the oracle tier.
//!
//! Per policy: claim count N ~ NB(size nb_r, mean lambda) drawn as a
//! Gamma-mixed Poisson, severities Z_j ~ Gamma(gamma_k, exp(mu)/gamma_k),
//! total loss Y = sum of Z_j (0 when N = 0). Frequency and severity use
//! separate per-policy substreams, so reconfiguring the severity shape never
//! perturbs claim counts.

use std::fs;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::distributions::{self, SeedSpec};
use crate::error::{Error, Result};
use crate::policy::{FrequencyCoeffs, PolicyRecord, SeverityCoeffs, WallType};

/// Simulated outcome for one policy.
#[derive(Debug, Clone, PartialEq)]
pub struct ClaimOutcome {
    pub policy_id: String,
    /// Expected claim count.
    pub lambda: f64,
    pub claim_count: u64,
    /// Log-severity location; mean single-claim loss is exp(mu).
    pub mu: f64,
    pub claim_losses: Vec<f64>,
    pub total_loss: f64,
}

/// Expected claim count for one policy. Strictly positive.
pub fn frequency_rate(record: &PolicyRecord, coeffs: &FrequencyCoeffs) -> Result<f64> {
    if !record.house_value.is_finite() || record.house_value <= 0.0 {
        return Err(Error::Validation(format!(
            "{}: house value must be > 0 to evaluate the frequency model, got {}",
            record.policy_id, record.house_value
        )));
    }
    let roof = record.roof_health()?;
    let exponent = coeffs.intercept
        + coeffs.log_value_coeff * (record.house_value / coeffs.value_ref).ln()
        + coeffs.age_coeff * record.house_age
        + coeffs.risk_coeff * record.area_risk
        + coeffs.alpha_rh[roof.ordinal()];
    Ok(exponent.exp())
}

/// Log-severity location for one policy.
pub fn severity_location(record: &PolicyRecord, coeffs: &SeverityCoeffs) -> Result<f64> {
    let roof = record.roof_health()?;
    let wood = if record.wall_type == WallType::Wood {
        1.0
    } else {
        0.0
    };
    Ok(coeffs.intercept
        + coeffs.wood_coeff * wood
        + coeffs.risk_coeff * record.area_risk
        + coeffs.beta_rh[roof.ordinal()])
}

fn simulate_one(
    record: &PolicyRecord,
    freq: &FrequencyCoeffs,
    sev: &SeverityCoeffs,
    master_seed: u64,
) -> Result<ClaimOutcome> {
    let lambda = frequency_rate(record, freq)?;
    let mu = severity_location(record, sev)?;
    let count_seed = SeedSpec::new(master_seed, format!("loss:{}:freq", record.policy_id));
    let claim_count = distributions::negbinomial_via_gamma_poisson(freq.nb_r, lambda, &count_seed)?;
    let mut sev_rng = SeedSpec::new(master_seed, format!("loss:{}:sev", record.policy_id)).rng();
    let theta = mu.exp() / sev.gamma_k;
    let claim_losses: Vec<f64> = (0..claim_count)
        .map(|_| distributions::gamma(&mut sev_rng, sev.gamma_k, theta))
        .collect();
    let total_loss = claim_losses.iter().sum();
    Ok(ClaimOutcome {
        policy_id: record.policy_id.clone(),
        lambda,
        claim_count,
        mu,
        claim_losses,
        total_loss,
    })
}

/// Simulate next-year losses for the whole batch. Deterministic per
/// `(records, coeffs, master_seed)` and independent of scheduling.
pub fn simulate_losses(
    records: &[PolicyRecord],
    freq: &FrequencyCoeffs,
    sev: &SeverityCoeffs,
    master_seed: u64,
) -> Result<Vec<ClaimOutcome>> {
    records
        .par_iter()
        .map(|rec| simulate_one(rec, freq, sev, master_seed))
        .collect()
}

/// Copy simulated totals onto the records' `next_year_loss` field.
/// Outcomes must be positionally aligned with the records.
pub fn apply_losses(records: &mut [PolicyRecord], outcomes: &[ClaimOutcome]) -> Result<()> {
    if records.len() != outcomes.len() {
        return Err(Error::Usage(format!(
            "records ({}) and outcomes ({}) differ in length",
            records.len(),
            outcomes.len()
        )));
    }
    for (rec, out) in records.iter_mut().zip(outcomes) {
        if rec.policy_id != out.policy_id {
            return Err(Error::Usage(format!(
                "outcome {} does not match record {}",
                out.policy_id, rec.policy_id
            )));
        }
        rec.next_year_loss = Some(out.total_loss);
    }
    Ok(())
}

/// Sampling-free expected loss per policy: lambda * exp(mu). The oracle is
/// granted the true roof health.
pub fn oracle_predict(
    records: &[PolicyRecord],
    freq: &FrequencyCoeffs,
    sev: &SeverityCoeffs,
) -> Result<Vec<(String, f64)>> {
    records
        .iter()
        .map(|rec| {
            let lambda = frequency_rate(rec, freq)?;
            let mu = severity_location(rec, sev)?;
            Ok((rec.policy_id.clone(), lambda * mu.exp()))
        })
        .collect()
}

#[derive(Serialize)]
struct ClaimLine<'a> {
    policy_id: &'a str,
    claim_index: usize,
    loss: f64,
}

/// Per-claim audit trail: one JSON object per claim.
pub fn write_claims_jsonl(outcomes: &[ClaimOutcome], dest: impl AsRef<Path>) -> Result<()> {
    let path = dest.as_ref();
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    for out in outcomes {
        for (claim_index, loss) in out.claim_losses.iter().enumerate() {
            let line = ClaimLine {
                policy_id: &out.policy_id,
                claim_index,
                loss: *loss,
            };
            writeln!(
                f,
                "{}",
                serde_json::to_string(&line).expect("claim line serializes")
            )
            .map_err(|e| Error::io(path, e))?;
        }
    }
    Ok(())
}
