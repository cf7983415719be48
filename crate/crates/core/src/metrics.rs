//! Rank-based evaluation: raw and normalized Gini, plus the ordinal
//! correlation reported for label channels.
//!
//! Raw Gini: sort pairs by descending prediction, accumulate the cumulative
//! true sums C_k, and return (1/n) * sum_k C_k / Y - (n+1)/(2n). The
//! normalized form divides by the Gini of the truth against itself, so 1 is a
//! perfect ranking, 0 is random, and negative is worse than random.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::policy::RoofHealth;

/// How equal predictions are ordered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TiePolicy {
    /// Stable: ties keep ascending original index. Matches common scoring
    /// scripts and is the default.
    #[default]
    StableIndex,
    /// Average of the two extreme orderings (ties resolved best-case and
    /// worst-case for the score); for sensitivity analysis.
    AverageExtremes,
}

/// Which correlation the Corr. column reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationKind {
    /// Pearson on ordinal codes 0/1/2 (default).
    #[default]
    Pearson,
    /// Spearman (Pearson on average ranks).
    Spearman,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GiniResult {
    pub raw: f64,
    /// Raw Gini of the truth ranked by itself.
    pub perfect_raw: f64,
    pub normalized: f64,
    pub n: usize,
    pub tie_policy: TiePolicy,
}

fn validate_pair(y: &[f64], y_hat: &[f64]) -> Result<()> {
    if y.len() != y_hat.len() {
        return Err(Error::Usage(format!(
            "length mismatch: {} truths vs {} predictions",
            y.len(),
            y_hat.len()
        )));
    }
    if y.is_empty() {
        return Err(Error::Usage("empty input".into()));
    }
    if y.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::Validation(
            "truths must be finite and nonnegative".into(),
        ));
    }
    if y_hat.iter().any(|v| !v.is_finite()) {
        return Err(Error::Validation("predictions must be finite".into()));
    }
    Ok(())
}

/// Raw Gini with ties ordered by `key(i)` ascending within equal predictions.
fn raw_gini_with_tiebreak<K: Ord, F: Fn(usize) -> K>(y: &[f64], y_hat: &[f64], key: F) -> f64 {
    let n = y.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        y_hat[j]
            .partial_cmp(&y_hat[i])
            .expect("finite predictions")
            .then_with(|| key(i).cmp(&key(j)))
    });
    let total: f64 = y.iter().sum();
    let mut cum = 0.0;
    let mut acc = 0.0;
    for &i in &order {
        cum += y[i];
        acc += cum / total;
    }
    acc / n as f64 - (n as f64 + 1.0) / (2.0 * n as f64)
}

/// Raw Gini coefficient of `y` ranked by descending `y_hat`.
pub fn raw_gini(y: &[f64], y_hat: &[f64], tie_policy: TiePolicy) -> Result<f64> {
    validate_pair(y, y_hat)?;
    let total: f64 = y.iter().sum();
    if total <= 0.0 {
        return Err(Error::UndefinedMetric(
            "raw Gini is undefined when the truths sum to zero".into(),
        ));
    }
    Ok(match tie_policy {
        TiePolicy::StableIndex => raw_gini_with_tiebreak(y, y_hat, |i| i),
        TiePolicy::AverageExtremes => {
            // Best case: high truths first within a tie. Worst case: low first.
            let best = raw_gini_with_tiebreak(y, y_hat, |i| std::cmp::Reverse(y[i].to_bits()));
            let worst = raw_gini_with_tiebreak(y, y_hat, |i| y[i].to_bits());
            (best + worst) / 2.0
        }
    })
}

/// Normalized Gini: raw(y, y_hat) / raw(y, y). Errors when the truth vector is
/// constant (the normalizer is zero).
pub fn normalized_gini(y: &[f64], y_hat: &[f64], tie_policy: TiePolicy) -> Result<GiniResult> {
    let raw = raw_gini(y, y_hat, tie_policy)?;
    let perfect_raw = raw_gini(y, y, tie_policy)?;
    if perfect_raw <= 0.0 {
        return Err(Error::UndefinedMetric(
            "normalized Gini is undefined for a constant truth vector".into(),
        ));
    }
    Ok(GiniResult {
        raw,
        perfect_raw,
        normalized: raw / perfect_raw,
        n: y.len(),
        tie_policy,
    })
}

/// Pearson correlation; errors when either vector is constant.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Usage(format!(
            "length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::Usage("correlation needs at least 2 points".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        let dx = a - mx;
        let dy = b - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedMetric(
            "correlation is undefined for a constant vector".into(),
        ));
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// Average ranks (1-based, ties share their mean rank).
fn average_ranks(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| x[i].total_cmp(&x[j]));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && x[order[j + 1]] == x[order[i]] {
            j += 1;
        }
        let mean_rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = mean_rank;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Usage(format!(
            "length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    pearson(&average_ranks(x), &average_ranks(y))
}

/// Correlation between two three-level label vectors on their ordinal codes.
pub fn ordinal_correlation(a: &[RoofHealth], b: &[RoofHealth]) -> Result<f64> {
    ordinal_correlation_with(a, b, CorrelationKind::Pearson)
}

pub fn ordinal_correlation_with(
    a: &[RoofHealth],
    b: &[RoofHealth],
    kind: CorrelationKind,
) -> Result<f64> {
    let xa: Vec<f64> = a.iter().map(|r| r.ordinal() as f64).collect();
    let xb: Vec<f64> = b.iter().map(|r| r.ordinal() as f64).collect();
    match kind {
        CorrelationKind::Pearson => pearson(&xa, &xb),
        CorrelationKind::Spearman => spearman(&xa, &xb),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use RoofHealth::{Bad, Fair, Good};

    #[test]
    fn raw_gini_hand_cases() {
        // Sorted true values [10, 5, 0]: C = [10, 15, 15],
        // G = (1/3)(10/15 + 1 + 1) - 4/6 = 2/9.
        let y = [10.0, 0.0, 5.0];
        let g = raw_gini(&y, &[3.0, 1.0, 2.0], TiePolicy::StableIndex).unwrap();
        assert!((g - 2.0 / 9.0).abs() < 1e-15);

        // Reverse ranking: -2/9.
        let g_rev = raw_gini(&y, &[1.0, 3.0, 2.0], TiePolicy::StableIndex).unwrap();
        assert!((g_rev + 2.0 / 9.0).abs() < 1e-15);

        // Single element: (1/1)(1) - 2/2 = 0.
        let g1 = raw_gini(&[4.0], &[1.0], TiePolicy::StableIndex).unwrap();
        assert_eq!(g1, 0.0);
    }

    #[test]
    fn normalized_gini_hand_cases() {
        let y = [10.0, 0.0, 5.0];
        let perfect = normalized_gini(&y, &[3.0, 1.0, 2.0], TiePolicy::StableIndex).unwrap();
        assert!((perfect.normalized - 1.0).abs() < 1e-15);

        // Partial ranking [3, 2, 1]: C = [10, 10, 15], raw = 1/9, normalized 0.5.
        let half = normalized_gini(&y, &[3.0, 2.0, 1.0], TiePolicy::StableIndex).unwrap();
        assert!((half.raw - 1.0 / 9.0).abs() < 1e-15);
        assert!((half.normalized - 0.5).abs() < 1e-15);

        // Fully reversed ranking (lowest truth ranked first): exactly -1.
        let reversed = normalized_gini(&y, &[1.0, 3.0, 2.0], TiePolicy::StableIndex).unwrap();
        assert!((reversed.normalized + 1.0).abs() < 1e-15);
    }

    #[test]
    fn self_prediction_is_perfect() {
        let y = [3.0, 9.5, 0.0, 2.25, 7.0];
        let res = normalized_gini(&y, &y, TiePolicy::StableIndex).unwrap();
        assert!((res.normalized - 1.0).abs() < 1e-15);
    }

    #[test]
    fn undefined_cases_raise() {
        assert!(matches!(
            raw_gini(&[0.0, 0.0], &[1.0, 2.0], TiePolicy::StableIndex),
            Err(Error::UndefinedMetric(_))
        ));
        assert!(matches!(
            normalized_gini(&[2.0, 2.0], &[1.0, 2.0], TiePolicy::StableIndex),
            Err(Error::UndefinedMetric(_))
        ));
        assert!(matches!(
            raw_gini(&[1.0], &[1.0, 2.0], TiePolicy::StableIndex),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn average_extremes_brackets_stable_index() {
        // All predictions tied: stable-index sits between the two extremes.
        let y = [5.0, 1.0, 3.0, 0.0, 9.0, 2.0];
        let y_hat = [1.0; 6];
        let stable = raw_gini(&y, &y_hat, TiePolicy::StableIndex).unwrap();
        let avg = raw_gini(&y, &y_hat, TiePolicy::AverageExtremes).unwrap();
        // With every prediction tied the extremes are the perfect and the
        // perfectly reversed ordering, which cancel.
        assert!(avg.abs() < 1e-15);
        let perfect = raw_gini(&y, &y, TiePolicy::StableIndex).unwrap();
        assert!(stable.abs() <= perfect);
    }

    #[test]
    fn ordinal_correlation_cases() {
        let a = [Good, Good, Fair, Bad];
        assert!((ordinal_correlation(&a, &a).unwrap() - 1.0).abs() < 1e-15);

        // Swapped extremes with balanced Good/Bad counts: exactly -1.
        let x = [Good, Bad, Fair, Good, Bad];
        let y = [Bad, Good, Fair, Bad, Good];
        assert!((ordinal_correlation(&x, &y).unwrap() + 1.0).abs() < 1e-12);

        // Direct Pearson on codes a=[0,0,1,2], b=[0,1,1,2]:
        // cov = 2, var_a = 2.75, var_b = 2 => r = 2/sqrt(5.5).
        let b = [Good, Fair, Fair, Bad];
        let r = ordinal_correlation(&a, &b).unwrap();
        assert!((r - 2.0 / 5.5f64.sqrt()).abs() < 1e-12);
        assert!((r - 0.852803).abs() < 1e-6);
        // Symmetric.
        assert_eq!(r, ordinal_correlation(&b, &a).unwrap());
        // The Spearman flag dispatches and stays bounded.
        let rs = ordinal_correlation_with(&a, &b, CorrelationKind::Spearman).unwrap();
        assert!((-1.0..=1.0).contains(&rs) && rs > 0.5);
    }

    #[test]
    fn constant_labels_are_undefined() {
        let a = [Good, Good, Good];
        let b = [Good, Fair, Bad];
        assert!(matches!(
            ordinal_correlation(&a, &b),
            Err(Error::UndefinedMetric(_))
        ));
    }

    #[test]
    fn spearman_agrees_on_monotone_data() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [10.0, 100.0, 1000.0, 10000.0];
        assert!((spearman(&x, &y).unwrap() - 1.0).abs() < 1e-15);
        // Pearson is below 1 on this convex relationship.
        assert!(pearson(&x, &y).unwrap() < 1.0);
    }

    #[test]
    fn random_baseline_is_near_zero() {
        use crate::distributions::SeedSpec;
        let n = 1000;
        let mut rng = SeedSpec::new(0, "gini-baseline").rng();
        let y: Vec<f64> = (0..n).map(|_| rng.next_f64() * 10.0).collect();
        let mut y_hat: Vec<f64> = y.clone();
        let mut sum = 0.0;
        let trials = 1000;
        for _ in 0..trials {
            rng.shuffle(&mut y_hat);
            sum += normalized_gini(&y, &y_hat, TiePolicy::StableIndex)
                .unwrap()
                .normalized;
        }
        let mean = sum / trials as f64;
        assert!(mean.abs() < 0.02, "random-permutation mean Gini {mean}");
    }
}
