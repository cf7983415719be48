//! Seeded sampling for every distribution family the generator uses.
//!
//! All samplers are pure functions of `(params, stream)`: repeated calls with
//! the same [`SeedSpec`] return identical sequences, and there is no global
//! generator to advance. Discrete families return integer-valued reals from
//! [`sample`] (exact below 2^53); typed draws are available on the free
//! functions.

pub mod rng;

pub use rng::{SeedSpec, StreamRng, PRNG_ID};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Parameter set for one distribution family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DistributionParams {
    LogNormal {
        mu_log: f64,
        sigma_log: f64,
    },
    Beta {
        a: f64,
        b: f64,
    },
    Categorical {
        labels: Vec<String>,
        probs: Vec<f64>,
    },
    NegBinomial {
        r: f64,
        mean: f64,
    },
    GammaShapeScale {
        k: f64,
        theta: f64,
    },
    Normal {
        mu: f64,
        sigma: f64,
    },
    FicoBuckets {
        bucket_bounds: Vec<(u32, u32)>,
        bucket_probs: Vec<f64>,
    },
}

const PROB_SUM_TOL: f64 = 1e-12;

fn check_probs(probs: &[f64], what: &str) -> Result<()> {
    if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(Error::Param(format!(
            "{what}: probabilities must be finite and nonnegative"
        )));
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > PROB_SUM_TOL {
        return Err(Error::Param(format!(
            "{what}: probabilities sum to {sum}, expected 1"
        )));
    }
    Ok(())
}

impl DistributionParams {
    pub fn validate(&self) -> Result<()> {
        use DistributionParams::*;
        match self {
            LogNormal { mu_log, sigma_log } => {
                if !mu_log.is_finite() || !sigma_log.is_finite() || *sigma_log < 0.0 {
                    return Err(Error::Param(format!(
                        "log-normal: mu_log {mu_log}, sigma_log {sigma_log} (sigma_log must be >= 0)"
                    )));
                }
            }
            Beta { a, b } => {
                if !(a.is_finite() && b.is_finite() && *a > 0.0 && *b > 0.0) {
                    return Err(Error::Param(format!(
                        "beta: shapes must be > 0, got a={a}, b={b}"
                    )));
                }
            }
            Categorical { labels, probs } => {
                if labels.is_empty() || labels.len() != probs.len() {
                    return Err(Error::Param(
                        "categorical: labels and probs must be nonempty and equal-length".into(),
                    ));
                }
                check_probs(probs, "categorical")?;
            }
            NegBinomial { r, mean } => {
                if !(r.is_finite() && *r > 0.0) {
                    return Err(Error::Param(format!(
                        "negative binomial: size r must be > 0, got {r}"
                    )));
                }
                if !(mean.is_finite() && *mean >= 0.0) {
                    return Err(Error::Param(format!(
                        "negative binomial: mean must be >= 0, got {mean}"
                    )));
                }
            }
            GammaShapeScale { k, theta } => {
                if !(k.is_finite() && *k > 0.0 && theta.is_finite() && *theta > 0.0) {
                    return Err(Error::Param(format!(
                        "gamma: shape and scale must be > 0, got k={k}, theta={theta}"
                    )));
                }
            }
            Normal { mu, sigma } => {
                if !(mu.is_finite() && sigma.is_finite() && *sigma >= 0.0) {
                    return Err(Error::Param(format!(
                        "normal: sigma must be >= 0, got mu={mu}, sigma={sigma}"
                    )));
                }
            }
            FicoBuckets {
                bucket_bounds,
                bucket_probs,
            } => {
                if bucket_bounds.is_empty() || bucket_bounds.len() != bucket_probs.len() {
                    return Err(Error::Param(
                        "fico buckets: bounds and probs must be nonempty and equal-length".into(),
                    ));
                }
                check_probs(bucket_probs, "fico buckets")?;
                let mut prev_hi: Option<u32> = None;
                for &(lo, hi) in bucket_bounds {
                    if lo > hi || lo < 300 || hi > 850 {
                        return Err(Error::Param(format!(
                            "fico buckets: bucket [{lo}, {hi}] must be ordered within [300, 850]"
                        )));
                    }
                    if let Some(p) = prev_hi {
                        if lo <= p {
                            return Err(Error::Param(format!(
                                "fico buckets: bucket [{lo}, {hi}] overlaps or is out of order (previous high {p})"
                            )));
                        }
                    }
                    prev_hi = Some(hi);
                }
            }
        }
        Ok(())
    }
}

/// Draw `n` values from `params` on the stream named by `seed`.
///
/// Discrete families return integer-valued reals; `Categorical` returns the
/// category index.
pub fn sample(params: &DistributionParams, seed: &SeedSpec, n: usize) -> Result<Vec<f64>> {
    params.validate()?;
    let mut rng = seed.rng();
    let mut out = Vec::with_capacity(n);
    use DistributionParams::*;
    for _ in 0..n {
        let v = match params {
            LogNormal { mu_log, sigma_log } => lognormal(&mut rng, *mu_log, *sigma_log),
            Beta { a, b } => beta(&mut rng, *a, *b),
            Categorical { probs, .. } => categorical_index(&mut rng, probs) as f64,
            NegBinomial { r, mean } => neg_binomial(&mut rng, *r, *mean) as f64,
            GammaShapeScale { k, theta } => gamma(&mut rng, *k, *theta),
            Normal { mu, sigma } => normal(&mut rng, *mu, *sigma),
            FicoBuckets {
                bucket_bounds,
                bucket_probs,
            } => fico_score(&mut rng, bucket_bounds, bucket_probs) as f64,
        };
        out.push(v);
    }
    Ok(out)
}

/// One negative-binomial draw realized as a Gamma-mixed Poisson:
/// rate ~ Gamma(shape=r, scale=mean/r), count ~ Poisson(rate).
/// Identical in distribution to NB with size `r` and the given mean;
/// non-integer `r` is fine.
pub fn negbinomial_via_gamma_poisson(r: f64, mean: f64, seed: &SeedSpec) -> Result<u64> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::Param(format!(
            "negative binomial: size r must be > 0, got {r}"
        )));
    }
    if !(mean.is_finite() && mean >= 0.0) {
        return Err(Error::Param(format!(
            "negative binomial: mean must be >= 0, got {mean}"
        )));
    }
    Ok(neg_binomial(&mut seed.rng(), r, mean))
}

/// Normal via the Marsaglia polar method. `sigma == 0` degenerates to `mu`.
pub fn normal(rng: &mut StreamRng, mu: f64, sigma: f64) -> f64 {
    if sigma == 0.0 {
        return mu;
    }
    loop {
        let u = 2.0 * rng.next_f64() - 1.0;
        let v = 2.0 * rng.next_f64() - 1.0;
        let s = u * u + v * v;
        if s > 0.0 && s < 1.0 {
            return mu + sigma * u * (-2.0 * s.ln() / s).sqrt();
        }
    }
}

pub fn lognormal(rng: &mut StreamRng, mu_log: f64, sigma_log: f64) -> f64 {
    normal(rng, mu_log, sigma_log).exp()
}

/// Gamma(shape k, scale theta) via Marsaglia-Tsang squeeze rejection,
/// with the `U^(1/k)` boost for shape < 1. Valid for all k > 0.
pub fn gamma(rng: &mut StreamRng, k: f64, theta: f64) -> f64 {
    debug_assert!(k > 0.0 && theta > 0.0);
    if k < 1.0 {
        let boost = rng.next_open01().powf(1.0 / k);
        return gamma(rng, k + 1.0, theta) * boost;
    }
    let d = k - 1.0 / 3.0;
    let c = 1.0 / (3.0 * d.sqrt());
    loop {
        let x = normal(rng, 0.0, 1.0);
        let t = 1.0 + c * x;
        if t <= 0.0 {
            continue;
        }
        let v = t * t * t;
        let u = rng.next_open01();
        let x2 = x * x;
        if u < 1.0 - 0.0331 * x2 * x2 {
            return d * v * theta;
        }
        if u.ln() < 0.5 * x2 + d * (1.0 - v + v.ln()) {
            return d * v * theta;
        }
    }
}

/// Beta(a, b) as Ga / (Ga + Gb) with unit-scale gamma draws.
pub fn beta(rng: &mut StreamRng, a: f64, b: f64) -> f64 {
    debug_assert!(a > 0.0 && b > 0.0);
    loop {
        let x = gamma(rng, a, 1.0);
        let y = gamma(rng, b, 1.0);
        let s = x + y;
        if s > 0.0 {
            return x / s;
        }
    }
}

/// Poisson draw: Knuth's product method below rate 10, Hormann's PTRS
/// transformed rejection above (exact for all rates, O(1) per draw).
pub fn poisson(rng: &mut StreamRng, rate: f64) -> u64 {
    debug_assert!(rate >= 0.0);
    if rate == 0.0 {
        return 0;
    }
    if rate < 10.0 {
        let limit = (-rate).exp();
        let mut k: u64 = 0;
        let mut p = 1.0;
        loop {
            p *= rng.next_f64();
            if p <= limit {
                return k;
            }
            k += 1;
        }
    }
    poisson_ptrs(rng, rate)
}

/// Hormann (1993) PTRS, valid for rate >= 10.
fn poisson_ptrs(rng: &mut StreamRng, rate: f64) -> u64 {
    let b = 0.931 + 2.53 * rate.sqrt();
    let a = -0.059 + 0.02483 * b;
    let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    let v_r = 0.9277 - 3.6224 / (b - 2.0);
    let ln_rate = rate.ln();
    loop {
        let u = rng.next_f64() - 0.5;
        let v = rng.next_open01();
        let us = 0.5 - u.abs();
        let kf = ((2.0 * a / us + b) * u + rate + 0.43).floor();
        if us >= 0.07 && v <= v_r {
            return kf as u64;
        }
        if kf < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        if (v * inv_alpha / (a / (us * us) + b)).ln() <= kf * ln_rate - rate - ln_gamma(kf + 1.0) {
            return kf as u64;
        }
    }
}

/// Negative binomial (size r, mean m) as a Gamma-mixed Poisson.
pub fn neg_binomial(rng: &mut StreamRng, r: f64, mean: f64) -> u64 {
    debug_assert!(r > 0.0 && mean >= 0.0);
    if mean == 0.0 {
        return 0;
    }
    let rate = gamma(rng, r, mean / r);
    poisson(rng, rate)
}

/// Index draw by inverse CDF over the (validated) probability vector.
pub fn categorical_index(rng: &mut StreamRng, probs: &[f64]) -> usize {
    let u = rng.next_f64();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

/// Integer credit score: categorical bucket, then uniform integer within it.
pub fn fico_score(rng: &mut StreamRng, bounds: &[(u32, u32)], probs: &[f64]) -> u32 {
    let b = categorical_index(rng, probs);
    let (lo, hi) = bounds[b];
    lo + rng.next_u64_below((hi - lo + 1) as u64) as u32
}

/// Lanczos log-gamma (g = 7, n = 9); used only by the PTRS acceptance test.
#[allow(clippy::excessive_precision)] // published coefficients kept verbatim
fn ln_gamma(x: f64) -> f64 {
    const COEFFS: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_59,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEFFS[0];
    for (i, c) in COEFFS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}
