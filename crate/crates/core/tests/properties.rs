//! Property tests: distribution support, metric bounds and symmetries, and
//! rank-based threshold invariance.

use proptest::prelude::*;

use roofbench_core::distributions::{sample, DistributionParams, SeedSpec};
use roofbench_core::metrics::{normalized_gini, raw_gini, TiePolicy};
use roofbench_core::policy::{
    assign_roof_health, policy_id, PolicyRecord, RoofThresholds, WallType,
};

fn arb_probs(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, len).prop_map(|w| {
        let sum: f64 = w.iter().sum();
        w.into_iter().map(|x| x / sum).collect()
    })
}

fn arb_params() -> impl Strategy<Value = DistributionParams> {
    prop_oneof![
        (-5.0f64..15.0, 0.0f64..2.0)
            .prop_map(|(mu_log, sigma_log)| DistributionParams::LogNormal { mu_log, sigma_log }),
        (0.2f64..10.0, 0.2f64..10.0).prop_map(|(a, b)| DistributionParams::Beta { a, b }),
        (2usize..6).prop_flat_map(|len| arb_probs(len).prop_map(move |probs| {
            DistributionParams::Categorical {
                labels: (0..len).map(|i| format!("c{i}")).collect(),
                probs,
            }
        })),
        (0.5f64..50.0, 0.0f64..20.0)
            .prop_map(|(r, mean)| DistributionParams::NegBinomial { r, mean }),
        (0.2f64..10.0, 0.01f64..100.0)
            .prop_map(|(k, theta)| DistributionParams::GammaShapeScale { k, theta }),
        (-100.0f64..100.0, 0.0f64..10.0)
            .prop_map(|(mu, sigma)| DistributionParams::Normal { mu, sigma }),
        arb_probs(5).prop_map(|probs| DistributionParams::FicoBuckets {
            bucket_bounds: vec![(300, 579), (580, 669), (670, 739), (740, 799), (800, 850)],
            bucket_probs: probs,
        }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    /// No sample ever violates its family's support.
    #[test]
    fn samples_respect_support(params in arb_params(), seed in any::<u64>()) {
        let xs = sample(&params, &SeedSpec::new(seed, "support"), 100).unwrap();
        prop_assert_eq!(xs.len(), 100);
        for x in xs {
            prop_assert!(x.is_finite());
            match &params {
                DistributionParams::LogNormal { .. } => prop_assert!(x > 0.0),
                DistributionParams::Beta { .. } => prop_assert!((0.0..=1.0).contains(&x)),
                DistributionParams::Categorical { probs, .. } => {
                    prop_assert!(x.fract() == 0.0 && (x as usize) < probs.len())
                }
                DistributionParams::NegBinomial { .. } => {
                    prop_assert!(x.fract() == 0.0 && x >= 0.0)
                }
                DistributionParams::GammaShapeScale { .. } => prop_assert!(x > 0.0),
                DistributionParams::Normal { .. } => {}
                DistributionParams::FicoBuckets { bucket_bounds, .. } => {
                    let v = x as u32;
                    prop_assert!(x.fract() == 0.0);
                    prop_assert!(bucket_bounds.iter().any(|&(lo, hi)| v >= lo && v <= hi));
                }
            }
        }
    }

    /// Identical seed specs reproduce bitwise-identical sequences.
    #[test]
    fn sampling_is_reproducible(params in arb_params(), seed in any::<u64>()) {
        let a = sample(&params, &SeedSpec::new(seed, "repro"), 32).unwrap();
        let b = sample(&params, &SeedSpec::new(seed, "repro"), 32).unwrap();
        prop_assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    /// Normalized Gini stays in [-1, 1] for every accepted input.
    #[test]
    fn normalized_gini_bounds(
        y in prop::collection::vec(0.0f64..100.0, 2..60),
        y_hat in prop::collection::vec(-50.0f64..50.0, 2..60),
    ) {
        let n = y.len().min(y_hat.len());
        let y = &y[..n];
        let y_hat = &y_hat[..n];
        prop_assume!(y.iter().sum::<f64>() > 0.0);
        prop_assume!(y.iter().any(|v| *v != y[0]));
        for tie in [TiePolicy::StableIndex, TiePolicy::AverageExtremes] {
            let res = normalized_gini(y, y_hat, tie).unwrap();
            prop_assert!(res.normalized >= -1.0 - 1e-9 && res.normalized <= 1.0 + 1e-9,
                "normalized {} out of bounds", res.normalized);
        }
    }

    /// Strictly increasing transforms of the predictions leave the metric
    /// unchanged exactly (no ties created or destroyed). Ranks and a
    /// power-of-two scale are exact monotone transforms in floating point.
    #[test]
    fn monotone_invariance(
        y in prop::collection::vec(0.0f64..100.0, 3..50),
        seed in any::<u64>(),
    ) {
        prop_assume!(y.iter().sum::<f64>() > 0.0);
        prop_assume!(y.iter().any(|v| *v != y[0]));
        let n = y.len();
        // Distinct predictions from a seeded shuffle of 0..n.
        let mut y_hat: Vec<f64> = (0..n).map(|i| i as f64).collect();
        SeedSpec::new(seed, "monotone").rng().shuffle(&mut y_hat);
        let base = normalized_gini(&y, &y_hat, TiePolicy::StableIndex).unwrap();

        let scaled: Vec<f64> = y_hat.iter().map(|v| v * 8.0).collect();
        let res_scaled = normalized_gini(&y, &scaled, TiePolicy::StableIndex).unwrap();
        prop_assert_eq!(base.normalized, res_scaled.normalized);

        // Rank transform.
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| y_hat[a].total_cmp(&y_hat[b]));
        let mut ranks = vec![0.0; n];
        for (rank, &i) in order.iter().enumerate() {
            ranks[i] = rank as f64;
        }
        let res_ranked = normalized_gini(&y, &ranks, TiePolicy::StableIndex).unwrap();
        prop_assert_eq!(base.normalized, res_ranked.normalized);
    }

    /// For all-distinct predictions, negating them reverses the ranking and
    /// negates the raw Gini; a perfectly reversed ranking scores -1.
    #[test]
    fn ranking_reversal_antisymmetry(
        y in prop::collection::vec(0.0f64..100.0, 3..50),
        seed in any::<u64>(),
    ) {
        prop_assume!(y.iter().sum::<f64>() > 0.0);
        prop_assume!(y.iter().any(|v| *v != y[0]));
        let n = y.len();
        let mut y_hat: Vec<f64> = (0..n).map(|i| i as f64 + 1.0).collect();
        SeedSpec::new(seed, "reversal").rng().shuffle(&mut y_hat);
        let forward = raw_gini(&y, &y_hat, TiePolicy::StableIndex).unwrap();
        let negated: Vec<f64> = y_hat.iter().map(|v| -v).collect();
        let backward = raw_gini(&y, &negated, TiePolicy::StableIndex).unwrap();
        prop_assert!((forward + backward).abs() < 1e-9,
            "raw Gini not antisymmetric: {} vs {}", forward, backward);

        // Perfect reverse: rank by the negated truths.
        let mut distinct = y.to_vec();
        distinct.sort_unstable_by(f64::total_cmp);
        distinct.dedup();
        if distinct.len() == n {
            let reverse_rank: Vec<f64> = y.iter().map(|v| -v).collect();
            let res = normalized_gini(&y, &reverse_rank, TiePolicy::StableIndex).unwrap();
            prop_assert!((res.normalized + 1.0).abs() < 1e-9);
        }
    }

    /// Scaling every latent score by a positive constant never changes the
    /// roof-health assignment (the thresholds are rank-based).
    #[test]
    fn percentile_assignment_scale_invariant(
        scores in prop::collection::vec(-1000.0f64..1000.0, 1..150),
        scale in 0.01f64..64.0,
    ) {
        let record = |i: usize, s: f64| PolicyRecord {
            policy_id: policy_id(i + 1),
            house_value: 1.0,
            house_age: 0.0,
            wall_type: WallType::Brick,
            area_risk: 0.0,
            credit_score: 700,
            latent_score: s,
            latent_noise: None,
            roof_health: None,
            next_year_loss: None,
        };
        let thresholds = RoofThresholds::default();
        let mut base: Vec<PolicyRecord> =
            scores.iter().enumerate().map(|(i, &s)| record(i, s)).collect();
        assign_roof_health(&mut base, &thresholds).unwrap();
        let mut scaled: Vec<PolicyRecord> = scores
            .iter()
            .enumerate()
            .map(|(i, &s)| record(i, s * scale))
            .collect();
        assign_roof_health(&mut scaled, &thresholds).unwrap();
        for (a, b) in base.iter().zip(&scaled) {
            prop_assert_eq!(a.roof_health, b.roof_health);
        }
    }
}
