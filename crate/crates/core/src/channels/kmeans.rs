//! Lloyd's k-means with k-means++ seeding.
//!
//! Deterministic for a fixed stream: the first center is a uniform pick, the
//! rest are D^2-weighted picks, assignment ties go to the lowest center index,
//! and center updates accumulate in point-index order.

use crate::distributions::StreamRng;
use crate::error::{Error, Result};

pub const MAX_ITERS: usize = 100;
pub const CONVERGENCE_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct KMeansFit {
    pub assignments: Vec<usize>,
    pub centers: Vec<Vec<f64>>,
    pub iterations: usize,
}

fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(point: &[f64], centers: &[Vec<f64>]) -> (usize, f64) {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (c, center) in centers.iter().enumerate() {
        let d = dist_sq(point, center);
        if d < best_d {
            best_d = d;
            best = c;
        }
    }
    (best, best_d)
}

fn seed_plus_plus(points: &[Vec<f64>], k: usize, rng: &mut StreamRng) -> Vec<Vec<f64>> {
    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(k);
    centers.push(points[rng.pick_index(points.len())].clone());
    let mut d2: Vec<f64> = points.iter().map(|p| dist_sq(p, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let target = rng.next_f64() * total;
            let mut acc = 0.0;
            let mut chosen = points.len() - 1;
            for (i, w) in d2.iter().enumerate() {
                acc += w;
                if target < acc {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            // All remaining mass at existing centers; fall back to uniform.
            rng.pick_index(points.len())
        };
        centers.push(points[next].clone());
        for (i, p) in points.iter().enumerate() {
            let d = dist_sq(p, centers.last().unwrap());
            if d < d2[i] {
                d2[i] = d;
            }
        }
    }
    centers
}

/// Cluster `points` into `k` groups. Errors when there are fewer points than
/// clusters. Converges when the total center movement drops below
/// [`CONVERGENCE_TOL`] or after [`MAX_ITERS`] sweeps.
pub fn kmeans(points: &[Vec<f64>], k: usize, rng: &mut StreamRng) -> Result<KMeansFit> {
    if k < 2 {
        return Err(Error::Param(format!("k must be >= 2, got {k}")));
    }
    if points.len() < k {
        return Err(Error::Usage(format!(
            "cannot form {k} clusters from {} points",
            points.len()
        )));
    }
    let dim = points[0].len();
    if points.iter().any(|p| p.len() != dim) {
        return Err(Error::Usage("points must share one dimension".into()));
    }

    let mut centers = seed_plus_plus(points, k, rng);
    let mut assignments = vec![0usize; points.len()];
    let mut iterations = 0;
    for _ in 0..MAX_ITERS {
        iterations += 1;
        for (i, p) in points.iter().enumerate() {
            assignments[i] = nearest(p, &centers).0;
        }
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (i, p) in points.iter().enumerate() {
            let c = assignments[i];
            counts[c] += 1;
            for (s, x) in sums[c].iter_mut().zip(p) {
                *s += x;
            }
        }
        let mut movement = 0.0;
        for c in 0..k {
            if counts[c] == 0 {
                continue; // empty cluster keeps its center
            }
            let new_center: Vec<f64> = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            movement += dist_sq(&new_center, &centers[c]).sqrt();
            centers[c] = new_center;
        }
        if movement < CONVERGENCE_TOL {
            break;
        }
    }
    // Final assignment against the converged centers.
    for (i, p) in points.iter().enumerate() {
        assignments[i] = nearest(p, &centers).0;
    }
    Ok(KMeansFit {
        assignments,
        centers,
        iterations,
    })
}
