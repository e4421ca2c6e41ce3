//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use bifi_core::bifidelity::SnapshotSet;
use bifi_core::fields::ParamVector;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// `k` snapshots of length `n`, either dense uniform or of rank `rank`.
pub fn random_set(rng: &mut ChaCha8Rng, k: usize, n: usize, rank: Option<usize>) -> SnapshotSet {
    let vectors: Vec<Vec<f64>> = match rank {
        None => (0..k)
            .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect(),
        Some(r) => {
            let basis: Vec<Vec<f64>> = (0..r)
                .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
                .collect();
            (0..k)
                .map(|_| {
                    let c: Vec<f64> = (0..r).map(|_| rng.random_range(-1.0..1.0)).collect();
                    (0..n)
                        .map(|i| (0..r).map(|m| c[m] * basis[m][i]).sum())
                        .collect()
                })
                .collect()
        }
    };
    let params = vec![ParamVector::zeros(1); k];
    SnapshotSet::new(vectors, params, 1.0 / n as f64).unwrap()
}

pub fn matrix(vectors: &[Vec<f64>]) -> DMatrix<f64> {
    DMatrix::from_fn(vectors[0].len(), vectors.len(), |i, j| vectors[j][i])
}

/// Least-squares coefficients of `u` in the columns of `b`, via SVD.
pub fn lstsq(b: &DMatrix<f64>, u: &[f64]) -> DVector<f64> {
    b.clone()
        .svd(true, true)
        .solve(&DVector::from_column_slice(u), 1e-14)
        .unwrap()
}

/// Greedy farthest-point oracle with explicit least-squares residuals.
/// Also returns, per step, the relative gap between the best and the
/// runner-up distance, used to filter near-ties.
pub fn brute_force_greedy(set: &SnapshotSet, steps: usize) -> (Vec<usize>, Vec<f64>) {
    let full = matrix(set.vectors());
    let mut chosen: Vec<usize> = Vec::new();
    let mut gaps = Vec::new();
    for _ in 0..steps {
        let mut d: Vec<(f64, usize)> = (0..set.len())
            .filter(|i| !chosen.contains(i))
            .map(|i| {
                let u = &set.vectors()[i];
                let r = if chosen.is_empty() {
                    DVector::from_column_slice(u)
                } else {
                    let b = full.select_columns(&chosen);
                    DVector::from_column_slice(u) - &b * lstsq(&b, u)
                };
                (set.ip_weight() * r.norm_squared(), i)
            })
            .collect();
        d.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
        let gap = match d.get(1) {
            Some(second) => (d[0].0 - second.0) / d[0].0.max(f64::MIN_POSITIVE),
            None => 1.0,
        };
        gaps.push(gap);
        chosen.push(d[0].1);
    }
    (chosen, gaps)
}

/// `||a - b|| / ||b||` in the discrete L2 norm.
pub fn rel_l2(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}
