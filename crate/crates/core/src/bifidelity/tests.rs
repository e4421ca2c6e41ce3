use super::*;
use crate::error::{Error, Result};
use crate::fields::ParamVector;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_set(rng: &mut ChaCha8Rng, k: usize, n: usize, dx: f64) -> SnapshotSet {
    let vectors = (0..k)
        .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    let params = (0..k).map(|_| ParamVector::zeros(1)).collect();
    SnapshotSet::new(vectors, params, dx).unwrap()
}

fn matrix(set: &SnapshotSet) -> DMatrix<f64> {
    DMatrix::from_fn(set.dim(), set.len(), |i, j| set.vectors()[j][i])
}

/// Least-squares coefficients of `u` in the columns of `b`, via SVD.
fn lstsq(b: &DMatrix<f64>, u: &[f64]) -> DVector<f64> {
    b.clone()
        .svd(true, true)
        .solve(&DVector::from_column_slice(u), 1e-14)
        .unwrap()
}

/// Greedy oracle: explicit residual norms by least squares at every step.
fn brute_force_greedy(set: &SnapshotSet, n_max: usize) -> Vec<usize> {
    let full = matrix(set);
    let mut chosen: Vec<usize> = Vec::new();
    for _ in 0..n_max {
        let mut best = None;
        let mut best_d = -1.0;
        for i in 0..set.len() {
            if chosen.contains(&i) {
                continue;
            }
            let u = &set.vectors()[i];
            let d = if chosen.is_empty() {
                set.norm(u)
            } else {
                let b = full.select_columns(&chosen);
                let c = lstsq(&b, u);
                let r = DVector::from_column_slice(u) - &b * c;
                (set.ip_weight() * r.norm_squared()).sqrt()
            };
            if d > best_d {
                best_d = d;
                best = Some(i);
            }
        }
        chosen.push(best.unwrap());
    }
    chosen
}

#[test]
fn gramian_cases() {
    // Columns orthonormal under dx = 0.5.
    let s = 2f64.sqrt();
    let set = SnapshotSet::new(
        vec![vec![s, 0.0], vec![0.0, s]],
        vec![ParamVector::zeros(1); 2],
        0.5,
    )
    .unwrap();
    let g = gramian(&set);
    for (a, b) in g.iter().zip([1.0, 0.0, 0.0, 1.0]) {
        assert!((a - b).abs() < 1e-12);
    }
    let one = SnapshotSet::new(vec![vec![3.0, 4.0]], vec![ParamVector::zeros(1)], 0.1).unwrap();
    assert!((gramian(&one)[0] - 2.5).abs() < 1e-14);

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let set = random_set(&mut rng, 8, 15, 0.04);
    let m = matrix(&set);
    let oracle = m.transpose() * &m * 0.04;
    let g = gramian(&set);
    for i in 0..8 {
        for j in 0..8 {
            assert!((g[i * 8 + j] - oracle[(i, j)]).abs() < 1e-13);
            assert_eq!(g[i * 8 + j], g[j * 8 + i]);
        }
    }
}

#[test]
fn largest_norm_first() {
    let set = SnapshotSet::new(
        vec![vec![1.0, 0.0], vec![0.0, 3.0], vec![1.0, 1.0]],
        vec![ParamVector::zeros(1); 3],
        1.0,
    )
    .unwrap();
    let sel = select_points(&set, 1, 1e-12).unwrap();
    assert_eq!(sel.indices, vec![1]);
    assert_eq!(sel.pivots, vec![9.0]);
}

#[test]
fn full_selection_of_independent_columns() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let set = random_set(&mut rng, 6, 10, 0.1);
    let sel = select_points(&set, 6, 1e-12).unwrap();
    let mut sorted = sel.indices.clone();
    sorted.sort();
    assert_eq!(sorted, (0..6).collect::<Vec<_>>());
    assert!(!sel.stopped_on_tolerance);
}

#[test]
fn matches_brute_force_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let set = random_set(&mut rng, 12, 10, 0.1);
    let sel = select_points(&set, 10, 0.0).unwrap();
    assert_eq!(sel.indices, brute_force_greedy(&set, 10));
    assert!(sel.pivots.windows(2).all(|p| p[1] <= p[0]));
}

#[test]
fn chol_factor_reproduces_selected_gramian() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let set = random_set(&mut rng, 9, 7, 0.2);
    let sel = select_points(&set, 5, 1e-12).unwrap();
    let n = sel.indices.len();
    let g = gramian(&set.subset(&sel.indices).unwrap());
    for a in 0..n {
        for b in 0..n {
            let llt: f64 = (0..n)
                .map(|k| sel.chol[a * n + k] * sel.chol[b * n + k])
                .sum();
            assert!((llt - g[a * n + b]).abs() < 1e-12);
        }
    }
}

#[test]
fn rank_deficiency_stops_selection() {
    let set = SnapshotSet::new(
        vec![
            vec![1.0, 0.0, 0.0],
            vec![2.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
        ],
        vec![ParamVector::zeros(1); 3],
        1.0,
    )
    .unwrap();
    let sel = select_points(&set, 3, 1e-12).unwrap();
    assert_eq!(sel.indices, vec![1, 2]);
    assert!(sel.stopped_on_tolerance);
}

#[test]
fn all_zero_set_is_flagged() {
    let set = SnapshotSet::new(vec![vec![0.0; 4]; 3], vec![ParamVector::zeros(1); 3], 1.0).unwrap();
    let sel = select_points(&set, 2, 1e-12).unwrap();
    assert!(sel.all_zero);
    assert!(sel.indices.is_empty());
    assert!(select_points(&set, 4, 1e-12).is_err());
}

#[test]
fn ties_go_to_smallest_index() {
    let set = SnapshotSet::new(
        vec![vec![0.0, 1.0], vec![1.0, 0.0], vec![0.0, -1.0]],
        vec![ParamVector::zeros(1); 3],
        1.0,
    )
    .unwrap();
    assert_eq!(select_points(&set, 2, 1e-12).unwrap().indices, vec![0, 1]);
}

fn toy_surrogate(seed: u64, k: usize, n_l: usize, n_h: usize) -> (BiFiSurrogate, ChaCha8Rng) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lf = random_set(&mut rng, k, n_l, 1.0 / n_l as f64);
    let hf = random_set(&mut rng, k, n_h, 1.0 / n_h as f64);
    (BiFiSurrogate::build(lf, hf).unwrap(), rng)
}

#[test]
fn projecting_basis_member_gives_unit_vector() {
    let (s, _) = toy_surrogate(5, 4, 12, 20);
    for k in 0..4 {
        let c = s.project_coeffs(&s.lf_basis().vectors()[k]).unwrap();
        for (i, ci) in c.iter().enumerate() {
            let e = if i == k { 1.0 } else { 0.0 };
            assert!((ci - e).abs() < 1e-8);
        }
        let u = s.reconstruct_from_lf(&s.lf_basis().vectors()[k]).unwrap();
        let h = &s.hf_snapshots().vectors()[k];
        let err: f64 = u
            .iter()
            .zip(h)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        let nrm: f64 = h.iter().map(|b| b * b).sum::<f64>().sqrt();
        assert!(err / nrm < 1e-8);
    }
}

#[test]
fn orthonormal_basis_coefficients_are_inner_products() {
    let s = 2f64.sqrt();
    let lf = SnapshotSet::new(
        vec![vec![s, 0.0, 0.0], vec![0.0, s, 0.0]],
        vec![ParamVector::zeros(1); 2],
        0.5,
    )
    .unwrap();
    let sur = BiFiSurrogate::build(lf.clone(), lf.clone()).unwrap();
    let u = [0.3, -1.2, 4.0];
    let c = sur.project_coeffs(&u).unwrap();
    assert!((c[0] - lf.inner(&u, &lf.vectors()[0])).abs() < 1e-14);
    assert!((c[1] - lf.inner(&u, &lf.vectors()[1])).abs() < 1e-14);
}

#[test]
fn projection_matches_least_squares() {
    let (s, mut rng) = toy_surrogate(6, 6, 30, 30);
    let u: Vec<f64> = (0..30).map(|_| rng.random_range(-1.0..1.0)).collect();
    let c = s.project_coeffs(&u).unwrap();
    let oracle = lstsq(&matrix(s.lf_basis()), &u);
    let rel = (DVector::from_vec(c.clone()) - &oracle).norm() / oracle.norm();
    assert!(rel < 1e-10, "{rel}");
    // Residual orthogonal to the basis.
    let mut resid = u.clone();
    for (ck, b) in c.iter().zip(s.lf_basis().vectors()) {
        for (r, v) in resid.iter_mut().zip(b) {
            *r -= ck * v;
        }
    }
    let unorm = s.lf_basis().norm(&u);
    for b in s.lf_basis().vectors() {
        assert!(s.lf_basis().inner(&resid, b).abs() < 1e-8 * unorm);
    }
}

#[test]
fn mean_is_weighted_sum_of_reconstructions() {
    let (s, _) = toy_surrogate(7, 5, 10, 16);
    // A linear toy low-fidelity model u(z) = sum_i z_i b_i + b_0.
    let lf = |z: &ParamVector| -> Result<Vec<f64>> {
        Ok((0..10)
            .map(|i| {
                let x = i as f64 / 10.0;
                1.0 + z.as_slice()[0] * x + z.as_slice()[1] * x * x
            })
            .collect())
    };
    let nodes = crate::fields::sample_candidates(2, 20, 9).unwrap();
    let weights: Vec<f64> = (0..20).map(|i| 1.0 + i as f64).collect();
    let total: f64 = weights.iter().sum();
    let mean = s.bifi_mean(&nodes, &weights, &lf).unwrap();
    let mut oracle = vec![0.0; 16];
    for (z, w) in nodes.iter().zip(&weights) {
        let u = s.bifi_reconstruct(z, &lf).unwrap();
        for (o, v) in oracle.iter_mut().zip(u) {
            *o += w / total * v;
        }
    }
    let num: f64 = mean.iter().zip(&oracle).map(|(a, b)| (a - b).powi(2)).sum();
    let den: f64 = oracle.iter().map(|b| b * b).sum();
    assert!((num / den).sqrt() < 1e-10);

    let single = s.bifi_mean(&nodes[..1], &[1.0], &lf).unwrap();
    let direct = s.bifi_reconstruct(&nodes[0], &lf).unwrap();
    for (a, b) in single.iter().zip(&direct) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn full_span_reconstruction_is_projection() {
    // Same model in both slots, all five candidates: u^B is the projection of u^H.
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let set = random_set(&mut rng, 5, 9, 1.0 / 9.0);
    let sel = select_points(&set, 5, 0.0).unwrap();
    let basis = set.subset(&sel.indices).unwrap();
    let s = BiFiSurrogate::build(basis.clone(), basis.clone()).unwrap();
    let u: Vec<f64> = (0..9).map(|_| rng.random_range(-1.0..1.0)).collect();
    let ub = s.reconstruct_from_lf(&u).unwrap();
    let b = matrix(&basis);
    let proj = &b * lstsq(&b, &u);
    for (a, p) in ub.iter().zip(proj.iter()) {
        assert!((a - p).abs() < 1e-10);
    }
}

#[test]
fn similarity_ratio_cases() {
    let r = similarity_rs(0.3, 0.3, 2.0, 2.0).unwrap();
    assert_eq!(r.value, 1.0);
    assert!(!r.degenerate);
    assert_eq!(similarity_rs(0.3, 0.0, 2.0, 1.0).unwrap().value, 0.0);
    let inf = similarity_rs(0.0, 0.1, 1.0, 1.0).unwrap();
    assert!(inf.value.is_infinite() && inf.degenerate);
    assert!(matches!(
        similarity_rs(0.1, 0.1, 0.0, 1.0),
        Err(Error::DegenerateSample(_))
    ));
}

#[test]
fn inplane_ratio_is_zero_for_identical_models() {
    let (s, mut rng) = toy_surrogate(10, 3, 8, 8);
    let lf_as_hf = BiFiSurrogate::build(s.lf_basis().clone(), s.lf_basis().clone()).unwrap();
    let next: Vec<f64> = (0..8).map(|_| rng.random_range(-1.0..1.0)).collect();
    let r = inplane_re(&lf_as_hf, &next, &next).unwrap();
    assert!(r.value.abs() < 1e-12);
}

#[test]
fn inplane_ratio_matches_dense_oracle() {
    let lf = SnapshotSet::new(
        vec![
            vec![1.0, 0.0, 0.5, 0.0],
            vec![0.2, 1.0, 0.0, 0.3],
            vec![0.0, 0.4, 1.0, 1.0],
        ],
        vec![ParamVector::zeros(1); 3],
        0.25,
    )
    .unwrap();
    let hf = SnapshotSet::new(
        vec![
            vec![1.0, 0.1, 0.5, 0.0, 0.2],
            vec![0.3, 1.0, 0.0, 0.3, 0.1],
            vec![0.0, 0.5, 1.1, 0.9, -0.2],
        ],
        vec![ParamVector::zeros(1); 3],
        0.2,
    )
    .unwrap();
    let s = BiFiSurrogate::build(lf.clone(), hf.clone()).unwrap();
    let hf_next = [0.4, -0.3, 0.8, 0.2, 1.0];
    let lf_next = [0.5, 0.1, -0.6, 0.9];
    let r = inplane_re(&s, &hf_next, &lf_next).unwrap();

    let bh = matrix(&hf);
    let bl = matrix(&lf);
    let ch = lstsq(&bh, &hf_next);
    let cl = lstsq(&bl, &lf_next);
    let num = (0.2f64).sqrt() * (&bh * (&ch - &cl)).norm();
    let den = (0.2f64).sqrt() * (DVector::from_column_slice(&hf_next) - &bh * &ch).norm();
    assert!((r.value - num / den).abs() < 1e-10 * (num / den));
}

#[test]
fn bound_limits() {
    let c = BoundConstants::default();
    assert_eq!(error_bound(0.0, 5.0, c), 0.0);
    assert_eq!(error_bound(0.02, 0.0, c), 0.02);
    assert!((error_bound(0.02, 3.0, c) - 0.08).abs() < 1e-15);
    let (s, _) = toy_surrogate(11, 3, 6, 6);
    let d = lf_relative_distance(&s, &s.lf_basis().vectors()[1]).unwrap();
    assert!(d < 1e-7);
    assert!(lf_relative_distance(&s, &[0.0; 6]).is_err());
}

#[test]
fn diagnostics_coverage() {
    let row = |k, t, b, re| DiagnosticRow {
        k,
        true_err_mean: t,
        bound: b,
        rs_median: 1.0,
        rs_min: 1.0,
        rs_max: 1.0,
        re,
    };
    let d = ErrorDiagnostics {
        rows: vec![
            row(1, 0.1, 0.2, 0.1),
            row(2, 0.1, 0.05, 0.2),
            row(3, 0.1, 0.01, 5.0),
        ],
    };
    assert_eq!(d.blow_up(1.0), Some(3));
    assert_eq!(d.coverage(1.0), (0.5, 2));
    assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
    assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
}

#[test]
fn surrogate_rejects_dependent_basis() {
    let lf = SnapshotSet::new(vec![vec![0.0; 3]; 2], vec![ParamVector::zeros(1); 2], 1.0).unwrap();
    assert!(matches!(
        BiFiSurrogate::build(lf.clone(), lf),
        Err(Error::SurrogateConstruction(_))
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn pivots_non_increasing(seed in 0u64..10_000, k in 2usize..20, n in 2usize..30) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let set = random_set(&mut rng, k, n, 0.1);
        let sel = select_points(&set, k, 1e-12).unwrap();
        prop_assert!(sel.pivots.windows(2).all(|p| p[1] <= p[0]));
        let mut seen = sel.indices.clone();
        seen.sort();
        seen.dedup();
        prop_assert_eq!(seen.len(), sel.indices.len());
    }

    #[test]
    fn lf_scaling_equivariance(seed in 0u64..10_000, alpha in 0.01f64..100.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lf = random_set(&mut rng, 8, 12, 1.0 / 12.0);
        let hf = random_set(&mut rng, 8, 15, 1.0 / 15.0);
        let scaled = SnapshotSet::new(
            lf.vectors().iter().map(|v| v.iter().map(|x| alpha * x).collect()).collect(),
            lf.params().to_vec(),
            lf.ip_weight(),
        ).unwrap();
        let a = select_points(&lf, 4, 1e-12).unwrap();
        let b = select_points(&scaled, 4, 1e-12).unwrap();
        prop_assert_eq!(&a.indices, &b.indices);
        let sa = BiFiSurrogate::build(lf.subset(&a.indices).unwrap(), hf.subset(&a.indices).unwrap()).unwrap();
        let sb = BiFiSurrogate::build(scaled.subset(&b.indices).unwrap(), hf.subset(&b.indices).unwrap()).unwrap();
        let q: Vec<f64> = (0..12).map(|_| rng.random_range(-1.0..1.0)).collect();
        let qs: Vec<f64> = q.iter().map(|x| alpha * x).collect();
        let ca = sa.project_coeffs(&q).unwrap();
        let cb = sb.project_coeffs(&qs).unwrap();
        for (x, y) in ca.iter().zip(&cb) {
            prop_assert!((x - y).abs() <= 1e-10 * (1.0 + x.abs()));
        }
        let hn: Vec<f64> = (0..15).map(|_| rng.random_range(-1.0..1.0)).collect();
        let ra = inplane_re(&sa, &hn, &q).unwrap().value;
        let rb = inplane_re(&sb, &hn, &qs).unwrap().value;
        prop_assert!((ra - rb).abs() <= 1e-10 * (1.0 + ra));
    }

    #[test]
    fn projection_idempotent(seed in 0u64..10_000) {
        let (s, mut rng) = toy_surrogate(seed, 5, 10, 10);
        let u: Vec<f64> = (0..10).map(|_| rng.random_range(-1.0..1.0)).collect();
        let c = s.project_coeffs(&u).unwrap();
        let mut pu = vec![0.0; 10];
        for (ck, b) in c.iter().zip(s.lf_basis().vectors()) {
            for (p, v) in pu.iter_mut().zip(b) {
                *p += ck * v;
            }
        }
        let c2 = s.project_coeffs(&pu).unwrap();
        for (x, y) in c.iter().zip(&c2) {
            prop_assert!((x - y).abs() < 1e-12 * (1.0 + x.abs()));
        }
    }
}
