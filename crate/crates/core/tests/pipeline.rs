mod common;

use bifi_core::experiments::{
    convergence_sweep, l2_metrics, moments, reference_statistics, run_test, solve_samples,
    Experiment, TestPreset,
};
use bifi_core::fields::ParamVector;
use bifi_core::quadrature::smolyak_grid;
use bifi_core::solvers::{diffusion_solve, lf_solve, DiffusionKind};
use bifi_core::Phase;

use common::rel_l2;

#[test]
fn test1_reference_matches_diffusion_statistics() {
    let p = TestPreset::test1(1e-8);
    let grid = smolyak_grid(5, 5).unwrap();
    let (mean, std) = reference_statistics(&p, &grid).unwrap();

    let cfg = p.hf_config().unwrap();
    let nodes: Vec<ParamVector> = grid
        .nodes()
        .iter()
        .map(|z| ParamVector::new(z.clone()).unwrap())
        .collect();
    let oracle = solve_samples(&nodes, Phase::Reference, |z| {
        diffusion_solve(&cfg, z, &p.initial, DiffusionKind::LteThird)
    })
    .unwrap();
    let (om, os) = moments(&oracle, grid.weights()).unwrap();
    assert!(rel_l2(&mean, &om) <= 1e-2, "{}", rel_l2(&mean, &om));
    assert!(rel_l2(&std, &os) <= 1e-2, "{}", rel_l2(&std, &os));
}

#[test]
fn reference_is_order_independent() {
    let p = TestPreset::test2();
    let grid = smolyak_grid(5, 2).unwrap();
    let cfg = p.hf_config().unwrap();
    let nodes: Vec<ParamVector> = grid
        .nodes()
        .iter()
        .map(|z| ParamVector::new(z.clone()).unwrap())
        .collect();
    let profiles = solve_samples(&nodes, Phase::Reference, |z| {
        bifi_core::solvers::hf_solve(&cfg, z, &p.initial)
    })
    .unwrap();
    let (m0, s0) = moments(&profiles, grid.weights()).unwrap();

    // Reversed order agrees to round-off; the canonical order restores bits.
    let rev_p: Vec<Vec<f64>> = profiles.iter().rev().cloned().collect();
    let rev_w: Vec<f64> = grid.weights().iter().rev().copied().collect();
    let (m1, s1) = moments(&rev_p, &rev_w).unwrap();
    assert!(rel_l2(&m1, &m0) < 1e-13 && rel_l2(&s1, &s0) < 1e-10);
    let (m2, s2) = reference_statistics(&p, &grid).unwrap();
    assert_eq!((m2, s2), (m0, s0));
}

#[test]
fn zero_runs_report_lf_baseline() {
    let mut p = TestPreset::test1(1e-8);
    p.n = 0;
    let base = run_test(&p).unwrap();
    assert_eq!(base.n_effective, 0);
    assert!(base.convergence.is_empty());
    let full = run_test(&TestPreset::test1(1e-8)).unwrap();
    assert_eq!((base.e_mean, base.e_std), (full.lf_e_mean, full.lf_e_std));
    assert!(base.e_mean >= 10.0 * full.e_mean);
    assert!(base.e_std >= 10.0 * full.e_std);

    let kinetic = run_test(&TestPreset::test1(1e-2)).unwrap();
    assert!(kinetic.lf_e_mean > 1e-3, "{}", kinetic.lf_e_mean);
}

#[test]
fn errors_beat_lf_baseline_on_every_preset() {
    for id in 1..=5 {
        let rep = run_test(&TestPreset::by_id(id).unwrap()).unwrap();
        assert!(rep.e_mean < rep.lf_e_mean, "preset {id}");
        assert!(rep.e_std < rep.lf_e_std, "preset {id}");
        assert!([rep.e_mean, rep.e_std]
            .iter()
            .all(|e| e.is_finite() && *e >= 0.0));
        for r in &rep.convergence {
            assert!(r.e_mean.is_finite() && r.e_mean >= 0.0 && r.e_std >= 0.0);
        }
    }
}

#[test]
fn one_candidate_sweep_is_single_projection() {
    let mut p = TestPreset::test2();
    p.candidates = 1;
    p.n = 1;
    p.validation = 5;
    p.sparse_level = 2;
    let rep = convergence_sweep(&p, &[1]).unwrap();
    assert_eq!(rep.convergence.len(), 1);

    // Mean by hand: project the low-fidelity mean onto the single snapshot.
    let exp = Experiment::prepare(&p, 1).unwrap();
    let lf_cfg = p.lf_config().unwrap();
    let dxl = lf_cfg.grid.dx();
    let ul = &exp.candidates.vectors()[0];
    let uh = &exp.hf_selected[0];
    let grid = smolyak_grid(5, 2).unwrap();
    let lf_nodes: Vec<Vec<f64>> = grid
        .nodes()
        .iter()
        .map(|z| lf_solve(&lf_cfg, &ParamVector::new(z.clone()).unwrap(), &p.initial).unwrap())
        .collect();
    let (lf_mean, _) = moments(&lf_nodes, grid.weights()).unwrap();
    let dot = |a: &[f64], b: &[f64]| dxl * a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let c = dot(&lf_mean, ul) / dot(ul, ul);
    let mean: Vec<f64> = uh.iter().map(|h| c * h).collect();
    let dx = p.hf_config().unwrap().grid.dx();
    let (e_mean, _) = l2_metrics(&mean, &rep.std_bf, &rep.mean_ref, &rep.std_ref, dx).unwrap();
    assert!((e_mean - rep.convergence[0].e_mean).abs() <= 1e-12 * (1.0 + e_mean));
    assert!(rel_l2(&mean, &rep.mean_bf) < 1e-12);
}

#[test]
fn sweep_errors_shrink_and_pivots_decrease() {
    let rep = convergence_sweep(&TestPreset::test4(), &[2, 4, 6, 8, 10, 12]).unwrap();
    assert_eq!(rep.convergence.len(), 6);
    assert!(rep.pivots.windows(2).all(|w| w[1] <= w[0]));
    let e: Vec<f64> = rep.convergence.iter().map(|r| r.e_mean).collect();
    assert!(e[5] <= e[0] / 10.0, "{e:?}");
}
