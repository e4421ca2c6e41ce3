//! Quick known-answer checks run by `bifi selftest`.

use crate::bifidelity::{select_points, BiFiSurrogate, SnapshotSet, DEFAULT_PIVOT_TOL};
use crate::config::{parse_config, Overrides};
use crate::experiments::{l2_metrics, moments, TestPreset};
use crate::fields::{
    hf_initial_state, sample_point, BoundarySpec, EpsilonField, InitialData, ParamVector,
    ScatteringField,
};
use crate::quadrature::{clenshaw_curtis_1d, gauss_legendre_unit, smolyak_grid};
use crate::solvers::{compute_rbar, hf_evolve, lf_evolve, SolverConfig, SpatialGrid};

type Check = fn() -> Result<(), String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn close(a: f64, b: f64, tol: f64, what: &str) -> Result<(), String> {
    ensure((a - b).abs() <= tol, || format!("{what}: {a} vs {b}"))
}

fn gauss_legendre_moments() -> Result<(), String> {
    let q = gauss_legendre_unit(8).map_err(|e| e.to_string())?;
    close(q.weights().iter().sum(), 1.0, 1e-14, "weight sum")?;
    // Mean of v^14 over (0,1), exact for 8 nodes.
    let m: f64 = q
        .nodes()
        .iter()
        .zip(q.weights())
        .map(|(v, w)| w * v.powi(14))
        .sum();
    close(m, 1.0 / 15.0, 1e-14, "v^14 moment")
}

fn clenshaw_curtis_sizes() -> Result<(), String> {
    for (level, n) in [(0, 1), (1, 3), (2, 5), (3, 9), (4, 17)] {
        let (x, w) = clenshaw_curtis_1d(level);
        ensure(x.len() == n, || format!("level {level}: {} nodes", x.len()))?;
        close(w.iter().sum(), 2.0, 1e-13, "weight sum")?;
    }
    Ok(())
}

fn smolyak_counts() -> Result<(), String> {
    let g = smolyak_grid(5, 5).map_err(|e| e.to_string())?;
    ensure(g.len() == 2433, || format!("{} nodes", g.len()))?;
    let m = g.integrate(|z| z[0] * z[0] * z[3] * z[3]);
    // Weights carry the Lebesgue measure of [-1,1]^5.
    close(m, 32.0 / 9.0, 1e-12, "z1^2 z4^2")
}

fn periodic_config(eps: f64) -> Result<SolverConfig, String> {
    Ok(SolverConfig {
        grid: SpatialGrid::new(32, BoundarySpec::Periodic).map_err(|e| e.to_string())?,
        dt: 1e-3,
        final_time: 0.05,
        epsilon: EpsilonField::Constant { value: eps },
        sigma: ScatteringField::fourier_cosine(1.0, 4.0, 5).map_err(|e| e.to_string())?,
        velocity: gauss_legendre_unit(8).map_err(|e| e.to_string())?,
        lf_sigma_scale: 3.0,
    })
}

fn periodic_mass() -> Result<(), String> {
    let z = sample_point(5, 7, 0);
    let init = InitialData::GaussianPulse {
        center: 0.5,
        xi: 0.01,
    };
    for eps in [1e-8, 1e-2, 1.0] {
        let cfg = periodic_config(eps)?;
        let s0 = hf_initial_state(&init, &cfg.epsilon, &cfg.grid, &cfg.velocity, &z);
        let m0: f64 = compute_rbar(&s0, &cfg.velocity)
            .map_err(|e| e.to_string())?
            .iter()
            .sum();
        let (s, _) = hf_evolve(&cfg, &z, &init).map_err(|e| e.to_string())?;
        let m1: f64 = compute_rbar(&s, &cfg.velocity)
            .map_err(|e| e.to_string())?
            .iter()
            .sum();
        close(m1 * cfg.grid.dx(), m0 * cfg.grid.dx(), 1e-12, "hf mass")?;
        let (l, _) = lf_evolve(&cfg, &z, &init).map_err(|e| e.to_string())?;
        let ml: f64 = l.rho.iter().sum();
        close(ml * cfg.grid.dx(), m0 * cfg.grid.dx(), 1e-12, "lf mass")?;
    }
    Ok(())
}

fn constant_equilibrium() -> Result<(), String> {
    let mut cfg = periodic_config(1e-2)?;
    cfg.final_time = cfg.dt;
    let init = InitialData::RiemannStep {
        left_base: 2.0,
        left_z1: 0.0,
        interface: 1.0,
    };
    let z = ParamVector::zeros(5);
    let (s, _) = hf_evolve(&cfg, &z, &init).map_err(|e| e.to_string())?;
    ensure(s.r.iter().all(|r| (r - 2.0).abs() <= 1e-14), || {
        "r drifted".into()
    })?;
    ensure(s.j.iter().all(|j| j.abs() <= 1e-14), || "j drifted".into())
}

fn l2_metric_constant_shift() -> Result<(), String> {
    let a = vec![0.5; 20];
    let b = vec![0.2; 20];
    let (e, _) = l2_metrics(&a, &a, &b, &a, 0.05).map_err(|e| e.to_string())?;
    close(e, 0.3, 1e-14, "shift")
}

fn uniform_moments() -> Result<(), String> {
    let g = smolyak_grid(5, 3).map_err(|e| e.to_string())?;
    let p: Vec<Vec<f64>> = g.nodes().iter().map(|z| vec![z[0]]).collect();
    let (m, s) = moments(&p, g.weights()).map_err(|e| e.to_string())?;
    close(m[0], 0.0, 1e-10, "mean")?;
    close(s[0] * s[0], 1.0 / 3.0, 1e-10, "variance")
}

fn toy_set() -> SnapshotSet {
    let params: Vec<ParamVector> = (0..6).map(|i| sample_point(2, 3, i)).collect();
    let vectors = params
        .iter()
        .map(|z| {
            let (a, b) = (z.as_slice()[0], z.as_slice()[1]);
            vec![1.0, a, b, a * b, a * a]
        })
        .collect();
    SnapshotSet::new(vectors, params, 1.0).expect("toy set")
}

fn selection_first_pivot_is_largest_norm() -> Result<(), String> {
    let set = toy_set();
    let sel = select_points(&set, 4, DEFAULT_PIVOT_TOL).map_err(|e| e.to_string())?;
    let best = (0..set.len())
        .max_by(|&a, &b| {
            let (na, nb) = (set.norm(&set.vectors()[a]), set.norm(&set.vectors()[b]));
            na.partial_cmp(&nb).unwrap().then(b.cmp(&a))
        })
        .unwrap();
    ensure(sel.indices[0] == best, || {
        format!("{:?} vs {best}", sel.indices)
    })?;
    ensure(sel.pivots.windows(2).all(|w| w[1] <= w[0]), || {
        "pivots increase".into()
    })
}

fn reconstruction_interpolates() -> Result<(), String> {
    let set = toy_set();
    let sel = select_points(&set, 3, DEFAULT_PIVOT_TOL).map_err(|e| e.to_string())?;
    let lf = set.subset(&sel.indices).map_err(|e| e.to_string())?;
    let hf_vectors: Vec<Vec<f64>> = lf
        .vectors()
        .iter()
        .map(|v| v.iter().map(|x| 2.0 * x + 1.0).collect())
        .collect();
    let hf = SnapshotSet::new(hf_vectors.clone(), lf.params().to_vec(), 1.0)
        .map_err(|e| e.to_string())?;
    let sur = BiFiSurrogate::build(lf.clone(), hf).map_err(|e| e.to_string())?;
    for (u, h) in lf.vectors().iter().zip(&hf_vectors) {
        let r = sur.reconstruct_from_lf(u).map_err(|e| e.to_string())?;
        for (a, b) in r.iter().zip(h) {
            close(*a, *b, 1e-10, "reconstruction")?;
        }
    }
    Ok(())
}

fn presets_validate() -> Result<(), String> {
    for id in 1..=5 {
        TestPreset::by_id(id)
            .and_then(|p| p.validate())
            .map_err(|e| format!("preset {id}: {e}"))?;
    }
    Ok(())
}

fn config_rejects_negative_n() -> Result<(), String> {
    match parse_config("n = -1\n", &Overrides::default()) {
        Err(e) if e.to_string().contains("`n`") => Ok(()),
        other => Err(format!("unexpected {other:?}")),
    }
}

const CHECKS: &[(&str, Check)] = &[
    ("gauss-legendre moments", gauss_legendre_moments),
    ("clenshaw-curtis sizes", clenshaw_curtis_sizes),
    ("smolyak d=5 level 5", smolyak_counts),
    ("periodic mass conservation", periodic_mass),
    ("constant equilibrium", constant_equilibrium),
    ("l2 metric of a constant shift", l2_metric_constant_shift),
    ("uniform moments", uniform_moments),
    ("greedy first pivot", selection_first_pivot_is_largest_norm),
    (
        "reconstruction at selected points",
        reconstruction_interpolates,
    ),
    ("presets validate", presets_validate),
    ("config range check", config_rejects_negative_n),
];

#[derive(Debug, Clone, PartialEq)]
pub struct SelftestOutcome {
    pub name: &'static str,
    pub error: Option<String>,
}

/// Runs every check in order.
pub fn run() -> Vec<SelftestOutcome> {
    CHECKS
        .iter()
        .map(|(name, f)| SelftestOutcome {
            name,
            error: f().err(),
        })
        .collect()
}
