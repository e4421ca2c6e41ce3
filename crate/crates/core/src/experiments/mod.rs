//! Test presets, sparse-grid reference statistics and the end-to-end
//! bi-fidelity pipeline.

mod presets;
mod report;

pub use presets::{
    GridSpec, TestPreset, DEFAULT_CANDIDATES, DEFAULT_CANDIDATE_SEED, DEFAULT_LF_SIGMA_SCALE,
    DEFAULT_VALIDATION, DEFAULT_VALIDATION_SEED,
};
pub use report::{ConvergenceRow, ExperimentReport, PhaseTimings};

use std::time::Instant;

use rayon::prelude::*;

use crate::bifidelity::{
    error_bound, inplane_re, lf_relative_distance, median, select_points, similarity_rs,
    weighted_mean, BiFiSurrogate, DiagnosticRow, ErrorDiagnostics, SelectionResult, SnapshotSet,
};
use crate::error::{Error, Phase, Result};
use crate::fields::{sample_candidates, ParamVector};
use crate::quadrature::{smolyak_grid, SparseGrid};
use crate::solvers::{hf_solve, lf_solve, SolverConfig};

/// `(sqrt(dx sum (a - r)^2), ...)` for the mean and the standard deviation.
pub fn l2_metrics(
    approx_mean: &[f64],
    approx_std: &[f64],
    ref_mean: &[f64],
    ref_std: &[f64],
    dx: f64,
) -> Result<(f64, f64)> {
    let n = ref_mean.len();
    if approx_mean.len() != n || approx_std.len() != n || ref_std.len() != n {
        return Err(Error::InvalidArgument(format!(
            "profile lengths differ: {}, {}, {}, {}",
            approx_mean.len(),
            approx_std.len(),
            n,
            ref_std.len()
        )));
    }
    let e = |a: &[f64], b: &[f64]| {
        (dx * a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>()).sqrt()
    };
    Ok((e(approx_mean, ref_mean), e(approx_std, ref_std)))
}

/// Pointwise mean and standard deviation under the given weights, which are
/// normalized by their sum. Reduction runs in index order.
pub fn moments(profiles: &[Vec<f64>], weights: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let mean = weighted_mean(profiles, weights)?;
    // Centered second moment; sparse-grid weights may be negative, so clamp.
    let centered: Vec<Vec<f64>> = profiles
        .iter()
        .map(|p| {
            p.iter()
                .zip(&mean)
                .map(|(v, m)| (v - m) * (v - m))
                .collect()
        })
        .collect();
    let var = weighted_mean(&centered, weights)?;
    let std = var.iter().map(|v| v.max(0.0).sqrt()).collect();
    Ok((mean, std))
}

/// Solves every sample in parallel; errors carry the phase and the first
/// failing index, independent of scheduling.
pub fn solve_samples<F>(params: &[ParamVector], phase: Phase, solve: F) -> Result<Vec<Vec<f64>>>
where
    F: Fn(&ParamVector) -> Result<Vec<f64>> + Sync,
{
    let results: Vec<Result<Vec<f64>>> = params.par_iter().map(&solve).collect();
    results
        .into_iter()
        .enumerate()
        .map(|(i, r)| r.map_err(|e| e.at_sample(phase, i)))
        .collect()
}

fn sparse_nodes(grid: &SparseGrid) -> Result<Vec<ParamVector>> {
    grid.nodes()
        .iter()
        .map(|z| ParamVector::new(z.clone()))
        .collect()
}

/// High-fidelity mean and standard deviation over a sparse grid.
pub fn reference_statistics(
    preset: &TestPreset,
    grid: &SparseGrid,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if grid.dimension() != preset.dimension {
        return Err(Error::DimensionMismatch {
            expected: preset.dimension,
            got: grid.dimension(),
        });
    }
    let cfg = preset.hf_config()?;
    let nodes = sparse_nodes(grid)?;
    let profiles = solve_samples(&nodes, Phase::Reference, |z| {
        hf_solve(&cfg, z, &preset.initial)
    })?;
    moments(&profiles, grid.weights())
}

/// Linear interpolation between cell centers, constant beyond the end cells.
pub fn interpolate_profile(values: &[f64], target_cells: usize) -> Vec<f64> {
    let n = values.len();
    if n == target_cells {
        return values.to_vec();
    }
    (0..target_cells)
        .map(|i| {
            let x = (i as f64 + 0.5) / target_cells as f64;
            let s = x * n as f64 - 0.5;
            if s <= 0.0 {
                values[0]
            } else if s >= (n - 1) as f64 {
                values[n - 1]
            } else {
                let k = s.floor() as usize;
                let t = s - k as f64;
                (1.0 - t) * values[k] + t * values[k + 1]
            }
        })
        .collect()
}

/// Cached solves shared by every `n` of a sweep.
pub struct Experiment {
    pub preset: TestPreset,
    pub hf_cfg: SolverConfig,
    pub lf_cfg: SolverConfig,
    pub sparse: SparseGrid,
    pub ref_mean: Vec<f64>,
    pub ref_std: Vec<f64>,
    /// Low-fidelity profiles at the sparse nodes.
    pub lf_sparse: Vec<Vec<f64>>,
    pub candidates: SnapshotSet,
    pub selection: SelectionResult,
    /// High-fidelity profiles at the selected points, in selection order.
    pub hf_selected: Vec<Vec<f64>>,
    pub validation: Vec<ParamVector>,
    pub validation_hf: Vec<Vec<f64>>,
    pub validation_lf: Vec<Vec<f64>>,
    pub timings: PhaseTimings,
}

/// Statistics of the surrogate on `n` points.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub n: usize,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub e_mean: f64,
    pub e_std: f64,
}

impl Experiment {
    /// Runs every solve the pipeline needs. `capacity` is the largest
    /// surrogate size that will be evaluated; one extra point is selected
    /// for the in-plane ratio.
    pub fn prepare(preset: &TestPreset, capacity: usize) -> Result<Self> {
        preset.validate()?;
        let hf_cfg = preset.hf_config()?;
        let lf_cfg = preset.lf_config()?;
        let init = &preset.initial;
        let mut timings = PhaseTimings::default();

        let t = Instant::now();
        let sparse = smolyak_grid(preset.dimension, preset.sparse_level)?;
        let nodes = sparse_nodes(&sparse)?;
        let hf_sparse = solve_samples(&nodes, Phase::Reference, |z| hf_solve(&hf_cfg, z, init))?;
        let (ref_mean, ref_std) = moments(&hf_sparse, sparse.weights())?;
        drop(hf_sparse);
        timings.reference = t.elapsed().as_secs_f64();

        let t = Instant::now();
        let cands = sample_candidates(preset.dimension, preset.candidates, preset.candidate_seed)?;
        let lf_cands = solve_samples(&cands, Phase::CandidateSweep, |z| {
            lf_solve(&lf_cfg, z, init)
        })?;
        let candidates = SnapshotSet::new(lf_cands, cands, lf_cfg.grid.dx())?;
        timings.candidate_sweep = t.elapsed().as_secs_f64();

        let t = Instant::now();
        let n_max = (capacity + 1).min(preset.candidates).max(1);
        let selection = select_points(&candidates, n_max, preset.pivot_tol)
            .map_err(|e| e.in_phase(Phase::Selection))?;
        if selection.all_zero && capacity > 0 {
            return Err(Error::SurrogateConstruction(
                "every low-fidelity candidate is zero".into(),
            )
            .in_phase(Phase::Selection));
        }
        timings.selection = t.elapsed().as_secs_f64();

        let t = Instant::now();
        let gamma: Vec<ParamVector> = selection
            .indices
            .iter()
            .map(|&i| candidates.params()[i].clone())
            .collect();
        let hf_selected =
            solve_samples(&gamma, Phase::HighFidelity, |z| hf_solve(&hf_cfg, z, init))?;
        timings.high_fidelity = t.elapsed().as_secs_f64();

        let t = Instant::now();
        let lf_sparse = solve_samples(&nodes, Phase::Reconstruction, |z| {
            lf_solve(&lf_cfg, z, init)
        })?;
        timings.reconstruction = t.elapsed().as_secs_f64();

        let t = Instant::now();
        let validation = if preset.validation > 0 {
            sample_candidates(preset.dimension, preset.validation, preset.validation_seed)?
        } else {
            Vec::new()
        };
        let validation_hf = solve_samples(&validation, Phase::Validation, |z| {
            hf_solve(&hf_cfg, z, init)
        })?;
        let validation_lf = solve_samples(&validation, Phase::Validation, |z| {
            lf_solve(&lf_cfg, z, init)
        })?;
        timings.validation = t.elapsed().as_secs_f64();

        Ok(Self {
            preset: preset.clone(),
            hf_cfg,
            lf_cfg,
            sparse,
            ref_mean,
            ref_std,
            lf_sparse,
            candidates,
            selection,
            hf_selected,
            validation,
            validation_hf,
            validation_lf,
            timings,
        })
    }

    /// Number of points the selection produced, including the look-ahead one.
    pub fn selected(&self) -> usize {
        self.selection.indices.len()
    }

    /// Surrogate on the first `n` selected points.
    pub fn surrogate(&self, n: usize) -> Result<BiFiSurrogate> {
        if n == 0 || n > self.selected() {
            return Err(Error::InvalidArgument(format!(
                "surrogate size {n} outside 1..={}",
                self.selected()
            )));
        }
        let idx = &self.selection.indices[..n];
        let lf = self.candidates.subset(idx)?;
        let hf = SnapshotSet::new(
            self.hf_selected[..n].to_vec(),
            lf.params().to_vec(),
            self.hf_cfg.grid.dx(),
        )?;
        BiFiSurrogate::build(lf, hf).map_err(|e| e.in_phase(Phase::Reconstruction))
    }

    /// Low-fidelity sparse-grid statistics mapped to the high-fidelity grid.
    pub fn lf_baseline(&self) -> Result<Evaluation> {
        let (mean, std) = moments(&self.lf_sparse, self.sparse.weights())?;
        let cells = self.hf_cfg.grid.cells();
        let mean = interpolate_profile(&mean, cells);
        let std = interpolate_profile(&std, cells);
        let (e_mean, e_std) = l2_metrics(
            &mean,
            &std,
            &self.ref_mean,
            &self.ref_std,
            self.hf_cfg.grid.dx(),
        )?;
        Ok(Evaluation {
            n: 0,
            mean,
            std,
            e_mean,
            e_std,
        })
    }

    /// Bi-fidelity mean (projection of the low-fidelity mean) and standard
    /// deviation (pointwise moments of the reconstructions) for `n` points.
    /// `n = 0` returns the low-fidelity baseline.
    pub fn evaluate(&self, n: usize) -> Result<Evaluation> {
        if n == 0 {
            return self.lf_baseline();
        }
        let sur = self.surrogate(n)?;
        let w = self.sparse.weights();
        let lf_mean = weighted_mean(&self.lf_sparse, w)?;
        let mean = sur.reconstruct_from_lf(&lf_mean)?;
        let recon: Vec<Vec<f64>> = self
            .lf_sparse
            .par_iter()
            .map(|u| sur.reconstruct_from_lf(u))
            .collect::<Result<_>>()?;
        let squares: Vec<Vec<f64>> = recon
            .iter()
            .map(|p| p.iter().map(|v| v * v).collect())
            .collect();
        let second = weighted_mean(&squares, w)?;
        let std: Vec<f64> = second
            .iter()
            .zip(&mean)
            .map(|(s, m)| (s - m * m).max(0.0).sqrt())
            .collect();
        let (e_mean, e_std) = l2_metrics(
            &mean,
            &std,
            &self.ref_mean,
            &self.ref_std,
            self.hf_cfg.grid.dx(),
        )?;
        Ok(Evaluation {
            n,
            mean,
            std,
            e_mean,
            e_std,
        })
    }

    /// Validation diagnostics for every `k` that has a look-ahead point.
    pub fn diagnostics(&self) -> Result<ErrorDiagnostics> {
        let mut rows = Vec::new();
        if self.validation.is_empty() {
            return Ok(ErrorDiagnostics { rows });
        }
        let hf_dx = self.hf_cfg.grid.dx();
        for k in 1..self.selected() {
            let sur = self.surrogate(k)?;
            let hf_span =
                BiFiSurrogate::build(sur.hf_snapshots().clone(), sur.hf_snapshots().clone())?;
            let re = inplane_re(
                &sur,
                &self.hf_selected[k],
                &self.candidates.vectors()[self.selection.indices[k]],
            )
            .map_err(|e| e.in_phase(Phase::Validation))?
            .value;
            let per_sample: Vec<Result<(f64, f64, f64)>> = self
                .validation_hf
                .par_iter()
                .zip(&self.validation_lf)
                .map(|(uh, ul)| {
                    let ub = sur.reconstruct_from_lf(ul)?;
                    let hn = (hf_dx * uh.iter().map(|v| v * v).sum::<f64>()).sqrt();
                    if !(hn > 0.0) {
                        return Err(Error::DegenerateSample("zero high-fidelity profile".into()));
                    }
                    let err = (hf_dx
                        * uh.iter()
                            .zip(&ub)
                            .map(|(a, b)| (a - b).powi(2))
                            .sum::<f64>())
                    .sqrt()
                        / hn;
                    let rel_l = lf_relative_distance(&sur, ul)?;
                    let rel_h = hf_span.lf_distance(uh)? / hn;
                    let rs = similarity_rs(rel_l, rel_h, 1.0, 1.0)?.value;
                    Ok((err, rel_l, rs))
                })
                .collect();
            let mut errs = Vec::with_capacity(per_sample.len());
            let mut rel_max: f64 = 0.0;
            let mut rs = Vec::with_capacity(per_sample.len());
            for (i, r) in per_sample.into_iter().enumerate() {
                let (e, l, s) = r.map_err(|e| e.at_sample(Phase::Validation, i))?;
                errs.push(e);
                rel_max = rel_max.max(l);
                rs.push(s);
            }
            let true_err_mean = errs.iter().sum::<f64>() / errs.len() as f64;
            rows.push(DiagnosticRow {
                k,
                true_err_mean,
                bound: error_bound(rel_max, re, self.preset.bound),
                rs_median: median(&rs),
                rs_min: rs.iter().copied().fold(f64::INFINITY, f64::min),
                rs_max: rs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                re,
            });
        }
        Ok(ErrorDiagnostics { rows })
    }

    /// Convergence table over `n_list`; entries beyond the selection are skipped.
    pub fn convergence(
        &self,
        n_list: &[usize],
        diagnostics: &ErrorDiagnostics,
    ) -> Result<Vec<ConvergenceRow>> {
        let mut rows = Vec::new();
        for &n in n_list {
            if n > self.selected() {
                continue;
            }
            let ev = self.evaluate(n)?;
            let diag = diagnostics.rows.iter().find(|r| r.k == n);
            rows.push(ConvergenceRow {
                n,
                e_mean: ev.e_mean,
                e_std: ev.e_std,
                bound: diag.map_or(f64::NAN, |d| d.bound),
                re: diag.map_or(f64::NAN, |d| d.re),
            });
        }
        Ok(rows)
    }

    /// Report with profiles for `n` points and convergence rows for `n_list`.
    pub fn report(&self, n: usize, n_list: &[usize]) -> Result<ExperimentReport> {
        let t = Instant::now();
        let n_eff = n.min(self.selected());
        let eval = self.evaluate(n_eff)?;
        let baseline = self.lf_baseline()?;
        let diagnostics = self.diagnostics()?;
        let convergence = self.convergence(n_list, &diagnostics)?;
        let mut timings = self.timings;
        timings.report = t.elapsed().as_secs_f64();
        Ok(ExperimentReport {
            preset_id: self.preset.id,
            n_requested: n,
            n_effective: n_eff,
            selected: self.selection.indices.clone(),
            pivots: self.selection.pivots.clone(),
            stopped_on_tolerance: self.selection.stopped_on_tolerance,
            x: self.hf_cfg.grid.centers(),
            mean_bf: eval.mean,
            std_bf: eval.std,
            mean_ref: self.ref_mean.clone(),
            std_ref: self.ref_std.clone(),
            e_mean: eval.e_mean,
            e_std: eval.e_std,
            lf_e_mean: baseline.e_mean,
            lf_e_std: baseline.e_std,
            convergence,
            diagnostics,
            sparse_nodes: self.sparse.len(),
            timings,
        })
    }
}

/// Full pipeline at the preset's `n`; the convergence table covers `1..=n`.
pub fn run_test(preset: &TestPreset) -> Result<ExperimentReport> {
    let exp = Experiment::prepare(preset, preset.n)?;
    let n_list: Vec<usize> = (1..=preset.n).collect();
    exp.report(preset.n, &n_list)
}

/// One selection pass evaluated at every `n` in `n_list`.
pub fn convergence_sweep(preset: &TestPreset, n_list: &[usize]) -> Result<ExperimentReport> {
    let cap = n_list.iter().copied().max().unwrap_or(0);
    if cap > preset.candidates {
        return Err(Error::InvalidArgument(format!(
            "largest n {cap} exceeds the {} candidates",
            preset.candidates
        )));
    }
    let exp = Experiment::prepare(preset, cap)?;
    exp.report(cap, n_list)
}
