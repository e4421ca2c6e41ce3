//! Asymptotic-preserving solvers for the kinetic parity system, the
//! two-velocity macroscopic system, and the limiting heat equation.

mod diffusion;
mod grid;
mod kernel;

pub use diffusion::{heat_evolve, DIFFUSION_SUBSTEPS};
pub use grid::SpatialGrid;
pub use kernel::STABILITY_SAFETY;

use crate::error::{Error, Result};
use crate::fields::{
    hf_initial_state, lf_initial_state, EpsilonField, InitialData, ParamVector, ScatteringField,
};
use crate::quadrature::VelocityQuadrature;
use crate::report::fmt_f64;

use kernel::{schedule, Kernel};

/// Parity unknowns: `r` is `N x M` at cell centers, `j` is `(N+1) x M` at faces,
/// both row-major with the velocity index fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct KineticState {
    pub r: Vec<f64>,
    pub j: Vec<f64>,
    pub cells: usize,
    pub velocities: usize,
    pub t: f64,
}

impl KineticState {
    pub fn zeros(cells: usize, velocities: usize) -> Self {
        Self {
            r: vec![0.0; cells * velocities],
            j: vec![0.0; (cells + 1) * velocities],
            cells,
            velocities,
            t: 0.0,
        }
    }
}

/// Density `rho` at cell centers and flux `s` at the `N+1` faces.
#[derive(Debug, Clone, PartialEq)]
pub struct MacroState {
    pub rho: Vec<f64>,
    pub s: Vec<f64>,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub grid: SpatialGrid,
    pub dt: f64,
    pub final_time: f64,
    pub epsilon: EpsilonField,
    pub sigma: ScatteringField,
    pub velocity: VelocityQuadrature,
    /// Multiplier on `sigma` in the two-velocity model.
    pub lf_sigma_scale: f64,
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "time step {} must be positive",
                self.dt
            )));
        }
        if !(self.final_time >= 0.0 && self.final_time.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "final time {} must be non-negative",
                self.final_time
            )));
        }
        if !(self.lf_sigma_scale > 0.0 && self.lf_sigma_scale.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "lf_sigma_scale {} must be positive",
                self.lf_sigma_scale
            )));
        }
        self.sigma.validate()?;
        self.epsilon.validate()
    }

    fn hf_kernel(&self, z: &ParamVector) -> Result<Kernel<'_>> {
        Kernel::new(
            &self.grid,
            &self.sigma,
            1.0,
            &self.epsilon,
            self.velocity.nodes(),
            self.velocity.weights(),
            z,
        )
    }

    fn lf_kernel(&self, z: &ParamVector) -> Result<Kernel<'static>> {
        const UNIT: [f64; 1] = [1.0];
        Kernel::new(
            &self.grid,
            &self.sigma,
            self.lf_sigma_scale,
            &self.epsilon,
            &UNIT,
            &UNIT,
            z,
        )
    }

    /// Stability bound of the kinetic scheme for sample `z`.
    pub fn hf_stability_bound(&self, z: &ParamVector) -> Result<f64> {
        Ok(self.hf_kernel(z)?.stability_bound())
    }

    /// Stability bound of the two-velocity scheme for sample `z`.
    pub fn lf_stability_bound(&self, z: &ParamVector) -> Result<f64> {
        Ok(self.lf_kernel(z)?.stability_bound())
    }
}

/// How a solve was carried out.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveInfo {
    /// Stability bound including the safety factor.
    pub bound: f64,
    /// Substeps taken per user step.
    pub substeps: usize,
    /// Full user steps, not counting a final partial step.
    pub steps: usize,
    pub remainder: f64,
}

/// `rbar_i = sum_m w_m r_{i,m}`
pub fn compute_rbar(state: &KineticState, vq: &VelocityQuadrature) -> Result<Vec<f64>> {
    if state.velocities != vq.len() || state.r.len() != state.cells * state.velocities {
        return Err(Error::DimensionMismatch {
            expected: vq.len(),
            got: state.velocities,
        });
    }
    Ok(state
        .r
        .chunks_exact(state.velocities)
        .map(|row| vq.average(row))
        .collect())
}

fn check_finite(values: &[f64], step: usize) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Diverged { step })
    }
}

fn check_kinetic_shape(state: &KineticState, cfg: &SolverConfig) -> Result<()> {
    let (n, m) = (cfg.grid.cells(), cfg.velocity.len());
    if state.cells != n
        || state.velocities != m
        || state.r.len() != n * m
        || state.j.len() != (n + 1) * m
    {
        return Err(Error::DimensionMismatch {
            expected: n * m,
            got: state.r.len(),
        });
    }
    Ok(())
}

/// Advances the kinetic state by `cfg.dt`, substepping if the step exceeds
/// the stability bound.
pub fn hf_step(state: &KineticState, cfg: &SolverConfig, z: &ParamVector) -> Result<KineticState> {
    check_kinetic_shape(state, cfg)?;
    let mut k = cfg.hf_kernel(z)?;
    let sub = k.substeps(cfg.dt)?;
    let mut out = state.clone();
    k.advance(&mut out.r, &mut out.j, cfg.dt, sub);
    check_finite(&out.r, 1)?;
    out.t += cfg.dt;
    Ok(out)
}

/// Advances the macroscopic state by `cfg.dt`.
pub fn lf_step(state: &MacroState, cfg: &SolverConfig, z: &ParamVector) -> Result<MacroState> {
    let n = cfg.grid.cells();
    if state.rho.len() != n || state.s.len() != n + 1 {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: state.rho.len(),
        });
    }
    let mut k = cfg.lf_kernel(z)?;
    let sub = k.substeps(cfg.dt)?;
    let mut out = state.clone();
    k.advance(&mut out.rho, &mut out.s, cfg.dt, sub);
    check_finite(&out.rho, 1)?;
    out.t += cfg.dt;
    Ok(out)
}

fn integrate(
    kernel: &mut Kernel<'_>,
    r: &mut [f64],
    j: &mut [f64],
    dt: f64,
    final_time: f64,
) -> Result<SolveInfo> {
    let bound = kernel.stability_bound();
    let sub = kernel.substeps(dt)?;
    let (steps, remainder) = schedule(final_time, dt);
    for step in 0..steps {
        kernel.advance(r, j, dt, sub);
        check_finite(r, step + 1)?;
    }
    if remainder > 0.0 {
        let sub_rem = kernel.substeps(remainder)?;
        kernel.advance(r, j, remainder, sub_rem);
        check_finite(r, steps + 1)?;
    }
    Ok(SolveInfo {
        bound,
        substeps: sub,
        steps,
        remainder,
    })
}

/// Kinetic solve to `cfg.final_time` returning the full state.
pub fn hf_evolve(
    cfg: &SolverConfig,
    z: &ParamVector,
    initial: &InitialData,
) -> Result<(KineticState, SolveInfo)> {
    cfg.validate()?;
    let mut kernel = cfg.hf_kernel(z)?;
    let mut state = hf_initial_state(initial, &cfg.epsilon, &cfg.grid, &cfg.velocity, z);
    let info = integrate(
        &mut kernel,
        &mut state.r,
        &mut state.j,
        cfg.dt,
        cfg.final_time,
    )?;
    state.t = cfg.final_time;
    Ok((state, info))
}

/// `rbar` at the final time.
pub fn hf_solve(cfg: &SolverConfig, z: &ParamVector, initial: &InitialData) -> Result<Vec<f64>> {
    hf_solve_with_info(cfg, z, initial).map(|(u, _)| u)
}

pub fn hf_solve_with_info(
    cfg: &SolverConfig,
    z: &ParamVector,
    initial: &InitialData,
) -> Result<(Vec<f64>, SolveInfo)> {
    let (state, info) = hf_evolve(cfg, z, initial)?;
    Ok((compute_rbar(&state, &cfg.velocity)?, info))
}

/// Two-velocity solve to `cfg.final_time` returning the full state.
pub fn lf_evolve(
    cfg: &SolverConfig,
    z: &ParamVector,
    initial: &InitialData,
) -> Result<(MacroState, SolveInfo)> {
    cfg.validate()?;
    let mut kernel = cfg.lf_kernel(z)?;
    let mut state = lf_initial_state(initial, &cfg.epsilon, &cfg.grid, &cfg.velocity, z);
    let info = integrate(
        &mut kernel,
        &mut state.rho,
        &mut state.s,
        cfg.dt,
        cfg.final_time,
    )?;
    state.t = cfg.final_time;
    Ok((state, info))
}

/// `rho` at the final time.
pub fn lf_solve(cfg: &SolverConfig, z: &ParamVector, initial: &InitialData) -> Result<Vec<f64>> {
    lf_solve_with_info(cfg, z, initial).map(|(u, _)| u)
}

pub fn lf_solve_with_info(
    cfg: &SolverConfig,
    z: &ParamVector,
    initial: &InitialData,
) -> Result<(Vec<f64>, SolveInfo)> {
    let (state, info) = lf_evolve(cfg, z, initial)?;
    Ok((state.rho, info))
}

/// Which limiting diffusivity the oracle uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiffusionKind {
    /// `D = 1/(3 sigma)`, the limit of the kinetic model.
    LteThird,
    /// `D = 1/(lf_sigma_scale sigma)`, the limit of the two-velocity model.
    GtFull,
}

/// Heat-equation oracle started from the macroscopic initial density.
pub fn diffusion_solve(
    cfg: &SolverConfig,
    z: &ParamVector,
    initial: &InitialData,
    kind: DiffusionKind,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    if let Some(d) = cfg.sigma.dimension() {
        if d != z.dim() {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: z.dim(),
            });
        }
    }
    let grid = &cfg.grid;
    let rho0 = lf_initial_state(initial, &cfg.epsilon, grid, &cfg.velocity, z).rho;
    let factor = match kind {
        DiffusionKind::LteThird => 3.0,
        DiffusionKind::GtFull => cfg.lf_sigma_scale,
    };
    let d: Vec<f64> = (0..grid.cells())
        .map(|i| 1.0 / (factor * cfg.sigma.eval_unchecked(grid.center(i), z)))
        .collect();
    heat_evolve(
        grid,
        &rho0,
        &d,
        grid.boundary().inflow_values(z),
        cfg.dt,
        cfg.final_time,
    )
}

/// Profile dump with header `x,<name>`, one row per cell.
pub fn profile_csv(grid: &SpatialGrid, values: &[f64], name: &str) -> String {
    let mut out = format!("x,{name}\n");
    for (x, u) in grid.centers().iter().zip(values) {
        out.push_str(&fmt_f64(*x));
        out.push(',');
        out.push_str(&fmt_f64(*u));
        out.push('\n');
    }
    out
}
