//! Explicit finite-volume heat solver used as the diffusion-limit oracle.

use crate::error::{Error, Result};

use super::grid::SpatialGrid;
use super::kernel::schedule;

/// Internal substeps per user step; keeps the oracle's time error well below
/// the kinetic schemes' so comparisons measure the spatial discretization.
pub const DIFFUSION_SUBSTEPS: usize = 16;

/// Evolves `rho_t = (D rho_x)_x` from `rho0` to `final_time`.
///
/// `d_cells` holds cell diffusivities; faces use their harmonic mean, and
/// Dirichlet walls a ghost cell `2 g - rho`. `dirichlet` is `None` for a
/// periodic grid.
pub fn heat_evolve(
    grid: &SpatialGrid,
    rho0: &[f64],
    d_cells: &[f64],
    dirichlet: Option<(f64, f64)>,
    dt: f64,
    final_time: f64,
) -> Result<Vec<f64>> {
    let n = grid.cells();
    if rho0.len() != n || d_cells.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: rho0.len().min(d_cells.len()),
        });
    }
    if !(dt > 0.0) || !(final_time >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need dt > 0 and T >= 0, got dt = {dt}, T = {final_time}"
        )));
    }
    let dmax = d_cells.iter().copied().fold(0.0, f64::max);
    let dx = grid.dx();
    let bound = dx * dx / (2.0 * dmax);
    if dt > bound {
        return Err(Error::InvalidArgument(format!(
            "diffusion step {dt:e} exceeds explicit bound {bound:e}"
        )));
    }

    let harmonic = |a: f64, b: f64| 2.0 * a * b / (a + b);
    let mut d_face = vec![0.0; n + 1];
    for f in 1..n {
        d_face[f] = harmonic(d_cells[f - 1], d_cells[f]);
    }
    match dirichlet {
        None => {
            let wrap = harmonic(d_cells[n - 1], d_cells[0]);
            d_face[0] = wrap;
            d_face[n] = wrap;
        }
        Some(_) => {
            d_face[0] = d_cells[0];
            d_face[n] = d_cells[n - 1];
        }
    }

    let mut rho = rho0.to_vec();
    let mut flux = vec![0.0; n + 1];
    let mut step = |rho: &mut Vec<f64>, h: f64| {
        for f in 1..n {
            flux[f] = d_face[f] * (rho[f] - rho[f - 1]) / dx;
        }
        match dirichlet {
            None => {
                let q = d_face[0] * (rho[0] - rho[n - 1]) / dx;
                flux[0] = q;
                flux[n] = q;
            }
            Some((gl, gr)) => {
                flux[0] = d_face[0] * (rho[0] - (2.0 * gl - rho[0])) / dx;
                flux[n] = d_face[n] * ((2.0 * gr - rho[n - 1]) - rho[n - 1]) / dx;
            }
        }
        for i in 0..n {
            rho[i] += h / dx * (flux[i + 1] - flux[i]);
        }
    };

    let (full, rem) = schedule(final_time, dt);
    let h = dt / DIFFUSION_SUBSTEPS as f64;
    for _ in 0..full * DIFFUSION_SUBSTEPS {
        step(&mut rho, h);
    }
    if rem > 0.0 {
        let hr = rem / DIFFUSION_SUBSTEPS as f64;
        for _ in 0..DIFFUSION_SUBSTEPS {
            step(&mut rho, hr);
        }
    }
    if rho.iter().any(|x| !x.is_finite()) {
        return Err(Error::Diverged { step: full });
    }
    Ok(rho)
}
