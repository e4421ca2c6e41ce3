//! Staggered relaxation/transport kernel shared by the kinetic and the
//! two-velocity solvers.
//!
//! Even parity `r` lives at cell centers, odd parity `j` at faces. One
//! substep of size `h`:
//!
//! 1. cellwise relaxation `r <- (r + lam rbar)/(1 + lam)`, `lam = h sigma/eps^2`,
//!    evaluated as `r + lam/(1+lam) (rbar - r)` so equilibria survive round-off;
//! 2. implicit face relaxation of `j` with the stiff part of the gradient term;
//! 3. explicit update of `r` from the face divergence of `j`;
//! 4. explicit update of `j` from the gradient of the new `r`, scaled by `phi`.
//!
//! As `eps -> 0` this collapses to the centered three-point scheme for
//! `rbar_t = (1/sigma <v^2> rbar_x)_x`.

use crate::error::{Error, Result};
use crate::fields::{EpsilonField, ParamVector, ScatteringField};

use super::grid::SpatialGrid;

/// Safety factor applied to the stability bound.
pub const STABILITY_SAFETY: f64 = 0.9;

/// Largest number of substeps per user step before giving up.
const MAX_SUBSTEPS: usize = 1 << 20;

/// Per-sample coefficients, evaluated once per solve.
pub(crate) struct Kernel<'a> {
    n: usize,
    m: usize,
    dx: f64,
    v: &'a [f64],
    w: &'a [f64],
    sigma_c: Vec<f64>,
    eps2_c: Vec<f64>,
    sigma_f: Vec<f64>,
    eps2_f: Vec<f64>,
    phi_f: Vec<f64>,
    walls: Option<Walls>,
    grad: Vec<f64>,
}

/// Robin wall data: `r_w = (g + kappa r_in)/(1 + kappa)` per velocity node.
struct Walls {
    g_left: f64,
    g_right: f64,
    kappa_left: Vec<f64>,
    kappa_right: Vec<f64>,
}

fn phi(eps2: f64) -> f64 {
    if eps2 >= 1.0 {
        1.0 / eps2
    } else {
        1.0
    }
}

impl<'a> Kernel<'a> {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn new(
        grid: &SpatialGrid,
        sigma: &ScatteringField,
        sigma_scale: f64,
        epsilon: &EpsilonField,
        v: &'a [f64],
        w: &'a [f64],
        z: &ParamVector,
    ) -> Result<Self> {
        if let Some(d) = sigma.dimension() {
            if d != z.dim() {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: z.dim(),
                });
            }
        }
        let n = grid.cells();
        let m = v.len();
        let periodic = grid.boundary().is_periodic();
        let sigma_c: Vec<f64> = (0..n)
            .map(|i| sigma_scale * sigma.eval_unchecked(grid.center(i), z))
            .collect();
        if let Some(bad) = sigma_c.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
            return Err(Error::Invariant(format!("non-positive scattering {bad}")));
        }
        let eps2_c: Vec<f64> = (0..n)
            .map(|i| epsilon.eval_epsilon(grid.center(i)).powi(2))
            .collect();

        // Face scattering is the mean of the neighbouring cells so the face
        // flux sees the same coefficient from both sides of a jump.
        let mut sigma_f = vec![0.0; n + 1];
        for f in 1..n {
            sigma_f[f] = 0.5 * (sigma_c[f - 1] + sigma_c[f]);
        }
        let mut eps2_f: Vec<f64> = (0..=n)
            .map(|f| epsilon.eval_epsilon(grid.face(f)).powi(2))
            .collect();
        if periodic {
            let wrap = 0.5 * (sigma_c[n - 1] + sigma_c[0]);
            sigma_f[0] = wrap;
            sigma_f[n] = wrap;
            eps2_f[n] = eps2_f[0];
        } else {
            sigma_f[0] = sigma_c[0];
            sigma_f[n] = sigma_c[n - 1];
        }
        let phi_f = eps2_f.iter().map(|&e| phi(e)).collect();

        let walls = grid.boundary().inflow_values(z).map(|(g_left, g_right)| {
            let dx = grid.dx();
            let kappa = |f: usize| -> Vec<f64> {
                let eps = eps2_f[f].sqrt();
                v.iter()
                    .map(|&vk| 2.0 * eps * vk / (sigma_f[f] * dx))
                    .collect()
            };
            Walls {
                g_left,
                g_right,
                kappa_left: kappa(0),
                kappa_right: kappa(n),
            }
        });

        Ok(Self {
            n,
            m,
            dx: grid.dx(),
            v,
            w,
            sigma_c,
            eps2_c,
            sigma_f,
            eps2_f,
            phi_f,
            walls,
            grad: vec![0.0; (n + 1) * m],
        })
    }

    /// `0.9 min(dx / (v_max sqrt(phi_max)), sigma_min dx^2 / 2)`
    pub(crate) fn stability_bound(&self) -> f64 {
        let vmax = self.v.iter().copied().fold(0.0, f64::max);
        let phimax = self.phi_f.iter().copied().fold(0.0, f64::max);
        let smin = self.sigma_c.iter().copied().fold(f64::INFINITY, f64::min);
        let hyperbolic = self.dx / (vmax * phimax.sqrt());
        let diffusive = smin * self.dx * self.dx / 2.0;
        STABILITY_SAFETY * hyperbolic.min(diffusive)
    }

    /// Substeps needed to keep `dt / substeps` under the stability bound.
    pub(crate) fn substeps(&self, dt: f64) -> Result<usize> {
        let bound = self.stability_bound();
        let k = (dt / bound).ceil().max(1.0);
        if !k.is_finite() || k > MAX_SUBSTEPS as f64 {
            return Err(Error::Stability { dt, bound });
        }
        Ok(k as usize)
    }

    pub(crate) fn relax_cells(&self, r: &mut [f64], h: f64) {
        let m = self.m;
        // With one velocity node the relaxation is the identity.
        if m == 1 {
            return;
        }
        for (i, row) in r.chunks_exact_mut(m).enumerate() {
            let rbar: f64 = row.iter().zip(self.w).map(|(r, w)| r * w).sum();
            let lam = h * self.sigma_c[i] / self.eps2_c[i];
            let theta = lam / (1.0 + lam);
            for x in row.iter_mut() {
                *x += theta * (rbar - *x);
            }
        }
    }

    fn gradients(&mut self, r: &[f64]) {
        let (n, m, dx) = (self.n, self.m, self.dx);
        let g = &mut self.grad;
        for f in 1..n {
            for k in 0..m {
                g[f * m + k] = (r[f * m + k] - r[(f - 1) * m + k]) / dx;
            }
        }
        match &self.walls {
            None => {
                for k in 0..m {
                    let d = (r[k] - r[(n - 1) * m + k]) / dx;
                    g[k] = d;
                    g[n * m + k] = d;
                }
            }
            Some(w) => {
                let half = 0.5 * dx;
                for k in 0..m {
                    let r0 = r[k];
                    let kl = w.kappa_left[k];
                    let wall_l = (w.g_left + kl * r0) / (1.0 + kl);
                    g[k] = (r0 - wall_l) / half;
                    let rn = r[(n - 1) * m + k];
                    let kr = w.kappa_right[k];
                    let wall_r = (w.g_right + kr * rn) / (1.0 + kr);
                    g[n * m + k] = (wall_r - rn) / half;
                }
            }
        }
    }

    /// One substep of size `h` on `r` (N x M) and `j` ((N+1) x M).
    pub(crate) fn substep(&mut self, r: &mut [f64], j: &mut [f64], h: f64) {
        let (n, m) = (self.n, self.m);
        self.relax_cells(r, h);

        self.gradients(r);
        for f in 0..=n {
            let e2 = self.eps2_f[f];
            let stiff = (h / e2) * (1.0 - e2 * self.phi_f[f]);
            let inv = 1.0 / (1.0 + h * self.sigma_f[f] / e2);
            for k in 0..m {
                let idx = f * m + k;
                j[idx] = (j[idx] - stiff * self.v[k] * self.grad[idx]) * inv;
            }
        }

        let c = h / self.dx;
        for i in 0..n {
            for k in 0..m {
                r[i * m + k] -= c * self.v[k] * (j[(i + 1) * m + k] - j[i * m + k]);
            }
        }

        self.gradients(r);
        for f in 0..=n {
            let a = h * self.phi_f[f];
            for k in 0..m {
                let idx = f * m + k;
                j[idx] -= a * self.v[k] * self.grad[idx];
            }
        }
    }

    /// Advances by `dt` using `substeps` equal substeps.
    pub(crate) fn advance(&mut self, r: &mut [f64], j: &mut [f64], dt: f64, substeps: usize) {
        let h = dt / substeps as f64;
        for _ in 0..substeps {
            self.substep(r, j, h);
        }
    }
}

/// Step schedule reaching `final_time`: `(full_steps, remainder)`.
///
/// Uses `round(T/dt)` steps when that lands on `T` to relative `1e-12`,
/// otherwise `floor(T/dt)` full steps plus one shorter step.
pub(crate) fn schedule(final_time: f64, dt: f64) -> (usize, f64) {
    if final_time == 0.0 {
        return (0, 0.0);
    }
    let k = (final_time / dt).round();
    if (final_time - k * dt).abs() <= 1e-12 * final_time {
        return (k as usize, 0.0);
    }
    let full = (final_time / dt).floor();
    (full as usize, final_time - full * dt)
}
