use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fields::ParamVector;
use crate::linalg::SpdFactor;

use super::selection::{gramian, SnapshotSet};

/// Anything that maps a parameter point to a low-fidelity profile.
pub trait LowFidelity: Sync {
    fn solve(&self, z: &ParamVector) -> Result<Vec<f64>>;
}

impl<F> LowFidelity for F
where
    F: Fn(&ParamVector) -> Result<Vec<f64>> + Sync,
{
    fn solve(&self, z: &ParamVector) -> Result<Vec<f64>> {
        self(z)
    }
}

/// `u^B(z) = sum_k c_k(z) u^H(z_k)` with `c` the Gramian projection of
/// `u^L(z)` onto the low-fidelity basis.
#[derive(Debug, Clone)]
pub struct BiFiSurrogate {
    lf_basis: SnapshotSet,
    hf_snapshots: SnapshotSet,
    factor: SpdFactor,
}

impl BiFiSurrogate {
    /// Pairs the selected low-fidelity columns with their high-fidelity
    /// counterparts, in the same order.
    pub fn build(lf_basis: SnapshotSet, hf_snapshots: SnapshotSet) -> Result<Self> {
        if lf_basis.len() != hf_snapshots.len() {
            return Err(Error::SurrogateConstruction(format!(
                "{} low-fidelity columns but {} high-fidelity columns",
                lf_basis.len(),
                hf_snapshots.len()
            )));
        }
        let n = lf_basis.len();
        let factor = SpdFactor::new(&gramian(&lf_basis), n).ok_or_else(|| {
            Error::SurrogateConstruction("low-fidelity Gramian is not positive definite".into())
        })?;
        Ok(Self {
            lf_basis,
            hf_snapshots,
            factor,
        })
    }

    /// Surrogate on the first `k` selected points.
    pub fn truncate(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.len() {
            return Err(Error::InvalidArgument(format!(
                "cannot truncate a {}-point surrogate to {k}",
                self.len()
            )));
        }
        let idx: Vec<usize> = (0..k).collect();
        Self::build(self.lf_basis.subset(&idx)?, self.hf_snapshots.subset(&idx)?)
    }

    pub fn len(&self) -> usize {
        self.lf_basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lf_basis.is_empty()
    }

    pub fn gamma(&self) -> &[ParamVector] {
        self.lf_basis.params()
    }

    pub fn lf_basis(&self) -> &SnapshotSet {
        &self.lf_basis
    }

    pub fn hf_snapshots(&self) -> &SnapshotSet {
        &self.hf_snapshots
    }

    /// Diagonal jitter the Gramian factorization needed, zero if none.
    pub fn jitter(&self) -> f64 {
        self.factor.jitter()
    }

    /// Right-hand side `f_k = <u, u^L(z_k)>`.
    pub fn load_vector(&self, u: &[f64]) -> Result<Vec<f64>> {
        if u.len() != self.lf_basis.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.lf_basis.dim(),
                got: u.len(),
            });
        }
        Ok(self
            .lf_basis
            .vectors()
            .iter()
            .map(|b| self.lf_basis.inner(u, b))
            .collect())
    }

    /// Solves `G c = f` for a low-fidelity profile `u`.
    pub fn project_coeffs(&self, u: &[f64]) -> Result<Vec<f64>> {
        Ok(self.factor.solve(&self.load_vector(u)?))
    }

    /// `sum_k c_k u^H(z_k)`
    pub fn combine_hf(&self, c: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.hf_snapshots.dim()];
        for (ck, col) in c.iter().zip(self.hf_snapshots.vectors()) {
            for (o, v) in out.iter_mut().zip(col) {
                *o += ck * v;
            }
        }
        out
    }

    /// `u^B` from an already computed low-fidelity profile.
    pub fn reconstruct_from_lf(&self, u_lf: &[f64]) -> Result<Vec<f64>> {
        Ok(self.combine_hf(&self.project_coeffs(u_lf)?))
    }

    pub fn bifi_reconstruct(&self, z: &ParamVector, lf: &dyn LowFidelity) -> Result<Vec<f64>> {
        self.reconstruct_from_lf(&lf.solve(z)?)
    }

    /// Bi-fidelity mean: the weighted low-fidelity mean is projected once.
    ///
    /// Weights are normalized by their sum; low-fidelity solves run in
    /// parallel and are reduced in node order.
    pub fn bifi_mean(
        &self,
        nodes: &[ParamVector],
        weights: &[f64],
        lf: &dyn LowFidelity,
    ) -> Result<Vec<f64>> {
        let profiles: Vec<Vec<f64>> = nodes
            .par_iter()
            .map(|z| lf.solve(z))
            .collect::<Result<_>>()?;
        let mean = weighted_mean(&profiles, weights)?;
        self.reconstruct_from_lf(&mean)
    }

    /// Squared norm minus squared projection norm, clamped at zero.
    pub fn lf_distance(&self, u_lf: &[f64]) -> Result<f64> {
        let f = self.load_vector(u_lf)?;
        let c = self.factor.solve(&f);
        let proj: f64 = c.iter().zip(&f).map(|(a, b)| a * b).sum();
        Ok((self.lf_basis.inner(u_lf, u_lf) - proj).max(0.0).sqrt())
    }
}

/// `sum_q w_q u_q / sum_q w_q`, accumulated in index order.
pub fn weighted_mean(profiles: &[Vec<f64>], weights: &[f64]) -> Result<Vec<f64>> {
    if profiles.is_empty() || profiles.len() != weights.len() {
        return Err(Error::DimensionMismatch {
            expected: profiles.len(),
            got: weights.len(),
        });
    }
    let total: f64 = weights.iter().sum();
    if total == 0.0 || !total.is_finite() {
        return Err(Error::InvalidArgument(format!("weights sum to {total}")));
    }
    let mut mean = vec![0.0; profiles[0].len()];
    for (p, w) in profiles.iter().zip(weights) {
        if p.len() != mean.len() {
            return Err(Error::DimensionMismatch {
                expected: mean.len(),
                got: p.len(),
            });
        }
        for (m, v) in mean.iter_mut().zip(p) {
            *m += w * v;
        }
    }
    for m in &mut mean {
        *m /= total;
    }
    Ok(mean)
}
