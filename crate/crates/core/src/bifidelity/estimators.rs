//! Practical error estimators for the bi-fidelity surrogate.

use crate::error::{Error, Result};
use crate::linalg::SpdFactor;

use super::selection::gramian;
use super::surrogate::BiFiSurrogate;

/// A ratio that may be undefined; `degenerate` marks the `+inf` sentinel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ratio {
    pub value: f64,
    pub degenerate: bool,
}

impl Ratio {
    fn of(num: f64, den: f64) -> Self {
        if den > 0.0 {
            Self {
                value: num / den,
                degenerate: false,
            }
        } else if num > 0.0 {
            Self {
                value: f64::INFINITY,
                degenerate: true,
            }
        } else {
            // 0/0: both samples lie in their spans.
            Self {
                value: 0.0,
                degenerate: true,
            }
        }
    }
}

/// Model similarity `R_s = (d^H/|u^H|) / (d^L/|u^L|)`.
pub fn similarity_rs(lf_dist: f64, hf_dist: f64, lf_norm: f64, hf_norm: f64) -> Result<Ratio> {
    if !(lf_norm > 0.0 && hf_norm > 0.0) {
        return Err(Error::DegenerateSample(format!(
            "similarity needs positive norms, got {lf_norm} and {hf_norm}"
        )));
    }
    Ok(Ratio::of(hf_dist / hf_norm, lf_dist / lf_norm))
}

/// In-plane ratio `R_e = |P_H u^H(z_{k+1}) - u^B(z_{k+1})| / d^H(u^H(z_{k+1}))`
/// for the surrogate built on `gamma_k`.
pub fn inplane_re(surrogate: &BiFiSurrogate, hf_next: &[f64], lf_next: &[f64]) -> Result<Ratio> {
    let hf = surrogate.hf_snapshots();
    if hf_next.len() != hf.dim() {
        return Err(Error::DimensionMismatch {
            expected: hf.dim(),
            got: hf_next.len(),
        });
    }
    let n = hf.len();
    let factor = SpdFactor::new(&gramian(hf), n).ok_or_else(|| {
        Error::SurrogateConstruction("high-fidelity Gramian is not positive definite".into())
    })?;
    let f: Vec<f64> = hf.vectors().iter().map(|b| hf.inner(hf_next, b)).collect();
    let c_h = factor.solve(&f);
    let c_l = surrogate.project_coeffs(lf_next)?;
    let diff: Vec<f64> = c_h.iter().zip(&c_l).map(|(a, b)| a - b).collect();
    let num = hf.norm(&surrogate.combine_hf(&diff));
    let proj: f64 = c_h.iter().zip(&f).map(|(a, b)| a * b).sum();
    let den = (hf.inner(hf_next, hf_next) - proj).max(0.0).sqrt();
    Ok(Ratio::of(num, den))
}

/// Constants of the bound `rel_L (c1 + c2 R_e)`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundConstants {
    pub c1: f64,
    pub c2: f64,
}

impl Default for BoundConstants {
    fn default() -> Self {
        Self { c1: 1.0, c2: 1.0 }
    }
}

/// Per-sample bound from the relative low-fidelity distance of `z*`.
pub fn error_bound(lf_rel_dist: f64, re_next: f64, constants: BoundConstants) -> f64 {
    if lf_rel_dist == 0.0 {
        return 0.0;
    }
    lf_rel_dist * (constants.c1 + constants.c2 * re_next)
}

/// `d^L(u^L(z*)) / |u^L(z*)|` against the surrogate's basis.
pub fn lf_relative_distance(surrogate: &BiFiSurrogate, u_lf: &[f64]) -> Result<f64> {
    let norm = surrogate.lf_basis().norm(u_lf);
    if !(norm > 0.0) {
        return Err(Error::DegenerateSample(
            "low-fidelity profile has zero norm".into(),
        ));
    }
    Ok(surrogate.lf_distance(u_lf)? / norm)
}

/// One row of the validation diagnostics, for a surrogate on `k` points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticRow {
    pub k: usize,
    /// Mean relative error over the validation set.
    pub true_err_mean: f64,
    /// Expectation form: largest relative LF distance times `c1 + c2 R_e`.
    pub bound: f64,
    pub rs_median: f64,
    pub rs_min: f64,
    pub rs_max: f64,
    pub re: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ErrorDiagnostics {
    pub rows: Vec<DiagnosticRow>,
}

impl ErrorDiagnostics {
    /// First `k` whose `R_e` exceeds `threshold`, if any.
    pub fn blow_up(&self, threshold: f64) -> Option<usize> {
        self.rows.iter().find(|r| r.re > threshold).map(|r| r.k)
    }

    /// Fraction of rows before the blow-up point whose bound covers the
    /// true mean error, with the number of rows considered.
    pub fn coverage(&self, threshold: f64) -> (f64, usize) {
        let stop = self.blow_up(threshold).unwrap_or(usize::MAX);
        let rows: Vec<&DiagnosticRow> = self.rows.iter().filter(|r| r.k < stop).collect();
        if rows.is_empty() {
            return (0.0, 0);
        }
        let ok = rows.iter().filter(|r| r.bound >= r.true_err_mean).count();
        (ok as f64 / rows.len() as f64, rows.len())
    }
}

/// Median of finite-or-infinite values, NaN for an empty slice.
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
