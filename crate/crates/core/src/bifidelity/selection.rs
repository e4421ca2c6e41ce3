use crate::error::{Error, Result};
use crate::fields::ParamVector;
use crate::linalg::dot;

/// Spatial snapshots `u(z_k)` with the grid weight of the inner product
/// `<u, w> = dx sum_i u_i w_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotSet {
    vectors: Vec<Vec<f64>>,
    params: Vec<ParamVector>,
    ip_weight: f64,
}

impl SnapshotSet {
    pub fn new(vectors: Vec<Vec<f64>>, params: Vec<ParamVector>, ip_weight: f64) -> Result<Self> {
        if vectors.is_empty() {
            return Err(Error::InvalidArgument("snapshot set is empty".into()));
        }
        if vectors.len() != params.len() {
            return Err(Error::DimensionMismatch {
                expected: vectors.len(),
                got: params.len(),
            });
        }
        let len = vectors[0].len();
        if let Some(bad) = vectors.iter().find(|v| v.len() != len) {
            return Err(Error::DimensionMismatch {
                expected: len,
                got: bad.len(),
            });
        }
        if !(ip_weight > 0.0 && ip_weight.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "grid weight {ip_weight} must be positive"
            )));
        }
        Ok(Self {
            vectors,
            params,
            ip_weight,
        })
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Spatial length of each snapshot.
    pub fn dim(&self) -> usize {
        self.vectors[0].len()
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn params(&self) -> &[ParamVector] {
        &self.params
    }

    pub fn ip_weight(&self) -> f64 {
        self.ip_weight
    }

    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        self.ip_weight * dot(a, b)
    }

    pub fn norm(&self, a: &[f64]) -> f64 {
        self.inner(a, a).sqrt()
    }

    /// Columns at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.len()) {
            return Err(Error::InvalidArgument(format!(
                "snapshot index {bad} out of range for {} columns",
                self.len()
            )));
        }
        Self::new(
            indices.iter().map(|&i| self.vectors[i].clone()).collect(),
            indices.iter().map(|&i| self.params[i].clone()).collect(),
            self.ip_weight,
        )
    }
}

/// `G_ij = <u_i, u_j>`, row-major `K x K`, symmetric by construction.
pub fn gramian(set: &SnapshotSet) -> Vec<f64> {
    let k = set.len();
    let mut g = vec![0.0; k * k];
    for i in 0..k {
        for j in i..k {
            let v = set.inner(&set.vectors[i], &set.vectors[j]);
            g[i * k + j] = v;
            g[j * k + i] = v;
        }
    }
    g
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    /// Selected candidate indices in greedy order.
    pub indices: Vec<usize>,
    /// Squared distance of each selected snapshot to the span of the earlier ones.
    pub pivots: Vec<f64>,
    /// Row-major lower factor of the Gramian restricted to `indices`, `n x n`.
    pub chol: Vec<f64>,
    /// Set when every snapshot is zero and nothing could be selected.
    pub all_zero: bool,
    /// Set when selection stopped on the pivot tolerance before `n_max`.
    pub stopped_on_tolerance: bool,
}

/// Default relative pivot tolerance.
pub const DEFAULT_PIVOT_TOL: f64 = 1e-12;

/// Greedy farthest-point selection as pivoted Cholesky on the Gramian.
///
/// Columns of `G` are formed only for the chosen pivots, so the cost is
/// `O(K n N)`. Ties go to the smallest index. Stops after `n_max` pivots or
/// when the next pivot falls below `tol` times the first.
pub fn select_points(set: &SnapshotSet, n_max: usize, tol: f64) -> Result<SelectionResult> {
    let k_total = set.len();
    if n_max == 0 || n_max > k_total {
        return Err(Error::InvalidArgument(format!(
            "n_max = {n_max} must lie in 1..={k_total}"
        )));
    }
    if !(tol >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "pivot tolerance {tol} must be >= 0"
        )));
    }
    let mut diag: Vec<f64> = set.vectors.iter().map(|u| set.inner(u, u)).collect();
    let mut selected = vec![false; k_total];
    // l[k][i]: k-th Cholesky column evaluated at candidate i.
    let mut l: Vec<Vec<f64>> = Vec::with_capacity(n_max);
    let mut indices = Vec::with_capacity(n_max);
    let mut pivots = Vec::with_capacity(n_max);
    let mut first = 0.0;
    let mut stopped_on_tolerance = false;

    for step in 0..n_max {
        let mut best: Option<usize> = None;
        for i in 0..k_total {
            if selected[i] {
                continue;
            }
            if best.is_none_or(|b| diag[i] > diag[b]) {
                best = Some(i);
            }
        }
        let Some(p) = best else { break };
        let piv = diag[p];
        if step == 0 {
            if !(piv > 0.0) {
                return Ok(SelectionResult {
                    indices,
                    pivots,
                    chol: Vec::new(),
                    all_zero: true,
                    stopped_on_tolerance: false,
                });
            }
            first = piv;
        } else if !(piv > 0.0) || piv < tol * first {
            stopped_on_tolerance = true;
            break;
        }
        let root = piv.sqrt();
        let up = &set.vectors[p];
        let col: Vec<f64> = (0..k_total)
            .map(|i| {
                if selected[i] {
                    return 0.0;
                }
                let mut g = set.inner(&set.vectors[i], up);
                for prev in &l {
                    g -= prev[i] * prev[p];
                }
                g / root
            })
            .collect();
        for i in 0..k_total {
            if !selected[i] {
                diag[i] -= col[i] * col[i];
            }
        }
        selected[p] = true;
        diag[p] = 0.0;
        l.push(col);
        indices.push(p);
        pivots.push(piv);
    }

    // Row a of the restricted factor is candidate indices[a] in columns b < a,
    // which were all formed while that candidate was still unselected.
    let n = indices.len();
    let mut chol = vec![0.0; n * n];
    for a in 0..n {
        chol[a * n + a] = pivots[a].sqrt();
        for b in 0..a {
            chol[a * n + b] = l[b][indices[a]];
        }
    }
    Ok(SelectionResult {
        indices,
        pivots,
        chol,
        all_zero: false,
        stopped_on_tolerance,
    })
}
