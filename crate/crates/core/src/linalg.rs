//! Small dense symmetric positive definite helpers.

/// Row-major lower Cholesky factor `L` with `A = L L^T`, or `None` when a
/// pivot is not strictly positive.
pub fn cholesky(a: &[f64], n: usize) -> Option<Vec<f64>> {
    assert_eq!(a.len(), n * n);
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if !(s > 0.0) || !s.is_finite() {
                    return None;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Some(l)
}

/// Solves `L L^T x = b`.
pub fn cholesky_solve(l: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    let mut y = b.to_vec();
    for i in 0..n {
        let mut s = y[i];
        for k in 0..i {
            s -= l[i * n + k] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= l[k * n + i] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    y
}

/// Cholesky factor of an SPD matrix, retried once with diagonal jitter
/// `1e-14 trace / n` if the plain factorization breaks down.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdFactor {
    n: usize,
    l: Vec<f64>,
    jitter: f64,
}

pub const JITTER_RELATIVE: f64 = 1e-14;

impl SpdFactor {
    pub fn new(a: &[f64], n: usize) -> Option<Self> {
        if n == 0 {
            return None;
        }
        if let Some(l) = cholesky(a, n) {
            return Some(Self { n, l, jitter: 0.0 });
        }
        let trace: f64 = (0..n).map(|i| a[i * n + i]).sum();
        let jitter = JITTER_RELATIVE * trace / n as f64;
        let mut shifted = a.to_vec();
        for i in 0..n {
            shifted[i * n + i] += jitter;
        }
        cholesky(&shifted, n).map(|l| Self { n, l, jitter })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Diagonal shift that was needed, zero for a plain factorization.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn lower(&self) -> &[f64] {
        &self.l
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        cholesky_solve(&self.l, self.n, b)
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_and_solve() {
        let a = [4.0, 2.0, 0.4, 2.0, 5.0, 1.0, 0.4, 1.0, 3.0];
        let f = SpdFactor::new(&a, 3).unwrap();
        assert_eq!(f.jitter(), 0.0);
        let x = f.solve(&[1.0, 2.0, 3.0]);
        for i in 0..3 {
            let ax: f64 = (0..3).map(|j| a[i * 3 + j] * x[j]).sum();
            assert!((ax - [1.0, 2.0, 3.0][i]).abs() < 1e-14);
        }
    }

    #[test]
    fn singular_without_jitter_room() {
        assert!(cholesky(&[1.0, 1.0, 1.0, 1.0], 2).is_none());
        assert!(SpdFactor::new(&[0.0], 1).is_none());
        // Semidefinite by round-off: jitter rescues it.
        let f = SpdFactor::new(&[1.0, 1.0, 1.0, 1.0], 2).unwrap();
        assert!(f.jitter() > 0.0);
    }
}
