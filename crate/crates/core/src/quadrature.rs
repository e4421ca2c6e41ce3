//! Gauss-Legendre velocity rules, nested Clenshaw-Curtis rules and Smolyak
//! sparse grids.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Quadrature on `(0, 1)` with weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityQuadrature {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl VelocityQuadrature {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Largest node, used by the stability bound.
    pub fn max_speed(&self) -> f64 {
        self.nodes.iter().copied().fold(0.0, f64::max)
    }

    /// `sum_k w_k g_k`
    pub fn average(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, g)| w * g).sum()
    }
}

/// Legendre `P_m(x)` and its derivative via the three-term recurrence.
fn legendre(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if m == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=m {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// `m`-point Gauss-Legendre rule mapped to `(0, 1)`, nodes increasing.
pub fn gauss_legendre_unit(m: usize) -> Result<VelocityQuadrature> {
    if m == 0 {
        return Err(Error::InvalidArgument(
            "Gauss-Legendre rule needs at least one node".into(),
        ));
    }
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        // Chebyshev-like initial guess for the i-th largest root.
        let mut x = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(m, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre(m, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // Map [-1,1] -> [0,1]; halve the weights.
        nodes[i] = 0.5 * (1.0 - x);
        nodes[m - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * w;
        weights[m - 1 - i] = 0.5 * w;
    }
    if m % 2 == 1 {
        nodes[m / 2] = 0.5;
    }
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    Ok(VelocityQuadrature { nodes, weights })
}

/// Nested Clenshaw-Curtis rule on `[-1, 1]`.
///
/// Level 0 is the midpoint rule; level `l >= 1` has nodes `cos(j pi / 2^l)`.
pub fn clenshaw_curtis_1d(level: u32) -> (Vec<f64>, Vec<f64>) {
    if level == 0 {
        return (vec![0.0], vec![2.0]);
    }
    let n = 1usize << level;
    let nodes = (0..=n).map(|j| cc_node(j, n)).collect();
    let weights = (0..=n).map(|j| cc_weight(j, n)).collect();
    (nodes, weights)
}

fn cc_node(j: usize, n: usize) -> f64 {
    // Exact zero at the midpoint instead of cos(pi/2) ~ 6e-17.
    if 2 * j == n {
        0.0
    } else {
        (j as f64 * PI / n as f64).cos()
    }
}

fn cc_weight(j: usize, n: usize) -> f64 {
    let c = if j == 0 || j == n { 1.0 } else { 2.0 };
    let s: f64 = (1..=n / 2)
        .map(|k| {
            let b = if 2 * k == n { 1.0 } else { 2.0 };
            let k = k as f64;
            b / (4.0 * k * k - 1.0) * (2.0 * k * j as f64 * PI / n as f64).cos()
        })
        .sum();
    c / n as f64 * (1.0 - s)
}

/// Smolyak sparse grid on `[-1, 1]^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseGrid {
    nodes: Vec<Vec<f64>>,
    weights: Vec<f64>,
    level: u32,
    dimension: usize,
}

impl SparseGrid {
    pub fn nodes(&self) -> &[Vec<f64>] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `sum_q w_q f(z_q)`, reduced in node order.
    pub fn integrate<F: Fn(&[f64]) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(z, w)| w * f(z))
            .sum()
    }

    /// Node and weight table as CSV text.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let header: Vec<String> = (1..=self.dimension).map(|i| format!("z{i}")).collect();
        out.push_str(&header.join(","));
        out.push_str(",weight\n");
        for (z, w) in self.nodes.iter().zip(&self.weights) {
            for c in z {
                out.push_str(&format!("{c:.16e},"));
            }
            out.push_str(&format!("{w:.16e}\n"));
        }
        out
    }
}

fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

/// Multi-indices `l in N^d` with `lo <= |l| <= hi`, in lexicographic order.
fn index_set(d: usize, lo: u32, hi: u32) -> Vec<Vec<u32>> {
    fn rec(d: usize, budget: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>, lo: u32) {
        if prefix.len() == d {
            let s: u32 = prefix.iter().sum();
            if s >= lo {
                out.push(prefix.clone());
            }
            return;
        }
        for l in 0..=budget {
            prefix.push(l);
            rec(d, budget - l, prefix, out, lo);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(d, hi, &mut Vec::with_capacity(d), &mut out, lo);
    out
}

/// Odometer increment; false once every combination has been visited.
fn advance(counter: &mut [usize], sizes: &[usize]) -> bool {
    for i in (0..counter.len()).rev() {
        counter[i] += 1;
        if counter[i] < sizes[i] {
            return true;
        }
        counter[i] = 0;
    }
    false
}

/// Isotropic Smolyak combination of nested Clenshaw-Curtis rules,
/// `sum_{L-d+1 <= |l| <= L} (-1)^{L-|l|} C(d-1, L-|l|) (Q_{l_1} x ... x Q_{l_d})`.
///
/// Because the rules are nested, every node is `cos(k pi / 2^L)` in each
/// coordinate, so duplicates are merged on the integer keys `k` exactly.
/// Nodes are returned in lexicographic order of their coordinates.
pub fn smolyak_grid(d: usize, level: u32) -> Result<SparseGrid> {
    if d == 0 {
        return Err(Error::InvalidArgument(
            "sparse grid dimension must be >= 1".into(),
        ));
    }
    if level > 20 {
        return Err(Error::InvalidArgument(format!(
            "sparse grid level {level} too large"
        )));
    }
    // One extra bit keeps the level-0 midpoint on an integer key.
    let fine = 2usize << level;
    let rules: Vec<(Vec<usize>, Vec<f64>)> = (0..=level)
        .map(|l| {
            let (_, w) = clenshaw_curtis_1d(l);
            let keys = if l == 0 {
                vec![fine / 2]
            } else {
                let stride = fine >> l;
                (0..=(1usize << l)).map(|j| j * stride).collect()
            };
            (keys, w)
        })
        .collect();

    let lo = (level + 1).saturating_sub(d as u32);
    let mut acc: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    for idx in index_set(d, lo, level) {
        let s: u32 = idx.iter().sum();
        let gap = (level - s) as usize;
        let sign = if gap.is_multiple_of(2) { 1.0 } else { -1.0 };
        let coef = sign * binomial(d - 1, gap) as f64;
        if coef == 0.0 {
            continue;
        }
        let factors: Vec<&(Vec<usize>, Vec<f64>)> =
            idx.iter().map(|&l| &rules[l as usize]).collect();
        let sizes: Vec<usize> = factors.iter().map(|f| f.0.len()).collect();
        let mut counter = vec![0usize; d];
        loop {
            let key: Vec<usize> = (0..d).map(|i| factors[i].0[counter[i]]).collect();
            let w: f64 = (0..d).map(|i| factors[i].1[counter[i]]).product();
            *acc.entry(key).or_insert(0.0) += coef * w;
            if !advance(&mut counter, &sizes) {
                break;
            }
        }
    }

    // Key order is reverse coordinate order since cos is decreasing on [0, pi].
    let mut entries: Vec<(Vec<usize>, f64)> = acc.into_iter().collect();
    entries.sort_by(|a, b| b.0.cmp(&a.0));
    let (nodes, weights) = entries
        .into_iter()
        .map(|(k, w)| (k.iter().map(|&j| cc_node(j, fine)).collect(), w))
        .unzip();
    Ok(SparseGrid {
        nodes,
        weights,
        level,
        dimension: d,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn gl_small_rules() {
        let q = gauss_legendre_unit(1).unwrap();
        assert_eq!(q.nodes(), &[0.5]);
        assert!((q.weights()[0] - 1.0).abs() < 1e-15);
        let q = gauss_legendre_unit(2).unwrap();
        let h = 0.5 / 3f64.sqrt();
        assert!((q.nodes()[0] - (0.5 - h)).abs() < 1e-15);
        assert!((q.nodes()[1] - (0.5 + h)).abs() < 1e-15);
        assert!((q.nodes()[0] - 0.21132).abs() < 1e-5);
        assert!(q.weights().iter().all(|w| (w - 0.5).abs() < 1e-15));
        assert!(gauss_legendre_unit(0).is_err());
    }

    #[test]
    fn gl16_exactness() {
        let q = gauss_legendre_unit(16).unwrap();
        for k in 0..=31 {
            let s: f64 = q
                .nodes()
                .iter()
                .zip(q.weights())
                .map(|(v, w)| w * v.powi(k))
                .sum();
            assert!((s - 1.0 / (k as f64 + 1.0)).abs() < 1e-12, "k = {k}: {s}");
        }
        assert!(q.nodes().windows(2).all(|p| p[0] < p[1]));
        assert!(q.nodes()[0] > 0.0 && q.nodes()[15] < 1.0);
        assert!((q.weights().iter().sum::<f64>() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn cc_small_levels() {
        assert_eq!(clenshaw_curtis_1d(0), (vec![0.0], vec![2.0]));
        let (x, w) = clenshaw_curtis_1d(1);
        assert_eq!(x, vec![1.0, 0.0, -1.0]);
        let expected = [1.0 / 3.0, 4.0 / 3.0, 1.0 / 3.0];
        for (a, b) in w.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
        let (x, w) = clenshaw_curtis_1d(3);
        assert_eq!(x.len(), 9);
        let i4: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(4)).sum();
        assert!((i4 - 0.4).abs() < 1e-12);
    }

    #[test]
    fn cc_nested() {
        for l in 1..=5 {
            let (coarse, _) = clenshaw_curtis_1d(l);
            let (fine, _) = clenshaw_curtis_1d(l + 1);
            for c in coarse {
                assert!(fine.iter().any(|f| (f - c).abs() < 1e-14));
            }
        }
    }

    #[test]
    fn cc_polynomial_exactness() {
        // Level l has 2^l + 1 nodes and is exact to degree 2^l (plus the odd one by symmetry).
        for l in 1..=6u32 {
            let (x, w) = clenshaw_curtis_1d(l);
            let deg = 1usize << l;
            for k in 0..=deg {
                let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k as i32)).sum();
                let exact = if k % 2 == 1 {
                    0.0
                } else {
                    2.0 / (k as f64 + 1.0)
                };
                assert!((s - exact).abs() < 1e-12, "l={l} k={k}");
            }
        }
    }

    #[test]
    fn smolyak_1d_is_cc() {
        for l in 0..=5 {
            let g = smolyak_grid(1, l).unwrap();
            let (x, w) = clenshaw_curtis_1d(l);
            // Grid is sorted ascending; the CC rule descending.
            let xs: Vec<f64> = g.nodes().iter().map(|p| p[0]).collect();
            let mut rev_x = x.clone();
            rev_x.reverse();
            let mut rev_w = w.clone();
            rev_w.reverse();
            assert_eq!(xs.len(), rev_x.len());
            for i in 0..xs.len() {
                assert!((xs[i] - rev_x[i]).abs() < 1e-15);
                assert!((g.weights()[i] - rev_w[i]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn smolyak_d2_level1_monomials() {
        let g = smolyak_grid(2, 1).unwrap();
        type Monomial = fn(&[f64]) -> f64;
        let cases: [(Monomial, f64); 6] = [
            (|_| 1.0, 4.0),
            (|z| z[0], 0.0),
            (|z| z[1], 0.0),
            (|z| z[0] * z[1], 0.0),
            (|z| z[0] * z[0], 4.0 / 3.0),
            (|z| z[1] * z[1], 4.0 / 3.0),
        ];
        for (f, exact) in cases {
            assert!((g.integrate(f) - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn smolyak_d5_level5_count() {
        let g = smolyak_grid(5, 5).unwrap();
        // Standard isotropic total-degree convention with levels starting at 0.
        assert_eq!(g.len(), 2433);
        assert!((g.weights().iter().sum::<f64>() - 32.0).abs() < 1e-10);
    }

    #[test]
    fn smolyak_known_counts() {
        // Classical nested CC counts for d = 2: 1, 5, 13, 29, 65.
        let counts: Vec<usize> = (0..=4).map(|l| smolyak_grid(2, l).unwrap().len()).collect();
        assert_eq!(counts, vec![1, 5, 13, 29, 65]);
    }

    #[test]
    fn smolyak_lexicographic_and_unique() {
        let g = smolyak_grid(3, 3).unwrap();
        for p in g.nodes().windows(2) {
            let ord = p[0]
                .iter()
                .zip(&p[1])
                .map(|(a, b)| a.total_cmp(b))
                .find(|o| o.is_ne());
            assert_eq!(ord, Some(std::cmp::Ordering::Less));
        }
    }

    #[test]
    fn smolyak_rejects_zero_dimension() {
        assert!(smolyak_grid(0, 2).is_err());
    }

    proptest! {
        #[test]
        fn gl_sums(m in 2usize..40) {
            let q = gauss_legendre_unit(m).unwrap();
            let s: f64 = q.weights().iter().sum();
            let mean: f64 = q.nodes().iter().zip(q.weights()).map(|(v, w)| v * w).sum();
            prop_assert!((s - 1.0).abs() < 1e-12);
            prop_assert!((mean - 0.5).abs() < 1e-12);
            prop_assert!(q.weights().iter().all(|&w| w > 0.0));
        }

        #[test]
        fn smolyak_multilinear(d in 1usize..=5, level in 1u32..=4, mask in 0u32..32) {
            let g = smolyak_grid(d, level).unwrap();
            let e: Vec<bool> = (0..d).map(|i| mask >> i & 1 == 1).collect();
            let val = g.integrate(|z| {
                z.iter().zip(&e).map(|(z, &on)| if on { *z } else { 1.0 }).product()
            });
            let exact = if e.iter().any(|&b| b) { 0.0 } else { 2f64.powi(d as i32) };
            prop_assert!((val - exact).abs() < 1e-10);
        }
    }
}
