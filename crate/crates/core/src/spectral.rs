//! Graph Laplacians and their low spectrum on the complement of the all-ones vector.
//!
//! Below [`DENSE_LIMIT`] vertices the spectrum comes from a dense symmetric
//! eigensolve of `L + s·J/n`, where the shift `s` moves the all-ones direction
//! above every other eigenvalue. Larger instances use Lanczos with full
//! reorthogonalization against the Krylov basis and the all-ones vector.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::graph::{DemandGraph, WeightedGraph};

pub const DENSE_LIMIT: usize = 512;

/// Sparse weighted Laplacian `L = D - A`.
#[derive(Clone, Debug)]
pub struct Laplacian {
    n: usize,
    diag: Vec<f64>,
    /// Off-diagonal weights `(x, y, w)` with `x < y`; each pair appears once.
    off: Vec<(usize, usize, f64)>,
}

impl Laplacian {
    /// Accumulates weighted pairs; repeated pairs add up.
    pub fn from_pairs(n: usize, pairs: impl IntoIterator<Item = (usize, usize, f64)>) -> Self {
        let mut acc = std::collections::BTreeMap::new();
        for (x, y, w) in pairs {
            debug_assert!(x != y);
            *acc.entry((x.min(y), x.max(y))).or_insert(0.0) += w;
        }
        let mut diag = vec![0.0; n];
        let mut off = Vec::with_capacity(acc.len());
        for ((x, y), w) in acc {
            diag[x] += w;
            diag[y] += w;
            off.push((x, y, w));
        }
        Laplacian { n, diag, off }
    }

    pub fn of_graph(g: &WeightedGraph) -> Self {
        Self::from_pairs(g.n(), g.edges().iter().map(|e| (e.u, e.v, e.w)))
    }

    pub fn of_demands(d: &DemandGraph) -> Self {
        Self::from_pairs(d.n(), d.pairs())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `y = L x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y: Vec<f64> = self.diag.iter().zip(x).map(|(d, v)| d * v).collect();
        for &(a, b, w) in &self.off {
            y[a] -= w * x[b];
            y[b] -= w * x[a];
        }
        y
    }

    /// `xᵀ L x = Σ_{a<b} w_ab (x_a - x_b)²`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        self.off.iter().map(|&(a, b, w)| w * (x[a] - x[b]).powi(2)).sum()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for (i, &d) in self.diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        for &(a, b, w) in &self.off {
            m[(a, b)] -= w;
            m[(b, a)] -= w;
        }
        m
    }

    fn max_degree(&self) -> f64 {
        self.diag.iter().copied().fold(0.0, f64::max)
    }
}

/// An eigenvalue with a unit eigenvector orthogonal to the all-ones vector.
#[derive(Clone, Debug)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<f64>,
}

/// Second smallest Laplacian eigenvalue, within additive `tol`.
pub fn lambda2(l: &Laplacian, tol: f64) -> Result<f64> {
    Ok(bottom_eigenpairs(l, 1, tol)?[0].value)
}

/// `λ₂` together with a unit Fiedler vector.
pub fn fiedler(l: &Laplacian, tol: f64) -> Result<EigenPair> {
    Ok(bottom_eigenpairs(l, 1, tol)?.swap_remove(0))
}

/// The `k` smallest eigenpairs of `L` restricted to the subspace orthogonal
/// to the all-ones vector, ascending. Eigenvector signs are fixed so the first
/// clearly nonzero entry is positive.
pub fn bottom_eigenpairs(l: &Laplacian, k: usize, tol: f64) -> Result<Vec<EigenPair>> {
    if l.n < 2 {
        return Err(Error::Parameter("spectrum needs at least two vertices".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::Parameter(format!("tolerance {tol} must be positive")));
    }
    let k = k.clamp(1, l.n - 1);
    let mut pairs = if l.n <= DENSE_LIMIT { dense_bottom(l, k) } else { lanczos_bottom(l, k, tol)? };
    for p in &mut pairs {
        fix_sign(&mut p.vector);
    }
    Ok(pairs)
}

fn fix_sign(v: &mut [f64]) {
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-9 * scale.max(1e-300)) {
        if *first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

fn dense_bottom(l: &Laplacian, k: usize) -> Vec<EigenPair> {
    let n = l.n;
    let shift = 4.0 * l.max_degree() + 1.0;
    let mut m = l.to_dense();
    m.add_scalar_mut(shift / n as f64);
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
    order
        .into_iter()
        .take(k)
        .map(|i| EigenPair {
            value: eig.eigenvalues[i].max(0.0),
            vector: eig.eigenvectors.column(i).iter().copied().collect(),
        })
        .collect()
}

fn project_out_ones(v: &mut [f64]) {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= mean);
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

fn lanczos_bottom(l: &Laplacian, k: usize, tol: f64) -> Result<Vec<EigenPair>> {
    let n = l.n;
    let max_steps = n - 1;
    let mut steps = (8 * k + 80).min(max_steps);
    // Deterministic, generic start vector.
    let mut start: Vec<f64> = (0..n).map(|i| ((i as f64 + 1.0) * 0.618_033_988_75).fract() - 0.5).collect();
    let mut best = f64::NAN;
    let mut iterations = 0;
    for _restart in 0..8 {
        project_out_ones(&mut start);
        normalize(&mut start);
        let mut basis: Vec<Vec<f64>> = vec![start.clone()];
        let mut alpha = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        for j in 0..steps {
            iterations += 1;
            let mut w = l.apply(&basis[j]);
            let a: f64 = w.iter().zip(&basis[j]).map(|(x, y)| x * y).sum();
            alpha.push(a);
            // Full reorthogonalization, twice for stability.
            for _ in 0..2 {
                project_out_ones(&mut w);
                for q in &basis {
                    let c: f64 = w.iter().zip(q).map(|(x, y)| x * y).sum();
                    w.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
                }
            }
            let b = normalize(&mut w);
            if j + 1 == steps || b < 1e-12 {
                break;
            }
            beta.push(b);
            basis.push(w);
        }
        let m = alpha.len();
        let mut t = DMatrix::zeros(m, m);
        for i in 0..m {
            t[(i, i)] = alpha[i];
            if i + 1 < m {
                t[(i, i + 1)] = beta[i];
                t[(i + 1, i)] = beta[i];
            }
        }
        let eig = SymmetricEigen::new(t);
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let kk = k.min(m);
        let mut pairs = Vec::with_capacity(kk);
        let mut worst_residual: f64 = 0.0;
        for &i in order.iter().take(kk) {
            let s = eig.eigenvectors.column(i);
            let mut v = vec![0.0; n];
            for (j, q) in basis.iter().enumerate().take(m) {
                v.iter_mut().zip(q).for_each(|(x, y)| *x += s[j] * y);
            }
            project_out_ones(&mut v);
            normalize(&mut v);
            let lv = l.apply(&v);
            let theta: f64 = lv.iter().zip(&v).map(|(x, y)| x * y).sum();
            let res = lv.iter().zip(&v).map(|(a, b)| (a - theta * b).powi(2)).sum::<f64>().sqrt();
            worst_residual = worst_residual.max(res);
            pairs.push(EigenPair { value: theta.max(0.0), vector: v });
        }
        best = pairs[0].value;
        // Residual bounds the eigenvalue error for symmetric operators.
        if kk == k && (worst_residual <= tol || m >= max_steps) {
            return Ok(pairs);
        }
        start = vec![0.0; n];
        for p in &pairs {
            start.iter_mut().zip(&p.vector).for_each(|(x, y)| *x += y);
        }
        steps = (steps * 2).min(max_steps);
    }
    Err(Error::Numeric { iterations, estimate: best })
}

/// Dense `n×n` matrix of a vector family's Gram products, used by callers that
/// need Rayleigh quotients of several columns at once.
pub fn rayleigh(l: &Laplacian, x: &[f64]) -> f64 {
    let denom: f64 = x.iter().map(|v| v * v).sum();
    l.quadratic_form(x) / denom
}

pub fn to_dvector(x: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complete(n: usize) -> WeightedGraph {
        let mut e = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                e.push((a, b, 1.0));
            }
        }
        WeightedGraph::new(n, e).unwrap()
    }

    #[test]
    fn known_spectra() {
        for n in [2usize, 3, 5, 16, 64] {
            let l2 = lambda2(&Laplacian::of_graph(&complete(n)), 1e-9).unwrap();
            assert!((l2 - n as f64).abs() < 1e-9, "K_{n}: {l2}");
        }
        let c4 = WeightedGraph::new(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)]).unwrap();
        assert!((lambda2(&Laplacian::of_graph(&c4), 1e-9).unwrap() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn disconnected_graph_has_zero_lambda2() {
        let g = WeightedGraph::new(6, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0), (3, 4, 1.0), (4, 5, 1.0), (3, 5, 1.0)])
            .unwrap();
        let p = fiedler(&Laplacian::of_graph(&g), 1e-9).unwrap();
        assert!(p.value < 1e-9);
        // The Fiedler vector separates the two triangles.
        assert!(p.vector[0] * p.vector[3] < 0.0);
        assert!(p.vector.iter().sum::<f64>().abs() < 1e-9);
    }

    #[test]
    fn lanczos_matches_dense() {
        // Cycle plus chords on 600 vertices exercises the iterative path.
        let n = 600;
        let mut e: Vec<(usize, usize, f64)> = (0..n).map(|i| (i, (i + 1) % n, 1.0)).collect();
        for i in (0..n).step_by(7) {
            e.push((i, (i + n / 2 + 3) % n, 0.5));
        }
        let g = WeightedGraph::new(n, e).unwrap();
        let l = Laplacian::of_graph(&g);
        let iterative = bottom_eigenpairs(&l, 3, 1e-8).unwrap();
        let dense = dense_bottom(&l, 3);
        for (a, b) in iterative.iter().zip(&dense) {
            assert!((a.value - b.value).abs() < 1e-6, "{} vs {}", a.value, b.value);
        }
    }
}
