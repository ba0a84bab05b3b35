//! Symmetric eigensolvers: a restarted Lanczos iteration with full
//! reorthogonalization for matrix-free operators, and dense helpers.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;

/// A real symmetric operator applied as `y = A x`.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Which {
    Largest,
    Smallest,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LanczosOptions {
    /// Ritz residual tolerance, relative to `max(1, |theta|)`.
    pub tol: f64,
    /// Cap on operator applications across restarts.
    pub max_iter: usize,
    /// Krylov dimension before an explicit restart.
    pub krylov_dim: usize,
    pub exec: Exec,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions {
            tol: 1e-10,
            max_iter: 100_000,
            krylov_dim: 60,
            exec: Exec::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EigPair {
    pub value: f64,
    pub vector: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

fn orthogonalize(w: &mut [f64], basis: &[Vec<f64>], exec: Exec) {
    for v in basis {
        let c = exec.dot(v, w);
        axpy(-c, v, w);
    }
}

fn orthogonalize_slices(w: &mut [f64], basis: &[&[f64]], exec: Exec) {
    for v in basis {
        let c = exec.dot(v, w);
        axpy(-c, v, w);
    }
}

/// Ritz values of `h` ordered best-first for `which`, with their vectors.
fn ritz_pairs(h: &DMatrix<f64>, which: Which) -> Vec<(f64, Vec<f64>)> {
    let eig = SymmetricEigen::new(h.clone());
    let mut order: Vec<usize> = (0..h.nrows()).collect();
    order.sort_by(|&a, &b| {
        let (x, y) = (eig.eigenvalues[a], eig.eigenvalues[b]);
        match which {
            Which::Largest => y.partial_cmp(&x).unwrap(),
            Which::Smallest => x.partial_cmp(&y).unwrap(),
        }
    });
    order
        .into_iter()
        .map(|i| (eig.eigenvalues[i], eig.eigenvectors.column(i).iter().copied().collect()))
        .collect()
}

fn combine(vs: &[Vec<f64>], s: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    for (c, v) in s.iter().zip(vs) {
        axpy(*c, v, &mut out);
    }
    out
}

/// Extremal eigenpair of `op` on the orthogonal complement of `deflate`
/// (orthonormal vectors), started from `start`.
///
/// Lanczos expansion with full reorthogonalization and thick restarts that
/// keep half the Ritz vectors. Convergence uses the true residual
/// `|A y - theta y|`. Returns value 0 with a zero vector when the start
/// vector has no component outside `deflate`.
pub fn lanczos(
    op: &dyn LinearOperator,
    start: &[f64],
    which: Which,
    deflate: &[&[f64]],
    opts: &LanczosOptions,
) -> Result<EigPair> {
    let n = op.dim();
    if start.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: start.len(),
        });
    }
    let exec = opts.exec;
    let m_cap = opts.krylov_dim.clamp(2, n.max(2));
    let mut v: Vec<Vec<f64>> = Vec::new();
    let mut av: Vec<Vec<f64>> = Vec::new();
    let mut h = DMatrix::<f64>::zeros(0, 0);
    let mut next = start.to_vec();
    let mut total = 0usize;
    loop {
        // expand by the next direction
        orthogonalize_slices(&mut next, deflate, exec);
        orthogonalize(&mut next, &v, exec);
        orthogonalize_slices(&mut next, deflate, exec);
        orthogonalize(&mut next, &v, exec);
        let norm = exec.dot(&next, &next).sqrt();
        let scale = h.diagonal().iter().fold(1.0f64, |m, x| m.max(x.abs()));
        let breakdown = norm < 1e-12 * scale || (v.is_empty() && norm < 1e-300);
        if breakdown && v.is_empty() {
            return Ok(EigPair { value: 0.0, vector: vec![0.0; n], iterations: total, residual: 0.0 });
        }
        if !breakdown {
            next.iter_mut().for_each(|x| *x /= norm);
            let mut w = vec![0.0; n];
            op.apply(&next, &mut w);
            total += 1;
            orthogonalize_slices(&mut w, deflate, exec);
            let m = v.len();
            let mut grown = DMatrix::<f64>::zeros(m + 1, m + 1);
            grown.view_mut((0, 0), (m, m)).copy_from(&h);
            for (i, vi) in v.iter().enumerate() {
                let c = exec.dot(vi, &w);
                grown[(i, m)] = c;
                grown[(m, i)] = c;
            }
            grown[(m, m)] = exec.dot(&next, &w);
            h = grown;
            v.push(std::mem::take(&mut next));
            av.push(w);
        }
        let m = v.len();
        let at_cap = m >= m_cap || m >= n;
        if !(breakdown || at_cap || m.is_multiple_of(4)) {
            next = av[m - 1].clone();
            continue;
        }
        let pairs = ritz_pairs(&h, which);
        let (theta, s) = &pairs[0];
        let y = combine(&v, s, n);
        let ay = combine(&av, s, n);
        let r: Vec<f64> = ay.iter().zip(&y).map(|(a, b)| a - theta * b).collect();
        let residual = exec.dot(&r, &r).sqrt();
        // a breakdown means the start vector spans an invariant subspace
        if residual <= opts.tol * theta.abs().max(1.0) || breakdown {
            return Ok(EigPair { value: *theta, vector: y, iterations: total, residual });
        }
        if total >= opts.max_iter {
            return Err(Error::Solver { iterations: total, residual });
        }
        if at_cap {
            let keep = (m / 2).max(1).min(pairs.len());
            let sv: Vec<Vec<f64>> = pairs[..keep].iter().map(|p| combine(&v, &p.1, n)).collect();
            let sav: Vec<Vec<f64>> = pairs[..keep].iter().map(|p| combine(&av, &p.1, n)).collect();
            v = sv;
            av = sav;
            h = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(keep, pairs[..keep].iter().map(|p| p.0)));
            next = r;
        } else {
            next = av[m - 1].clone();
        }
    }
}

/// All eigenvalues of a dense symmetric matrix, ascending.
pub fn dense_eigenvalues(m: DMatrix<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

/// Eigenvalues ascending with matching eigenvector columns.
pub fn dense_eigh(m: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |r, c| {
        eig.eigenvectors[(r, order[c])]
    });
    (vals, vecs)
}

/// Dense matrix of an operator, column by column.
pub fn to_dense(op: &dyn LinearOperator) -> DMatrix<f64> {
    let n = op.dim();
    let mut m = DMatrix::zeros(n, n);
    let mut e = vec![0.0; n];
    let mut col = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        op.apply(&e, &mut col);
        for i in 0..n {
            m[(i, j)] = col[i];
        }
        e[j] = 0.0;
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Diag(Vec<f64>);

    impl LinearOperator for Diag {
        fn dim(&self) -> usize {
            self.0.len()
        }
        fn apply(&self, x: &[f64], y: &mut [f64]) {
            for i in 0..x.len() {
                y[i] = self.0[i] * x[i];
            }
        }
    }

    struct Dense(DMatrix<f64>);

    impl LinearOperator for Dense {
        fn dim(&self) -> usize {
            self.0.nrows()
        }
        fn apply(&self, x: &[f64], y: &mut [f64]) {
            for i in 0..x.len() {
                y[i] = (0..x.len()).map(|j| self.0[(i, j)] * x[j]).sum();
            }
        }
    }

    #[test]
    fn diagonal_extremes() {
        let d = Diag((0..500).map(|i| (i as f64 * 0.7).sin()).collect());
        let start = vec![1.0; 500];
        let opts = LanczosOptions::default();
        let hi = lanczos(&d, &start, Which::Largest, &[], &opts).unwrap();
        let lo = lanczos(&d, &start, Which::Smallest, &[], &opts).unwrap();
        let max = d.0.iter().cloned().fold(f64::MIN, f64::max);
        let min = d.0.iter().cloned().fold(f64::MAX, f64::min);
        assert!((hi.value - max).abs() < 1e-9, "{} vs {max}", hi.value);
        assert!((lo.value - min).abs() < 1e-9);
    }

    #[test]
    fn deflation_skips_known_vector() {
        let d = Diag(vec![0.0, 0.5, 2.0, 3.0]);
        let e0 = [1.0, 0.0, 0.0, 0.0];
        let r = lanczos(&d, &[1.0; 4], Which::Smallest, &[&e0], &LanczosOptions::default()).unwrap();
        assert!((r.value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn matches_dense_on_random_symmetric() {
        let n = 60;
        let m = DMatrix::from_fn(n, n, |i, j| {
            let (a, b) = (i.min(j) as f64, i.max(j) as f64);
            ((a * 1.3 + b * 0.7).sin() * 3.0).round() / 3.0
        });
        let vals = dense_eigenvalues(m.clone());
        let op = Dense(m);
        let start: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * (i as f64).cos()).collect();
        let opts = LanczosOptions { krylov_dim: 20, ..Default::default() };
        let hi = lanczos(&op, &start, Which::Largest, &[], &opts).unwrap();
        assert!((hi.value - vals[n - 1]).abs() < 1e-8);
    }

    #[test]
    fn zero_start_in_deflated_space() {
        let d = Diag(vec![1.0, 2.0]);
        let e0 = [1.0, 0.0];
        let r = lanczos(&d, &[1.0, 0.0], Which::Largest, &[&e0], &LanczosOptions::default()).unwrap();
        assert_eq!(r.value, 0.0);
    }
}
