//! Dense reference computations for small chains.
//!
//! Everything here is built from Kronecker products of the two-site terms and
//! numerical nullspaces, independent of the combinatorial ground states and
//! the sector machinery. Sizes are limited to `n <= 8`.

use nalgebra::DMatrix;

use crate::eigen::dense_eigh;
use crate::error::{Error, Result};

/// Largest chain length the dense oracle accepts.
pub const ORACLE_MAX_N: usize = 8;

/// Eigenvalues below this count as kernel in the oracle.
pub const ORACLE_KERNEL_TOL: f64 = 1e-9;

// single-site basis order: 0, u, d
const Z: usize = 0;
const U: usize = 1;
const D: usize = 2;

fn check(n: usize, t: f64) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("area weight t must be positive, got {t}")));
    }
    if n == 0 || n > ORACLE_MAX_N {
        return Err(Error::Resource { what: "oracle chain length", value: n, limit: ORACLE_MAX_N });
    }
    Ok(())
}

/// Two-site term `|U><U| + |D><D| + |phi><phi|` as a 9x9 matrix.
pub fn two_site_term(t: f64) -> DMatrix<f64> {
    let c = 1.0 / (1.0 + t * t).sqrt();
    let pair = |a: usize, b: usize| 3 * a + b;
    let mut vecs = [[0.0; 9]; 3];
    vecs[0][pair(Z, U)] = t * c;
    vecs[0][pair(U, Z)] = -c;
    vecs[1][pair(Z, D)] = c;
    vecs[1][pair(D, Z)] = -t * c;
    vecs[2][pair(U, D)] = c;
    vecs[2][pair(Z, Z)] = -t * c;
    DMatrix::from_fn(9, 9, |i, j| vecs.iter().map(|v| v[i] * v[j]).sum())
}

fn embed(op: &DMatrix<f64>, left_sites: usize, right_sites: usize) -> DMatrix<f64> {
    let l = DMatrix::<f64>::identity(3usize.pow(left_sites as u32), 3usize.pow(left_sites as u32));
    let r = DMatrix::<f64>::identity(3usize.pow(right_sites as u32), 3usize.pow(right_sites as u32));
    l.kronecker(op).kronecker(&r)
}

/// `sum_{j=first}^{last-1} h_{j,j+1}` on `n` sites (1-based interval).
pub fn dense_open_hamiltonian(n: usize, t: f64, first: usize, last: usize) -> Result<DMatrix<f64>> {
    check(n, t)?;
    if first < 1 || last > n || first > last {
        return Err(Error::Domain(format!("bad interval [{first},{last}] for n={n}")));
    }
    let h = two_site_term(t);
    let dim = 3usize.pow(n as u32);
    let mut m = DMatrix::zeros(dim, dim);
    for j in first..last {
        m += embed(&h, j - 1, n - j - 1);
    }
    Ok(m)
}

/// `|d><d|_1 + |u><u|_n`.
pub fn dense_boundary(n: usize) -> Result<DMatrix<f64>> {
    check(n, 0.5)?;
    let mut dd = DMatrix::zeros(3, 3);
    dd[(D, D)] = 1.0;
    let mut uu = DMatrix::zeros(3, 3);
    uu[(U, U)] = 1.0;
    Ok(embed(&dd, 0, n - 1) + embed(&uu, n - 1, 0))
}

/// Orthogonal projector onto the numerical kernel of a PSD matrix.
pub fn kernel_projector(m: &DMatrix<f64>) -> DMatrix<f64> {
    let (vals, vecs) = dense_eigh(m.clone());
    let k = vals.iter().take_while(|&&v| v < ORACLE_KERNEL_TOL).count();
    let v = vecs.columns(0, k);
    v * v.transpose()
}

/// `G_[a,b]` as the kernel projector of the interval Hamiltonian.
pub fn dense_ground_projector(n: usize, a: usize, b: usize, t: f64) -> Result<DMatrix<f64>> {
    if a == b {
        check(n, t)?;
        let dim = 3usize.pow(n as u32);
        return Ok(DMatrix::identity(dim, dim));
    }
    Ok(kernel_projector(&dense_open_hamiltonian(n, t, a, b)?))
}

/// `|| G_[k+1,3k] G_[1,2k] - G_[1,3k] ||` from dense projectors and an SVD.
pub fn dense_zk(k: usize, t: f64) -> Result<f64> {
    let n = 3 * k;
    let right = dense_ground_projector(n, k + 1, n, t)?;
    let left = dense_ground_projector(n, 1, 2 * k, t)?;
    let full = dense_ground_projector(n, 1, n, t)?;
    let m = &right * &left - &full;
    Ok(m.singular_values().iter().cloned().fold(0.0, f64::max))
}

/// Smallest eigenvalue above the kernel threshold.
pub fn dense_gap(m: &DMatrix<f64>) -> f64 {
    let (vals, _) = dense_eigh(m.clone());
    vals.into_iter()
        .find(|&v| v > ORACLE_KERNEL_TOL)
        .unwrap_or(f64::INFINITY)
}

/// Kernel dimension of a PSD matrix.
pub fn kernel_dim(m: &DMatrix<f64>) -> usize {
    let (vals, _) = dense_eigh(m.clone());
    vals.iter().filter(|&&v| v < ORACLE_KERNEL_TOL).count()
}
