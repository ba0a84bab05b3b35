//! Two-site projectors, open and pinned Motzkin Hamiltonians, and their
//! imbalance-sector blocks.
//!
//! Local moves preserve `(p, q)` and the boundary term is diagonal in the
//! string basis, so every Hamiltonian here is block diagonal over sectors.
//! Operators act matrix-free on either the full `3^n` space (index = code)
//! or one sector (index = position in the sector's sorted code list); below
//! [`SPARSE_ASSEMBLY_LIMIT`] rows they are also assembled in CSR form.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::eigen::LinearOperator;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::walks::{self, Imbalance, Step, pow3, stats_of_code};

/// Operators with at most this many rows are stored explicitly.
pub const SPARSE_ASSEMBLY_LIMIT: usize = 20_000;

/// Longest chain with a full-space basis index.
pub const MAX_BASIS_LEN: usize = 14;

/// Eigenvalues below this count as zero.
pub const ZERO_EIGENVALUE_THRESHOLD: f64 = 1e-10;

/// The three rank-one projectors of one bond, as a 9x9 matrix over the
/// two-site basis `3 * s_left + s_right` (digits `0 < u < d`).
#[derive(Debug, Clone, PartialEq)]
pub struct LocalProjectorSet {
    pub t: f64,
    pub vectors: [[f64; 9]; 3],
    pub matrix: [[f64; 9]; 9],
}

const fn pair(a: Step, b: Step) -> usize {
    3 * a as usize + b as usize
}

impl LocalProjectorSet {
    pub fn new(t: f64) -> Result<Self> {
        check_t(t)?;
        use Step::*;
        let c = 1.0 / (1.0 + t * t).sqrt();
        let mut up = [0.0; 9];
        up[pair(Flat, Up)] = t * c;
        up[pair(Up, Flat)] = -c;
        let mut down = [0.0; 9];
        down[pair(Flat, Down)] = c;
        down[pair(Down, Flat)] = -t * c;
        let mut phi = [0.0; 9];
        phi[pair(Up, Down)] = c;
        phi[pair(Flat, Flat)] = -t * c;
        let vectors = [up, down, phi];
        let mut matrix = [[0.0; 9]; 9];
        for v in &vectors {
            for i in 0..9 {
                for j in 0..9 {
                    matrix[i][j] += v[i] * v[j];
                }
            }
        }
        Ok(LocalProjectorSet { t, vectors, matrix })
    }

    /// Nonzero entries of row `s`, as `(column, value)`.
    fn row(&self, s: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.matrix[s]
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(j, v)| (j, *v))
    }
}

fn check_t(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("area weight t must be positive, got {t}")))
    }
}

#[derive(Debug, Clone)]
pub struct Sector {
    pub class: Imbalance,
    pub codes: Vec<u64>,
}

/// Basis strings of length `n` grouped by `(p, q)`, with a reverse lookup.
#[derive(Debug, Clone)]
pub struct SectorBasis {
    n: usize,
    sectors: Vec<Sector>,
    /// For each code, the sector index and the position within it.
    lookup: Vec<(u32, u32)>,
}

impl SectorBasis {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_BASIS_LEN {
            return Err(Error::Resource {
                what: "sector basis length",
                value: n,
                limit: MAX_BASIS_LEN,
            });
        }
        let classes: Vec<Imbalance> = walks::all_classes(n).collect();
        let index_of = |c: Imbalance| c.p * (2 * n + 3 - c.p) / 2 + c.q;
        let mut sectors: Vec<Sector> = classes
            .iter()
            .map(|&class| Sector { class, codes: Vec::new() })
            .collect();
        let total = pow3(n);
        let mut lookup = Vec::with_capacity(total as usize);
        for code in 0..total {
            let s = index_of(stats_of_code(code, n).imbalance);
            lookup.push((s as u32, sectors[s].codes.len() as u32));
            sectors[s].codes.push(code);
        }
        Ok(SectorBasis { n, sectors, lookup })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sectors(&self) -> &[Sector] {
        &self.sectors
    }

    pub fn sector_index(&self, class: Imbalance) -> Option<usize> {
        if class.p + class.q > self.n {
            return None;
        }
        Some(class.p * (2 * self.n + 3 - class.p) / 2 + class.q)
    }

    pub fn sector(&self, class: Imbalance) -> Option<&Sector> {
        self.sector_index(class).map(|i| &self.sectors[i])
    }

    /// `(sector index, position)` of a code.
    #[inline]
    pub fn locate(&self, code: u64) -> (usize, usize) {
        let (s, i) = self.lookup[code as usize];
        (s as usize, i as usize)
    }

    pub fn total_dim(&self) -> usize {
        self.lookup.len()
    }
}

/// Index space an operator acts on.
#[derive(Debug, Clone)]
pub enum Domain {
    /// All `3^n` strings, indexed by code.
    Full { n: usize },
    /// One `(p, q)` sector.
    Sector { basis: Arc<SectorBasis>, sector: usize },
}

impl Domain {
    pub fn n(&self) -> usize {
        match self {
            Domain::Full { n } => *n,
            Domain::Sector { basis, .. } => basis.n(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Full { n } => pow3(*n) as usize,
            Domain::Sector { basis, sector } => basis.sectors()[*sector].codes.len(),
        }
    }

    #[inline]
    pub fn code(&self, index: usize) -> u64 {
        match self {
            Domain::Full { .. } => index as u64,
            Domain::Sector { basis, sector } => basis.sectors()[*sector].codes[index],
        }
    }

    #[inline]
    pub fn index(&self, code: u64) -> usize {
        match self {
            Domain::Full { .. } => code as usize,
            Domain::Sector { basis, sector } => {
                let (s, i) = basis.locate(code);
                debug_assert_eq!(s, *sector);
                i
            }
        }
    }

    /// Codes of the domain in index order.
    pub fn codes(&self) -> Vec<u64> {
        (0..self.dim()).map(|i| self.code(i)).collect()
    }

    pub fn sector_of(n: usize, class: Imbalance, basis: Option<Arc<SectorBasis>>) -> Result<Domain> {
        let basis = match basis {
            Some(b) if b.n() == n => b,
            _ => Arc::new(SectorBasis::new(n)?),
        };
        let sector = basis
            .sector_index(class)
            .ok_or(Error::InvalidClass { n, p: class.p, q: class.q })?;
        Ok(Domain::Sector { basis, sector })
    }
}

#[derive(Debug, Clone)]
struct Csr {
    offsets: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

/// Sum of bond projectors over a range of bonds, plus optional pinning terms.
#[derive(Debug, Clone)]
pub struct MotzkinHamiltonian {
    n: usize,
    t: f64,
    local: LocalProjectorSet,
    /// 0-based first sites of the bonds `(j, j+1)` that are present.
    bonds: std::ops::Range<usize>,
    pinned: bool,
    domain: Domain,
    exec: Exec,
    csr: Option<Csr>,
}

impl MotzkinHamiltonian {
    /// Bonds joining sites `first..=last` (1-based), acting on chain length `n`.
    pub fn new(
        n: usize,
        t: f64,
        first: usize,
        last: usize,
        pinned: bool,
        domain: Domain,
    ) -> Result<Self> {
        check_t(t)?;
        if n < 2 {
            return Err(Error::Domain(format!("chain length must be at least 2, got {n}")));
        }
        if first < 1 || last > n || first > last {
            return Err(Error::Domain(format!("bad site interval [{first},{last}] for n={n}")));
        }
        if domain.n() != n {
            return Err(Error::DimensionMismatch { expected: n, got: domain.n() });
        }
        if matches!(domain, Domain::Full { .. }) && n > MAX_BASIS_LEN {
            return Err(Error::Resource {
                what: "full-space chain length",
                value: n,
                limit: MAX_BASIS_LEN,
            });
        }
        let mut h = MotzkinHamiltonian {
            n,
            t,
            local: LocalProjectorSet::new(t)?,
            bonds: (first - 1)..(last - 1),
            pinned,
            domain,
            exec: Exec::default(),
            csr: None,
        };
        if h.dim() <= SPARSE_ASSEMBLY_LIMIT {
            h.assemble();
        }
        Ok(h)
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    /// Drop explicit storage so `apply` runs matrix-free.
    pub fn matrix_free(mut self) -> Self {
        self.csr = None;
        self
    }

    pub fn is_assembled(&self) -> bool {
        self.csr.is_some()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    /// Row `i` as unmerged `(column, value)` contributions.
    fn for_each_in_row(&self, i: usize, mut f: impl FnMut(usize, f64)) {
        let n = self.n;
        let code = self.domain.code(i);
        for j in self.bonds.clone() {
            let wl = pow3(n - 1 - j);
            let wr = pow3(n - 2 - j);
            let a = (code / wl) % 3;
            let b = (code / wr) % 3;
            let s = (3 * a + b) as usize;
            let base = code - a * wl - b * wr;
            for (s2, v) in self.local.row(s) {
                let c2 = base + (s2 / 3) as u64 * wl + (s2 % 3) as u64 * wr;
                f(self.domain.index(c2), v);
            }
        }
        if self.pinned {
            let mut diag = 0.0;
            if walks::digit_at(code, n, 0) == Step::Down as u8 {
                diag += 1.0;
            }
            if walks::digit_at(code, n, n - 1) == Step::Up as u8 {
                diag += 1.0;
            }
            if diag != 0.0 {
                f(i, diag);
            }
        }
    }

    fn assemble(&mut self) {
        let dim = self.dim();
        let mut offsets = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        offsets.push(0);
        let mut row: Vec<(usize, f64)> = Vec::new();
        for i in 0..dim {
            row.clear();
            self.for_each_in_row(i, |c, v| row.push((c, v)));
            row.sort_by_key(|e| e.0);
            let mut k = 0;
            while k < row.len() {
                let c = row[k].0;
                let mut v = 0.0;
                while k < row.len() && row[k].0 == c {
                    v += row[k].1;
                    k += 1;
                }
                cols.push(c as u32);
                vals.push(v);
            }
            offsets.push(cols.len());
        }
        self.csr = Some(Csr { offsets, cols, vals });
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let dim = self.dim();
        let mut m = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            self.for_each_in_row(i, |c, v| m[(i, c)] += v);
        }
        m
    }

    /// `<x, H x>`.
    pub fn expectation(&self, x: &[f64]) -> f64 {
        let mut y = vec![0.0; x.len()];
        self.apply(x, &mut y);
        self.exec.dot(x, &y)
    }
}

impl LinearOperator for MotzkinHamiltonian {
    fn dim(&self) -> usize {
        self.domain.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.dim());
        assert_eq!(y.len(), self.dim());
        match &self.csr {
            Some(csr) => self.exec.fill(y, |i| {
                (csr.offsets[i]..csr.offsets[i + 1])
                    .map(|k| csr.vals[k] * x[csr.cols[k] as usize])
                    .sum()
            }),
            None => self.exec.fill(y, |i| {
                let mut acc = 0.0;
                self.for_each_in_row(i, |c, v| acc += v * x[c]);
                acc
            }),
        }
    }
}

fn domain_for(n: usize, sector: Option<Imbalance>) -> Result<Domain> {
    match sector {
        None => Ok(Domain::Full { n }),
        Some(c) => Domain::sector_of(n, c, None),
    }
}

/// Open-boundary Hamiltonian `sum_j Pi_{j,j+1}(t)`, optionally on one sector.
pub fn build_open(n: usize, t: f64, sector: Option<Imbalance>) -> Result<MotzkinHamiltonian> {
    check_t(t)?;
    MotzkinHamiltonian::new(n, t, 1, n.max(1), false, domain_for(n, sector)?)
}

/// Open Hamiltonian plus `|d><d|_1 + |u><u|_n`.
pub fn build_pinned(n: usize, t: f64, sector: Option<Imbalance>) -> Result<MotzkinHamiltonian> {
    check_t(t)?;
    MotzkinHamiltonian::new(n, t, 1, n.max(1), true, domain_for(n, sector)?)
}

/// Bonds inside sites `first..=last` (1-based) only, on an `n`-site chain.
pub fn build_interval(n: usize, first: usize, last: usize, t: f64) -> Result<MotzkinHamiltonian> {
    MotzkinHamiltonian::new(n, t, first, last, false, Domain::Full { n })
}

/// The `2k`-site open block whose gap enters the finite-size criterion.
pub fn build_knabe_block(k: usize, t: f64) -> Result<MotzkinHamiltonian> {
    if k == 0 {
        return Err(Error::Domain("block size k must be at least 1".into()));
    }
    build_open(2 * k, t, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::dense_eigenvalues;

    #[test]
    fn local_projectors_are_orthogonal_projectors() {
        for t in [0.1, 0.5, 1.0, 2.3] {
            let l = LocalProjectorSet::new(t).unwrap();
            for a in 0..3 {
                for b in 0..3 {
                    let d: f64 = (0..9).map(|i| l.vectors[a][i] * l.vectors[b][i]).sum();
                    let expect = if a == b { 1.0 } else { 0.0 };
                    assert!((d - expect).abs() < 1e-14);
                }
            }
            let m = DMatrix::from_fn(9, 9, |i, j| l.matrix[i][j]);
            let sq = &m * &m;
            assert!((sq - &m).abs().max() < 1e-14);
            for v in dense_eigenvalues(m) {
                assert!(v.abs() < 1e-12 || (v - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_bad_t() {
        assert!(build_open(3, 0.0, None).is_err());
        assert!(build_open(3, -1.0, None).is_err());
        assert!(LocalProjectorSet::new(f64::NAN).is_err());
    }

    #[test]
    fn two_site_spectrum() {
        let h = build_open(2, 0.7, None).unwrap();
        let v = dense_eigenvalues(h.to_dense());
        assert_eq!(v.iter().filter(|x| x.abs() < 1e-12).count(), 6);
        assert_eq!(v.iter().filter(|x| (*x - 1.0).abs() < 1e-12).count(), 3);
    }

    #[test]
    fn knabe_block_k1_is_two_site_open() {
        let a = build_knabe_block(1, 0.4).unwrap().to_dense();
        let b = build_open(2, 0.4, None).unwrap().to_dense();
        assert_eq!(a, b);
    }

    #[test]
    fn sector_basis_partitions() {
        for n in 1..=7 {
            let b = SectorBasis::new(n).unwrap();
            let total: usize = b.sectors().iter().map(|s| s.codes.len()).sum();
            assert_eq!(total as u64, pow3(n));
            for code in 0..pow3(n) {
                let (s, i) = b.locate(code);
                assert_eq!(b.sectors()[s].codes[i], code);
            }
        }
        assert!(SectorBasis::new(MAX_BASIS_LEN + 1).is_err());
    }

    #[test]
    fn block_diagonal_over_sectors() {
        for n in 2..=7 {
            let h = build_open(n, 0.6, None).unwrap();
            for i in 0..h.dim() {
                let ci = stats_of_code(i as u64, n).imbalance;
                h.for_each_in_row(i, |j, v| {
                    if v != 0.0 {
                        assert_eq!(stats_of_code(j as u64, n).imbalance, ci);
                    }
                });
            }
        }
    }

    #[test]
    fn matrix_free_matches_assembled() {
        let h = build_pinned(6, 0.45, None).unwrap();
        assert!(h.is_assembled());
        let free = h.clone().matrix_free();
        let x: Vec<f64> = (0..h.dim()).map(|i| ((i * 7919) % 113) as f64 - 50.0).collect();
        let mut y1 = vec![0.0; x.len()];
        let mut y2 = vec![0.0; x.len()];
        h.apply(&x, &mut y1);
        free.apply(&x, &mut y2);
        for (a, b) in y1.iter().zip(&y2) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn symmetric_on_probes() {
        let h = build_open(6, 0.8, Some(Imbalance::new(1, 1))).unwrap();
        let n = h.dim();
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.91).sin()).collect();
        let y: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).cos()).collect();
        let mut hx = vec![0.0; n];
        let mut hy = vec![0.0; n];
        h.apply(&x, &mut hx);
        h.apply(&y, &mut hy);
        let a: f64 = x.iter().zip(&hy).map(|(a, b)| a * b).sum();
        let b: f64 = hx.iter().zip(&y).map(|(a, b)| a * b).sum();
        assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn boundary_term_on_all_up() {
        let n = 5;
        let h = build_pinned(n, 0.5, None).unwrap();
        let h0 = build_open(n, 0.5, None).unwrap();
        let all_up = "uuuuu".parse::<walks::WalkString>().unwrap().code() as usize;
        let mut x = vec![0.0; h.dim()];
        x[all_up] = 1.0;
        let mut y = vec![0.0; h.dim()];
        let mut y0 = vec![0.0; h.dim()];
        h.apply(&x, &mut y);
        h0.apply(&x, &mut y0);
        let diff: Vec<f64> = y.iter().zip(&y0).map(|(a, b)| a - b).collect();
        for (i, d) in diff.iter().enumerate() {
            let expect = if i == all_up { 1.0 } else { 0.0 };
            assert!((d - expect).abs() < 1e-15);
        }
    }
}
