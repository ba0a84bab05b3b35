//! Finite-size gap criterion: `z_k`, the block gap `gamma_k`, the boundary
//! penalty, and the open and pinned gap bounds assembled into a certificate.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::eigen::{dense_eigenvalues, lanczos, to_dense, LanczosOptions, LinearOperator, Which};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::groundspace::{ground_vector, CompiledProjector, EkOperator, IntervalProjector};
use crate::hamiltonian::{Domain, MotzkinHamiltonian, SectorBasis, ZERO_EIGENVALUE_THRESHOLD};
use crate::normtable::FloatNormTable;
use crate::walks::{check_enumerable, pow3, stats_of_code, Imbalance};

/// Sectors up to this dimension are diagonalized densely.
pub const DENSE_SECTOR_LIMIT: usize = 300;

/// Sector values within this of the current extremum keep the earlier
/// sector, so mirror-image sectors report a stable argmax.
const ARGMAX_TIE: f64 = 1e-12;

/// Default largest chain length used for the empirical penalty constant.
pub const DEFAULT_PENALTY_N: usize = 10;

/// Tolerance on the golden-section bracket for the pinned bound.
pub const GOLDEN_TOL: f64 = 1e-10;

fn check_unit_t(t: f64) -> Result<()> {
    if t > 0.0 && t < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("certificate operations need 0 < t < 1, got {t}")))
    }
}

/// Deterministic second start vector, used alongside the all-ones vector.
fn perturbed_start(dim: usize) -> Vec<f64> {
    (0..dim).map(|i| 1.0 + 0.5 * ((i as f64 + 1.0) * 0.618_033_988_75).sin()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverStats {
    pub tol: f64,
    /// Operator applications summed over all sectors and starts.
    pub iters: usize,
    /// Largest final residual among Lanczos runs.
    pub max_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectorValue {
    pub class: Imbalance,
    pub dim: usize,
    pub value: f64,
    pub iterations: usize,
    pub residual: f64,
}

/// Extremal eigenvalue of a symmetric operator, dense for small sizes and
/// otherwise Lanczos from two fixed starts.
fn extremal(
    op: &dyn LinearOperator,
    which: Which,
    deflate: &[&[f64]],
    opts: &LanczosOptions,
) -> Result<(f64, usize, f64)> {
    let dim = op.dim();
    if dim <= DENSE_SECTOR_LIMIT {
        let mut m = to_dense(op);
        for v in deflate {
            // restrict to the complement: P A P with the deflated directions sent far away
            let shift = match which {
                Which::Largest => -1e3,
                Which::Smallest => 1e3,
            };
            for i in 0..dim {
                for j in 0..dim {
                    m[(i, j)] += shift * v[i] * v[j];
                }
            }
        }
        let vals = dense_eigenvalues(m);
        let value = match which {
            Which::Largest => vals[dim - 1],
            Which::Smallest => vals[0],
        };
        return Ok((value, 0, 0.0));
    }
    let a = lanczos(op, &vec![1.0; dim], which, deflate, opts)?;
    let b = lanczos(op, &perturbed_start(dim), which, deflate, opts)?;
    let value = match which {
        Which::Largest => a.value.max(b.value),
        Which::Smallest => a.value.min(b.value),
    };
    Ok((value, a.iterations + b.iterations, a.residual.max(b.residual)))
}

fn summarize(sectors: &[SectorValue], opts: &LanczosOptions) -> SolverStats {
    SolverStats {
        tol: opts.tol,
        iters: sectors.iter().map(|s| s.iterations).sum(),
        max_residual: sectors.iter().map(|s| s.residual).fold(0.0, f64::max),
    }
}

/// `E_k G_[k+1,3k] E_k` on one sector.
struct CriterionOperator {
    e: EkOperator,
    g: CompiledProjector,
}

impl LinearOperator for CriterionOperator {
    fn dim(&self) -> usize {
        self.g.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let mut a = vec![0.0; x.len()];
        self.e.apply(x, &mut a);
        self.g.apply(&a, y);
        self.e.apply(y, &mut a);
        y.copy_from_slice(&a);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZkReport {
    pub k: usize,
    pub t: f64,
    pub z_k: f64,
    /// Sector attaining the maximum.
    pub argmax: Imbalance,
    /// `sqrt` of the largest eigenvalue per sector.
    pub sectors: Vec<SectorValue>,
    pub solver: SolverStats,
}

/// `z_k = || G_[k+1,3k] E_k ||`, maximized over the `(p, q)` sectors of the
/// `3k`-site chain.
pub fn compute_zk(k: usize, t: f64, opts: &LanczosOptions) -> Result<ZkReport> {
    check_unit_t(t)?;
    if k == 0 {
        return Err(Error::Domain("k must be at least 1".into()));
    }
    let n = 3 * k;
    let basis = Arc::new(SectorBasis::new(n)?);
    let short = IntervalProjector::new(n, 1, 2 * k, t)?;
    let full = IntervalProjector::new(n, 1, n, t)?;
    let right = IntervalProjector::new(n, k + 1, n, t)?;
    let indices: Vec<usize> = (0..basis.sectors().len()).collect();
    let inner = LanczosOptions { exec: Exec::Sequential, ..*opts };
    let results = opts.exec.map(&indices, |&s| -> Result<SectorValue> {
        let domain = Domain::Sector { basis: basis.clone(), sector: s };
        let op = CriterionOperator {
            e: EkOperator::from_projectors(k, &short, &full, &domain)?,
            g: right.compile(&domain),
        };
        let (value, iterations, residual) = extremal(&op, Which::Largest, &[], &inner)?;
        Ok(SectorValue {
            class: basis.sectors()[s].class,
            dim: domain.dim(),
            value: value.clamp(0.0, 1.0).sqrt(),
            iterations,
            residual,
        })
    });
    let sectors: Vec<SectorValue> = results.into_iter().collect::<Result<_>>()?;
    let best = sectors
        .iter()
        .fold(&sectors[0], |b, s| if s.value > b.value + ARGMAX_TIE { s } else { b });
    Ok(ZkReport {
        k,
        t,
        z_k: best.value,
        argmax: best.class,
        solver: summarize(&sectors, opts),
        sectors,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaReport {
    pub k: usize,
    pub t: f64,
    pub gamma_k: f64,
    pub argmin: Imbalance,
    /// Smallest eigenvalue above the sector ground state, per sector of dimension > 1.
    pub sectors: Vec<SectorValue>,
    pub solver: SolverStats,
}

/// Smallest nonzero eigenvalue of the `2k`-site open chain. Each sector's
/// kernel is the single combinatorial ground vector, which is deflated.
pub fn compute_gamma_k(k: usize, t: f64, opts: &LanczosOptions) -> Result<GammaReport> {
    check_unit_t(t)?;
    if k == 0 {
        return Err(Error::Domain("k must be at least 1".into()));
    }
    let n = 2 * k;
    let basis = Arc::new(SectorBasis::new(n)?);
    let indices: Vec<usize> = (0..basis.sectors().len())
        .filter(|&s| basis.sectors()[s].codes.len() > 1)
        .collect();
    let inner = LanczosOptions { exec: Exec::Sequential, ..*opts };
    let results = opts.exec.map(&indices, |&s| -> Result<SectorValue> {
        let class = basis.sectors()[s].class;
        let domain = Domain::Sector { basis: basis.clone(), sector: s };
        let gs = ground_vector(n, class.p, class.q, t)?.state.to_domain(&domain);
        let h = MotzkinHamiltonian::new(n, t, 1, n, false, domain)?.with_exec(inner.exec);
        let (value, iterations, residual) = extremal(&h, Which::Smallest, &[&gs], &inner)?;
        Ok(SectorValue { class, dim: h.dim(), value, iterations, residual })
    });
    let sectors: Vec<SectorValue> = results.into_iter().collect::<Result<_>>()?;
    let best = sectors
        .iter()
        .fold(&sectors[0], |b, s| if s.value < b.value - ARGMAX_TIE { s } else { b });
    if best.value <= 0.0 {
        return Err(Error::Solver { iterations: best.iterations, residual: best.residual });
    }
    Ok(GammaReport {
        k,
        t,
        gamma_k: best.value,
        argmin: best.class,
        solver: summarize(&sectors, opts),
        sectors,
    })
}

/// `gamma_k (1/2 - z_k)` when `z_k < 1/2`.
pub fn open_gap_bound(gamma_k: f64, z_k: f64) -> Option<f64> {
    (z_k < 0.5).then_some(gamma_k * (0.5 - z_k))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PenaltyReport {
    pub n: usize,
    pub t: f64,
    /// `<GS_{p,q}| Pi_bdry |GS_{p,q}>` for every `(p, q) != (0, 0)`.
    pub sectors: Vec<(Imbalance, f64)>,
    pub minimum: f64,
    pub argmin: Imbalance,
    /// `N^{n-1}_{0,0} / N^n_{1,0}`.
    pub ratio: f64,
    /// `t N^{n-1}_{0,0} / N^n_{1,0}`, the exact `(1,0)` expectation in the
    /// minimal-area convention.
    pub ratio_times_t: f64,
}

/// `N^{n-1}_{0,0} / N^n_{1,0}` from the recursion, for `n <= table.kmax()`.
pub fn penalty_ratio(table: &FloatNormTable, n: usize) -> Result<f64> {
    if n == 0 || n > table.kmax() {
        return Err(Error::Domain(format!("penalty ratio needs 1 <= n <= {}", table.kmax())));
    }
    let num = if n == 1 { 1.0 } else { table.n(n - 1, 0, 0) };
    Ok(num / table.n(n, 1, 0))
}

/// Boundary-penalty expectations of all raised ground states, by enumeration.
///
/// `Pi_bdry = |d><d|_1 + |u><u|_n` is diagonal in the string basis and the
/// ground vectors have disjoint supports, so its compression onto the raised
/// ground space is diagonal with these entries.
pub fn boundary_penalty(n: usize, t: f64) -> Result<PenaltyReport> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("area weight t must be positive, got {t}")));
    }
    check_enumerable(n)?;
    if n == 0 {
        return Err(Error::Domain("n must be at least 1".into()));
    }
    let classes = (n + 1) * (n + 2) / 2;
    let idx = |c: Imbalance| c.p * (2 * n + 3 - c.p) / 2 + c.q;
    let mut norm = vec![0.0; classes];
    let mut hit = vec![0.0; classes];
    let mut class_of = vec![Imbalance::new(0, 0); classes];
    let top = pow3(n - 1);
    for code in 0..pow3(n) {
        let s = stats_of_code(code, n);
        let i = idx(s.imbalance);
        let w = t.powi(s.area2 as i32);
        class_of[i] = s.imbalance;
        norm[i] += w;
        let first_down = code / top == 2;
        let last_up = code % 3 == 1;
        hit[i] += w * (first_down as u8 + last_up as u8) as f64;
    }
    let mut sectors: Vec<(Imbalance, f64)> = (0..classes)
        .map(|i| (class_of[i], hit[i] / norm[i]))
        .filter(|(c, _)| (c.p, c.q) != (0, 0))
        .collect();
    sectors.sort_by_key(|(c, _)| (c.p, c.q));
    let (argmin, minimum) = sectors
        .iter()
        .copied()
        .fold(sectors[0], |b, s| if s.1 < b.1 { s } else { b });
    let table = FloatNormTable::build_float(n, t)?;
    let ratio = penalty_ratio(&table, n)?;
    Ok(PenaltyReport { n, t, sectors, minimum, argmin, ratio, ratio_times_t: t * ratio })
}

/// Empirical penalty constant: minimum of the sector minima over `1..=n_max`.
pub fn empirical_c2(n_max: usize, t: f64) -> Result<(f64, Vec<PenaltyReport>)> {
    let reports: Vec<PenaltyReport> = (1..=n_max)
        .map(|n| boundary_penalty(n, t))
        .collect::<Result<_>>()?;
    let c2 = reports.iter().map(|r| r.minimum).fold(f64::INFINITY, f64::min);
    Ok((c2, reports))
}

/// `f(eps) = eps c2 - eps^2 / (c1 - eps)`.
pub fn pinned_objective(eps: f64, c1: f64, c2: f64) -> f64 {
    eps * c2 - eps * eps / (c1 - eps)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PinnedBound {
    pub epsilon: f64,
    pub value: f64,
}

/// Maximize `f` over `(0, min(1, c1))` by golden-section search. `None`
/// when either constant is non-positive.
pub fn pinned_gap_bound(c1: f64, c2: f64) -> Option<PinnedBound> {
    if !(c1 > 0.0 && c2 > 0.0) {
        return None;
    }
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (0.0, c1.min(1.0));
    let f = |e: f64| pinned_objective(e, c1, c2);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while b - a > GOLDEN_TOL {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        }
    }
    let epsilon = (a + b) / 2.0;
    Some(PinnedBound { epsilon, value: f(epsilon) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertificateSolver {
    pub tol: f64,
    pub iters: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapCertificate {
    pub t: f64,
    pub k: usize,
    pub gamma_k: f64,
    pub z_k: f64,
    pub open_bound: Option<f64>,
    pub c2: f64,
    /// Chain lengths over which `c2` was minimized; it is an empirical value.
    pub c2_source_range: [usize; 2],
    pub epsilon: Option<f64>,
    pub final_bound: Option<f64>,
    pub conclusive: bool,
    pub solver: CertificateSolver,
}

/// Assemble the open and pinned bounds at `(k, t)`.
pub fn certify(k: usize, t: f64, n_penalty: usize, opts: &LanczosOptions) -> Result<GapCertificate> {
    check_unit_t(t)?;
    let zk = compute_zk(k, t, opts)?;
    let gamma = compute_gamma_k(k, t, opts)?;
    let open_bound = open_gap_bound(gamma.gamma_k, zk.z_k);
    let (c2, _) = empirical_c2(n_penalty, t)?;
    let pinned = open_bound.and_then(|c1| pinned_gap_bound(c1, c2));
    Ok(GapCertificate {
        t,
        k,
        gamma_k: gamma.gamma_k,
        z_k: zk.z_k,
        open_bound,
        c2,
        c2_source_range: [1, n_penalty],
        epsilon: pinned.map(|p| p.epsilon),
        final_bound: pinned.map(|p| p.value),
        conclusive: pinned.is_some_and(|p| p.value > 0.0),
        solver: CertificateSolver {
            tol: opts.tol,
            iters: zk.solver.iters + gamma.solver.iters,
        },
    })
}

/// Exact spectral gap by dense diagonalization of every sector: the smallest
/// eigenvalue above `ZERO_EIGENVALUE_THRESHOLD` of the open (or pinned) chain.
pub fn exact_gap(n: usize, t: f64, pinned: bool) -> Result<f64> {
    let basis = Arc::new(SectorBasis::new(n)?);
    let indices: Vec<usize> = (0..basis.sectors().len()).collect();
    let gaps = Exec::default().map(&indices, |&s| -> Result<f64> {
        let domain = Domain::Sector { basis: basis.clone(), sector: s };
        let h = MotzkinHamiltonian::new(n, t, 1, n, pinned, domain)?;
        Ok(dense_eigenvalues(h.to_dense())
            .into_iter()
            .find(|&v| v > ZERO_EIGENVALUE_THRESHOLD)
            .unwrap_or(f64::INFINITY))
    });
    gaps.into_iter()
        .try_fold(f64::INFINITY, |m, g| Ok(m.min(g?)))
}
