//! Area-weighted class sums `N^k_{p,q}`, their ratio tables, and the
//! equilibration diagnostics built on them.
//!
//! `N^k_{p,q}` is the sum of `t^{area2(w)}` over the strings `w` of length
//! `k` with `p` unbalanced down and `q` unbalanced up steps. The table is
//! advanced in `k` by a two-line recursion and checked against direct
//! enumeration for small `k`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{FloatRing, Poly, PolyRing, WeightRing};
use crate::walks::{self, all_classes, stats_of_code, pow3};

/// Largest segment length accepted by [`brute_force`].
pub const BRUTE_FORCE_CAP: usize = 14;

/// Largest `kmax` for exact polynomial tables; coefficients stay below `3^k`.
pub const EXACT_KMAX: usize = 40;

/// Defects below this are indistinguishable from `f64` rounding.
pub const DEFAULT_NOISE_FLOOR: f64 = 1e-13;

/// Entries below this are treated as lost to underflow by the diagnostics.
pub const REPRESENTABLE_FLOOR: f64 = 1e-290;

#[inline]
fn tri_index(k: usize, p: usize, q: usize) -> usize {
    p * (2 * k + 3 - p) / 2 + q
}

#[inline]
fn tri_len(k: usize) -> usize {
    (k + 1) * (k + 2) / 2
}

/// Triangular table of `N^k_{p,q}` for `1 <= k <= kmax`, `p + q <= k`.
#[derive(Debug, Clone)]
pub struct NormTable<R: WeightRing> {
    ring: R,
    kmax: usize,
    rows: Vec<Vec<R::Elem>>,
    underflow: bool,
}

pub type FloatNormTable = NormTable<FloatRing>;
pub type ExactNormTable = NormTable<PolyRing>;

impl<R: WeightRing> NormTable<R> {
    /// Seeds `k = 1` and advances with
    /// `N^{k+1}_{p,0} = t N^k_{p,1} + N^k_{p,0} + t^{2k+1} N^k_{p-1,0}` and
    /// `N^{k+1}_{p,q} = t^{2q+1} N^k_{p,q+1} + t^{2q} N^k_{p,q} + t^{2q-1} N^k_{p,q-1}`.
    pub fn build(kmax: usize, ring: R) -> Result<Self> {
        if kmax == 0 {
            return Err(Error::Domain("kmax must be at least 1".into()));
        }
        let mut rows = Vec::with_capacity(kmax);
        let t1 = ring.mul_t_pow(&ring.one(), 1);
        rows.push(vec![ring.one(), t1.clone(), t1]);
        for k in 1..kmax {
            let prev = &rows[k - 1];
            let get = |p: isize, q: isize| -> Option<&R::Elem> {
                if p < 0 || q < 0 || (p + q) as usize > k {
                    None
                } else {
                    Some(&prev[tri_index(k, p as usize, q as usize)])
                }
            };
            let mut row = Vec::with_capacity(tri_len(k + 1));
            for p in 0..=k + 1 {
                for q in 0..=k + 1 - p {
                    let (p_, q_) = (p as isize, q as isize);
                    let mut acc = ring.zero();
                    let mut add = |term: Option<R::Elem>| -> Result<()> {
                        if let Some(x) = term {
                            acc = ring.add(&acc, &x)?;
                        }
                        Ok(())
                    };
                    if q == 0 {
                        add(get(p_, 1).map(|x| ring.mul_t_pow(x, 1)))?;
                        add(get(p_, 0).cloned())?;
                        add(get(p_ - 1, 0).map(|x| ring.mul_t_pow(x, 2 * k + 1)))?;
                    } else {
                        add(get(p_, q_ + 1).map(|x| ring.mul_t_pow(x, 2 * q + 1)))?;
                        add(get(p_, q_).map(|x| ring.mul_t_pow(x, 2 * q)))?;
                        add(get(p_, q_ - 1).map(|x| ring.mul_t_pow(x, 2 * q - 1)))?;
                    }
                    row.push(acc);
                }
            }
            rows.push(row);
        }
        Ok(NormTable {
            ring,
            kmax,
            rows,
            underflow: false,
        })
    }

    pub fn kmax(&self) -> usize {
        self.kmax
    }

    pub fn ring(&self) -> &R {
        &self.ring
    }

    /// Set when some in-cone `f64` entry fell below the normal range.
    pub fn underflow(&self) -> bool {
        self.underflow
    }

    /// Entry inside the cone, `None` outside it or beyond `kmax`.
    pub fn get(&self, k: usize, p: usize, q: usize) -> Option<&R::Elem> {
        if k == 0 || k > self.kmax || p + q > k {
            return None;
        }
        Some(&self.rows[k - 1][tri_index(k, p, q)])
    }

    /// Entry with the zero convention outside the cone.
    pub fn value(&self, k: usize, p: usize, q: usize) -> R::Elem {
        self.get(k, p, q).cloned().unwrap_or_else(|| self.ring.zero())
    }

    /// `(k, p, q, N)` for every filled entry, ordered by `k`, `p`, `q`.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, usize, &R::Elem)> {
        (1..=self.kmax).flat_map(move |k| {
            all_classes(k).map(move |c| (k, c.p, c.q, &self.rows[k - 1][tri_index(k, c.p, c.q)]))
        })
    }
}

impl FloatNormTable {
    pub fn build_float(kmax: usize, t: f64) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::Domain(format!("t must be positive, got {t}")));
        }
        let mut table = Self::build(kmax, FloatRing { t })?;
        table.underflow = table
            .rows
            .iter()
            .flatten()
            .any(|&x| x < f64::MIN_POSITIVE);
        Ok(table)
    }

    pub fn t(&self) -> f64 {
        self.ring.t
    }

    /// `N^k_{p,q}` as `f64`, zero outside the cone.
    pub fn n(&self, k: usize, p: usize, q: usize) -> f64 {
        self.get(k, p, q).copied().unwrap_or(0.0)
    }
}

impl ExactNormTable {
    pub fn build_exact(kmax: usize) -> Result<Self> {
        if kmax > EXACT_KMAX {
            return Err(Error::Resource {
                what: "exact table kmax",
                value: kmax,
                limit: EXACT_KMAX,
            });
        }
        Self::build(kmax, PolyRing)
    }

    /// Evaluate every entry at `t`, giving the matching float table.
    pub fn evaluate(&self, t: f64) -> FloatNormTable {
        FloatNormTable {
            ring: FloatRing { t },
            kmax: self.kmax,
            rows: self
                .rows
                .iter()
                .map(|r| r.iter().map(|p| p.eval_f64(t)).collect())
                .collect(),
            underflow: false,
        }
    }
}

/// How table entries are represented.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ScalarMode {
    Float64 { t: f64 },
    ExactPoly,
}

/// A table in either scalar mode.
#[derive(Debug, Clone)]
pub enum AnyNormTable {
    Float(FloatNormTable),
    Exact(ExactNormTable),
}

pub fn build_recursive(kmax: usize, mode: ScalarMode) -> Result<AnyNormTable> {
    match mode {
        ScalarMode::Float64 { t } => FloatNormTable::build_float(kmax, t).map(AnyNormTable::Float),
        ScalarMode::ExactPoly => ExactNormTable::build_exact(kmax).map(AnyNormTable::Exact),
    }
}

fn check_brute(n: usize, p: usize, q: usize) -> Result<()> {
    if n == 0 || n > BRUTE_FORCE_CAP {
        return Err(Error::Resource {
            what: "brute-force length",
            value: n,
            limit: BRUTE_FORCE_CAP,
        });
    }
    if p + q > n {
        return Err(Error::InvalidClass { n, p, q });
    }
    Ok(())
}

/// `sum over class (p,q) of t^{area2}` by enumeration.
pub fn brute_force(n: usize, p: usize, q: usize, t: f64) -> Result<f64> {
    check_brute(n, p, q)?;
    Ok(walks::enumerate_class(n, p, q)?
        .map(|w| t.powi(w.area2().0 as i32))
        .sum())
}

/// Exact polynomial form of [`brute_force`].
pub fn brute_force_poly(n: usize, p: usize, q: usize) -> Result<Poly> {
    check_brute(n, p, q)?;
    let mut poly = Poly::zero();
    for w in walks::enumerate_class(n, p, q)? {
        poly.add_term(1, w.area2().0 as usize);
    }
    Ok(poly)
}

/// Polynomials for every class of length `n` from one scan of all strings.
pub fn brute_force_all_poly(n: usize) -> Result<Vec<(walks::Imbalance, Poly)>> {
    check_brute(n, 0, 0)?;
    let classes: Vec<_> = all_classes(n).collect();
    let mut polys = vec![Poly::zero(); classes.len()];
    for code in 0..pow3(n) {
        let s = stats_of_code(code, n);
        polys[tri_index(n, s.imbalance.p, s.imbalance.q)].add_term(1, s.area2 as usize);
    }
    Ok(classes.into_iter().zip(polys).collect())
}

/// Ratio tables `pi^k_{p,q} = N^k_{p,q} / N^k_{p,0}` and
/// `rho^k_{p,q} = t N^k_{p,q+1} / N^k_{p,q}`.
#[derive(Debug, Clone, Serialize)]
pub struct RatioTable {
    pub t: f64,
    pub kmax: usize,
    pi: Vec<Vec<f64>>,
    rho: Vec<Vec<f64>>,
    /// `pi^K_{0,q}` at `K = kmax`, the truncated limit.
    pub pi_limit: Vec<f64>,
    pub limit_k: usize,
}

impl RatioTable {
    /// `pi^k_{p,q}`; zero outside `0 <= q <= k - p`.
    pub fn pi(&self, k: usize, p: usize, q: usize) -> f64 {
        if k == 0 || k > self.kmax || p + q > k {
            return 0.0;
        }
        self.pi[k - 1][tri_index(k, p, q)]
    }

    /// `rho^k_{p,q}` for `q >= 0`; zero for `q >= k - p`.
    pub fn rho(&self, k: usize, p: usize, q: usize) -> f64 {
        if k == 0 || k > self.kmax || p + q >= k {
            return 0.0;
        }
        self.rho[k - 1][tri_index(k, p, q)]
    }

    /// `rho^k_{p,q}` with `q = -1` read as infinity.
    fn rho_signed(&self, k: usize, p: usize, q: isize) -> f64 {
        if q < 0 {
            f64::INFINITY
        } else {
            self.rho(k, p, q as usize)
        }
    }

    pub fn pi_limit(&self, q: usize) -> f64 {
        self.pi_limit.get(q).copied().unwrap_or(0.0)
    }
}

pub fn ratios(table: &FloatNormTable) -> RatioTable {
    let t = table.t();
    let kmax = table.kmax();
    let mut pi = Vec::with_capacity(kmax);
    let mut rho = Vec::with_capacity(kmax);
    for k in 1..=kmax {
        let mut pi_row = vec![0.0; tri_len(k)];
        let mut rho_row = vec![0.0; tri_len(k)];
        for c in all_classes(k) {
            let (p, q) = (c.p, c.q);
            let base = table.n(k, p, 0);
            let here = table.n(k, p, q);
            pi_row[tri_index(k, p, q)] = if q == 0 {
                1.0
            } else if base > 0.0 {
                here / base
            } else {
                0.0
            };
            rho_row[tri_index(k, p, q)] = if p + q >= k || here == 0.0 {
                0.0
            } else {
                t * table.n(k, p, q + 1) / here
            };
        }
        pi.push(pi_row);
        rho.push(rho_row);
    }
    let pi_limit = (0..=kmax)
        .map(|q| if q == 0 { 1.0 } else { table.n(kmax, 0, q) / table.n(kmax, 0, 0) })
        .collect();
    RatioTable {
        t,
        kmax,
        pi,
        rho,
        pi_limit,
        limit_k: kmax,
    }
}

/// `F(x, y, z) = t^2 y (x + 1 + 1/y) / (y + 1 + 1/z)`, with `z = inf` allowed.
pub fn eval_f(x: f64, y: f64, z: f64, t: f64) -> Result<f64> {
    if !(x >= 0.0 && y >= 0.0 && z >= 0.0) {
        return Err(Error::Domain(format!("F needs non-negative arguments, got ({x}, {y}, {z})")));
    }
    if y == 0.0 {
        return Err(Error::Domain("F is undefined at y = 0".into()));
    }
    Ok(t * t * y * (x + 1.0 + 1.0 / y) / (y + 1.0 + 1.0 / z))
}

/// `F` with the `1/y` cleared, continuous at `y = 0`.
fn f_cleared(x: f64, y: f64, z: f64, t: f64) -> f64 {
    t * t * (x * y + y + 1.0) / (y + 1.0 + 1.0 / z)
}

#[derive(Debug, Clone, Serialize)]
pub struct RhoRecursionReport {
    /// Largest `|lhs - rhs| / |lhs|`.
    pub max_residual: f64,
    pub worst: Option<(usize, usize, usize)>,
    pub checked: usize,
}

/// Checks `rho^{k+1}_{p,q} = F(rho^k_{p,q+1}, rho^k_{p,q}, rho^k_{p,q-1})` for
/// `1 <= q <= k - p`, and the `q = 0` line whose third argument is
/// `t^{-2k-2} rho^k_{0,p-1}`.
///
/// Where `rho^k_{p,q} = 0` the continuous extension of `F` is used.
pub fn check_rho_recursion(ratios: &RatioTable) -> RhoRecursionReport {
    let t = ratios.t;
    let mut report = RhoRecursionReport {
        max_residual: 0.0,
        worst: None,
        checked: 0,
    };
    for k in 1..ratios.kmax {
        for p in 0..=k {
            for q in 0..=(k - p) {
                let lhs = ratios.rho(k + 1, p, q);
                if lhs < REPRESENTABLE_FLOOR {
                    continue;
                }
                let x = ratios.rho(k, p, q + 1);
                let y = ratios.rho(k, p, q);
                let z = if q == 0 {
                    let r = ratios.rho_signed(k, 0, p as isize - 1);
                    if r.is_infinite() {
                        r
                    } else {
                        r * t.powi(-(2 * k as i32) - 2)
                    }
                } else {
                    ratios.rho_signed(k, p, q as isize - 1)
                };
                let rhs = if y > 0.0 {
                    eval_f(x, y, z, t).expect("positive y")
                } else {
                    f_cleared(x, y, z, t)
                };
                let res = ((lhs - rhs) / lhs).abs();
                report.checked += 1;
                if res > report.max_residual {
                    report.max_residual = res;
                    report.worst = Some((k + 1, p, q));
                }
            }
        }
    }
    report
}

/// Truncation of the intermediate height in a split sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Cutoff {
    /// Keep heights `r < n`.
    Below(usize),
    Unbounded,
}

impl Cutoff {
    #[inline]
    pub fn admits(self, r: usize) -> bool {
        match self {
            Cutoff::Below(c) => r < c,
            Cutoff::Unbounded => true,
        }
    }
}

/// `sum_{r admitted} N^{L}_{p,r} N^{R}_{r,q}` for segments of lengths
/// `left_len` and `right_len`.
pub fn split_norm<R: WeightRing>(
    left: &NormTable<R>,
    left_len: usize,
    right: &NormTable<R>,
    right_len: usize,
    p: usize,
    q: usize,
    cutoff: Cutoff,
) -> Result<R::Elem> {
    if let Cutoff::Below(0) = cutoff {
        return Err(Error::Domain("cutoff must be at least 1".into()));
    }
    let ring = left.ring();
    let mut acc = ring.zero();
    for r in 0..=left_len.min(right_len) {
        if !cutoff.admits(r) {
            break;
        }
        if let (Some(a), Some(b)) = (left.get(left_len, p, r), right.get(right_len, r, q)) {
            acc = ring.add(&acc, &ring.mul(a, b)?)?;
        }
    }
    Ok(acc)
}

/// Three-segment analogue: `sum_{r,v admitted} N^A_{p,r} N^B_{r,v} N^C_{v,q}`.
pub fn split_norm3<R: WeightRing>(
    table: &NormTable<R>,
    lens: [usize; 3],
    p: usize,
    q: usize,
    cutoff: Cutoff,
) -> Result<R::Elem> {
    if let Cutoff::Below(0) = cutoff {
        return Err(Error::Domain("cutoff must be at least 1".into()));
    }
    let ring = table.ring();
    let mut acc = ring.zero();
    for r in 0..=lens[0] {
        if !cutoff.admits(r) {
            break;
        }
        let Some(a) = table.get(lens[0], p, r) else { continue };
        for v in 0..=lens[1] {
            if !cutoff.admits(v) {
                break;
            }
            let (Some(b), Some(c)) = (table.get(lens[1], r, v), table.get(lens[2], v, q)) else {
                continue;
            };
            acc = ring.add(&acc, &ring.mul(&ring.mul(a, b)?, c)?)?;
        }
    }
    Ok(acc)
}

/// One point of `1 - pi^k_{p,q} / pi_{0,q}` against `k - p - q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DefectPoint {
    pub kminus: usize,
    pub defect: f64,
}

/// Defect series for `(p, q)` over `k` in `k_range` (clipped to the cone and the table).
pub fn convergence_series(
    ratios: &RatioTable,
    p: usize,
    q: usize,
    k_range: std::ops::RangeInclusive<usize>,
) -> Result<Vec<DefectPoint>> {
    if *k_range.end() > ratios.kmax {
        return Err(Error::Domain(format!(
            "k range ends at {} beyond table kmax {}",
            k_range.end(),
            ratios.kmax
        )));
    }
    let limit = ratios.pi_limit(q);
    if !(limit > 0.0) {
        return Err(Error::Domain(format!("limit pi_(0,{q}) is not positive")));
    }
    Ok(k_range
        .filter(|&k| k >= p + q && k >= 1)
        .map(|k| DefectPoint {
            kminus: k - p - q,
            defect: 1.0 - ratios.pi(k, p, q) / limit,
        })
        .collect())
}

/// Least-squares fit of `log(defect)` against `k - p - q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Smallest and largest `k - p - q` that entered the fit.
    pub kminus_range: (usize, usize),
    pub points: usize,
    pub window: (f64, f64),
}

/// Fits the points whose defect lies in `[lo, hi]`.
pub fn fit_rate(series: &[DefectPoint], window: (f64, f64)) -> Result<ConvergenceFit> {
    let (lo, hi) = window;
    let pts: Vec<(f64, f64)> = series
        .iter()
        .filter(|d| d.defect >= lo && d.defect <= hi && d.defect > 0.0)
        .map(|d| (d.kminus as f64, d.defect.ln()))
        .collect();
    if pts.len() < 4 {
        return Err(Error::Fit(format!(
            "{} usable points in window [{lo:e}, {hi:e}], need at least 4",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) };
    let xs = pts.iter().map(|p| p.0 as usize);
    Ok(ConvergenceFit {
        slope,
        intercept,
        r_squared,
        kminus_range: (xs.clone().min().unwrap(), xs.max().unwrap()),
        points: pts.len(),
        window,
    })
}

/// Empirical counterparts of the ratio lemmas over a whole table.
#[derive(Debug, Clone, Serialize)]
pub struct LemmaReport {
    pub t: f64,
    pub kmax: usize,
    /// Count of `pi^k_{p,q} > pi^{k+1}_{p,q}` beyond rounding.
    pub k_monotonicity_violations: usize,
    /// Count of `pi^k_{p+1,q} > pi^k_{p,q}` beyond rounding.
    pub p_monotonicity_violations: usize,
    /// Count of `pi^k_{p,q} > pi_{0,q}` beyond rounding.
    pub sandwich_violations: usize,
    /// `max pi^k_{p,q+1} / (t^{2q} pi^k_{p,q})`.
    pub c0_hat: f64,
    /// `min pi^k_{0,q+1} / (t^{2q} pi^k_{0,q})`.
    pub c1_hat: f64,
    pub entries_checked: usize,
}

/// Relative slack for comparisons between rounded ratios.
const RATIO_SLACK: f64 = 1e-12;

/// Evaluates the monotonicity, sandwich and decay properties over entries
/// whose underlying sums are representable.
pub fn lemma_report(table: &FloatNormTable, ratios: &RatioTable) -> LemmaReport {
    let t = ratios.t;
    let kmax = ratios.kmax;
    let ok = |k: usize, p: usize, q: usize| {
        table.n(k, p, q) >= REPRESENTABLE_FLOOR && table.n(k, p, 0) >= REPRESENTABLE_FLOOR
    };
    let le = |a: f64, b: f64| a <= b * (1.0 + RATIO_SLACK) + f64::MIN_POSITIVE;
    let mut r = LemmaReport {
        t,
        kmax,
        k_monotonicity_violations: 0,
        p_monotonicity_violations: 0,
        sandwich_violations: 0,
        c0_hat: 0.0,
        c1_hat: f64::INFINITY,
        entries_checked: 0,
    };
    for k in 1..=kmax {
        for c in all_classes(k) {
            let (p, q) = (c.p, c.q);
            if !ok(k, p, q) {
                continue;
            }
            r.entries_checked += 1;
            let here = ratios.pi(k, p, q);
            if k < kmax && ok(k + 1, p, q) && !le(here, ratios.pi(k + 1, p, q)) {
                r.k_monotonicity_violations += 1;
            }
            if p + q < k && ok(k, p + 1, q) && !le(ratios.pi(k, p + 1, q), here) {
                r.p_monotonicity_violations += 1;
            }
            if !le(here, ratios.pi_limit(q)) {
                r.sandwich_violations += 1;
            }
            if p + q < k && ok(k, p, q + 1) {
                let scaled = t.powi(2 * q as i32) * here;
                if scaled >= REPRESENTABLE_FLOOR {
                    let ratio = ratios.pi(k, p, q + 1) / scaled;
                    r.c0_hat = r.c0_hat.max(ratio);
                    if p == 0 {
                        r.c1_hat = r.c1_hat.min(ratio);
                    }
                }
            }
        }
    }
    r
}
