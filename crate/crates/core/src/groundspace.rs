//! Combinatorial ground states, interval ground-space projectors and the
//! approximate states built from segment ground states.

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::eigen::LinearOperator;
use crate::error::{Error, Result};
use crate::hamiltonian::Domain;
use crate::normtable::{split_norm, split_norm3, Cutoff, FloatNormTable};
use crate::walks::{self, Imbalance, check_enumerable, pow3, stats_of_code};

/// Overlap defects below this are reported as at the noise floor.
pub const DEFECT_NOISE_FLOOR: f64 = 1e-13;

/// A state stored as `(code, amplitude)` pairs sorted by code.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseState {
    pub n: usize,
    pub entries: Vec<(u64, f64)>,
}

impl SparseState {
    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|e| e.1 * e.1).sum::<f64>().sqrt()
    }

    fn normalized(mut self) -> Self {
        let norm = self.norm();
        self.entries.iter_mut().for_each(|e| e.1 /= norm);
        self
    }

    /// `<self|other>` by merging sorted supports.
    pub fn overlap(&self, other: &SparseState) -> f64 {
        let (mut i, mut j, mut acc) = (0, 0, 0.0);
        while i < self.entries.len() && j < other.entries.len() {
            let (a, b) = (self.entries[i], other.entries[j]);
            match a.0.cmp(&b.0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += a.1 * b.1;
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }

    pub fn amplitude(&self, code: u64) -> f64 {
        self.entries
            .binary_search_by_key(&code, |e| e.0)
            .map(|i| self.entries[i].1)
            .unwrap_or(0.0)
    }

    /// Dense vector indexed by code.
    pub fn to_full(&self) -> Vec<f64> {
        let mut v = vec![0.0; pow3(self.n) as usize];
        for &(c, a) in &self.entries {
            v[c as usize] = a;
        }
        v
    }

    /// Dense vector in the index order of `domain`; support outside it is dropped.
    pub fn to_domain(&self, domain: &Domain) -> Vec<f64> {
        let mut v = vec![0.0; domain.dim()];
        match domain {
            Domain::Full { .. } => {
                for &(c, a) in &self.entries {
                    v[c as usize] = a;
                }
            }
            Domain::Sector { basis, sector } => {
                for &(c, a) in &self.entries {
                    let (s, i) = basis.locate(c);
                    if s == *sector {
                        v[i] = a;
                    }
                }
            }
        }
        v
    }

    fn sorted(mut self) -> Self {
        self.entries.sort_by_key(|e| e.0);
        self
    }
}

/// Strings of one length grouped by class, with their doubled areas.
#[derive(Debug, Clone)]
pub struct ClassIndex {
    len: usize,
    classes: HashMap<Imbalance, Vec<(u64, u64)>>,
}

impl ClassIndex {
    pub fn new(len: usize) -> Result<Self> {
        check_enumerable(len)?;
        let mut classes: HashMap<Imbalance, Vec<(u64, u64)>> = HashMap::new();
        for code in 0..pow3(len) {
            let s = stats_of_code(code, len);
            classes.entry(s.imbalance).or_default().push((code, s.area2));
        }
        Ok(ClassIndex { len, classes })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// `(code, area2)` for class `(p, q)`; empty outside the cone.
    pub fn members(&self, p: usize, q: usize) -> &[(u64, u64)] {
        self.classes
            .get(&Imbalance { p, q })
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }
}

/// Normalized `sum_{w in G_{p,q}} t^{A(w)} |w>`.
#[derive(Debug, Clone)]
pub struct GroundStateVector {
    pub n: usize,
    pub class: Imbalance,
    pub t: f64,
    /// Squared norm of the unnormalized sum, `N_{p,q}`.
    pub norm2: f64,
    pub state: SparseState,
}

pub fn ground_vector(n: usize, p: usize, q: usize, t: f64) -> Result<GroundStateVector> {
    check_t(t)?;
    if p + q > n {
        return Err(Error::InvalidClass { n, p, q });
    }
    let entries: Vec<(u64, f64)> = walks::enumerate_class(n, p, q)?
        .map(|w| (w.code(), t.powf(w.area2().0 as f64 / 2.0)))
        .collect();
    let unnormalized = SparseState { n, entries };
    let norm2 = unnormalized.norm().powi(2);
    Ok(GroundStateVector {
        n,
        class: Imbalance { p, q },
        t,
        norm2,
        state: unnormalized.normalized(),
    })
}

fn check_t(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("area weight t must be positive, got {t}")))
    }
}

/// Inner-segment data shared by all projectors on segments of one length.
#[derive(Debug)]
struct InnerTable {
    /// Dense class id per inner code.
    class_id: Vec<u32>,
    /// Normalized ground-state amplitude per inner code.
    amp: Vec<f64>,
    num_classes: u64,
}

impl InnerTable {
    fn new(len: usize, t: f64) -> Result<Self> {
        check_enumerable(len)?;
        let total = pow3(len) as usize;
        let mut class_id = Vec::with_capacity(total);
        let mut amp = Vec::with_capacity(total);
        let idx = |c: Imbalance| (c.p * (2 * len + 3 - c.p) / 2 + c.q) as u32;
        let num_classes = ((len + 1) * (len + 2) / 2) as u64;
        let mut norm2 = vec![0.0; num_classes as usize];
        for code in 0..total as u64 {
            let s = stats_of_code(code, len);
            let id = idx(s.imbalance);
            let a = t.powf(s.area2 as f64 / 2.0);
            norm2[id as usize] += a * a;
            class_id.push(id);
            amp.push(a);
        }
        for (a, &id) in amp.iter_mut().zip(&class_id) {
            *a /= norm2[id as usize].sqrt();
        }
        Ok(InnerTable { class_id, amp, num_classes })
    }
}

/// Projector `G_[a,b]` onto the ground space of the bonds inside `[a, b]`,
/// tensored with the identity outside.
///
/// For each fixed outer configuration and each inner class `(p, q)`, the
/// inner component is projected onto the inner ground vector of that class.
#[derive(Debug, Clone)]
pub struct IntervalProjector {
    n: usize,
    a: usize,
    b: usize,
    t: f64,
    inner: Arc<InnerTable>,
}

impl IntervalProjector {
    /// Interval `[a, b]`, 1-based and inclusive, on an `n`-site chain.
    pub fn new(n: usize, a: usize, b: usize, t: f64) -> Result<Self> {
        check_t(t)?;
        if a < 1 || b > n || a > b {
            return Err(Error::Domain(format!("bad interval [{a},{b}] for n={n}")));
        }
        if n > walks::MAX_PACKED_LEN {
            return Err(Error::Resource { what: "chain length", value: n, limit: walks::MAX_PACKED_LEN });
        }
        Ok(IntervalProjector {
            n,
            a,
            b,
            t,
            inner: Arc::new(InnerTable::new(b - a + 1, t)?),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn interval(&self) -> (usize, usize) {
        (self.a, self.b)
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// `(group key, inner amplitude)` of a full-chain code.
    #[inline]
    fn key(&self, code: u64) -> (u64, f64) {
        let right_w = pow3(self.n - self.b);
        let inner_w = pow3(self.b - self.a + 1);
        let inner = ((code / right_w) % inner_w) as usize;
        let left = code / (right_w * inner_w);
        let right = code % right_w;
        let outer = left * right_w + right;
        let cls = self.inner.class_id[inner] as u64;
        (outer * self.inner.num_classes + cls, self.inner.amp[inner])
    }

    /// Specialize to the strings of a domain closed under the projector.
    pub fn compile(&self, domain: &Domain) -> CompiledProjector {
        let dim = domain.dim();
        let mut ids: HashMap<u64, u32> = HashMap::new();
        let mut group = Vec::with_capacity(dim);
        let mut amp = Vec::with_capacity(dim);
        for i in 0..dim {
            let (key, a) = self.key(domain.code(i));
            let next = ids.len() as u32;
            group.push(*ids.entry(key).or_insert(next));
            amp.push(a);
        }
        CompiledProjector {
            group,
            amp,
            groups: ids.len(),
        }
    }

    /// Apply to a full-space vector of length `3^n`.
    pub fn apply_full(&self, state: &[f64]) -> Result<Vec<f64>> {
        let dim = pow3(self.n) as usize;
        if state.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: state.len() });
        }
        let compiled = self.compile(&Domain::Full { n: self.n });
        let mut out = vec![0.0; dim];
        compiled.apply(state, &mut out);
        Ok(out)
    }
}

/// `G_[a,b]` restricted to one domain: `y_i = amp_i * sum_{j in group(i)} amp_j x_j`.
#[derive(Debug, Clone)]
pub struct CompiledProjector {
    group: Vec<u32>,
    amp: Vec<f64>,
    groups: usize,
}

impl CompiledProjector {
    /// Number of (outer configuration, inner class) groups, the projector's rank.
    pub fn rank(&self) -> usize {
        self.groups
    }

    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let mut dots = vec![0.0; self.groups];
        for ((&g, &a), &xi) in self.group.iter().zip(&self.amp).zip(x) {
            dots[g as usize] += a * xi;
        }
        for ((yi, &g), &a) in y.iter_mut().zip(&self.group).zip(&self.amp) {
            *yi = a * dots[g as usize];
        }
    }
}

impl LinearOperator for CompiledProjector {
    fn dim(&self) -> usize {
        self.group.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        CompiledProjector::apply(self, x, y)
    }
}

/// Apply `G_[a,b]` to a full-space state.
pub fn apply_interval_projector(proj: &IntervalProjector, state: &[f64]) -> Result<Vec<f64>> {
    proj.apply_full(state)
}

/// `E_k = G_[1,2k] - G_[1,3k]` on a domain of the `3k`-site chain.
#[derive(Debug, Clone)]
pub struct EkOperator {
    pub k: usize,
    short: CompiledProjector,
    full: CompiledProjector,
}

impl EkOperator {
    pub fn new(k: usize, t: f64, domain: &Domain) -> Result<Self> {
        if k == 0 {
            return Err(Error::Domain("k must be at least 1".into()));
        }
        let n = 3 * k;
        let short = IntervalProjector::new(n, 1, 2 * k, t)?;
        let full = IntervalProjector::new(n, 1, n, t)?;
        Self::from_projectors(k, &short, &full, domain)
    }

    /// Compile prebuilt `G_[1,2k]` and `G_[1,3k]` onto `domain`.
    pub fn from_projectors(
        k: usize,
        short: &IntervalProjector,
        full: &IntervalProjector,
        domain: &Domain,
    ) -> Result<Self> {
        let n = 3 * k;
        if domain.n() != n || short.n() != n || full.n() != n {
            return Err(Error::DimensionMismatch { expected: n, got: domain.n() });
        }
        if short.interval() != (1, 2 * k) || full.interval() != (1, n) {
            return Err(Error::Domain("E_k needs the intervals [1,2k] and [1,3k]".into()));
        }
        Ok(EkOperator {
            k,
            short: short.compile(domain),
            full: full.compile(domain),
        })
    }

    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let mut tmp = vec![0.0; x.len()];
        self.short.apply(x, y);
        self.full.apply(x, &mut tmp);
        for (a, b) in y.iter_mut().zip(&tmp) {
            *a -= b;
        }
    }
}

impl LinearOperator for EkOperator {
    fn dim(&self) -> usize {
        self.short.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        EkOperator::apply(self, x, y)
    }
}

/// `E_k` applied to a full-space state of the `3k`-site chain.
pub fn apply_ek(k: usize, t: f64, state: &[f64]) -> Result<Vec<f64>> {
    let n = 3 * k;
    if k == 0 || n > crate::hamiltonian::MAX_BASIS_LEN {
        return Err(Error::Domain(format!("E_k needs 1 <= 3k <= {}", crate::hamiltonian::MAX_BASIS_LEN)));
    }
    let dim = pow3(n) as usize;
    if state.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: state.len() });
    }
    let op = EkOperator::new(k, t, &Domain::Full { n })?;
    let mut out = vec![0.0; dim];
    op.apply(state, &mut out);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ApproxKind {
    /// Two segments joined at heights `r < cutoff`.
    Atgs { cutoff: usize },
    /// All-down left segment times a ground state on the right.
    PgsLeft,
    /// Ground state on the left times an all-up right segment.
    PgsRight,
    /// Three segments joined at heights `r, v < cutoff`.
    Fgs { cutoff: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApproxStateSpec {
    pub kind: ApproxKind,
    /// Segment lengths, left to right: two for ATGS and PGS, three for FGS.
    pub segments: Vec<usize>,
    pub class: Imbalance,
}

impl ApproxStateSpec {
    pub fn n(&self) -> usize {
        self.segments.iter().sum()
    }
}

/// Normalized approximate state described by `spec`.
pub fn approx_vector(spec: &ApproxStateSpec, t: f64) -> Result<SparseState> {
    check_t(t)?;
    let n = spec.n();
    let (p, q) = (spec.class.p, spec.class.q);
    let need = |count: usize| -> Result<()> {
        if spec.segments.len() != count || spec.segments.contains(&0) {
            return Err(Error::Domain(format!(
                "{:?} needs {count} non-empty segments, got {:?}",
                spec.kind, spec.segments
            )));
        }
        Ok(())
    };
    let amp = |a2: u64| t.powf(a2 as f64 / 2.0);
    let mut entries = Vec::new();
    match spec.kind {
        ApproxKind::Atgs { cutoff } => {
            need(2)?;
            check_cutoff(cutoff)?;
            let (l, r) = (spec.segments[0], spec.segments[1]);
            let li = ClassIndex::new(l)?;
            let ri = if r == l { li.clone() } else { ClassIndex::new(r)? };
            let shift = pow3(r);
            for h in 0..cutoff.min(l.min(r) + 1) {
                for &(cl, al) in li.members(p, h) {
                    for &(cr, ar) in ri.members(h, q) {
                        entries.push((cl * shift + cr, amp(al + ar)));
                    }
                }
            }
        }
        ApproxKind::Fgs { cutoff } => {
            need(3)?;
            check_cutoff(cutoff)?;
            let idx: Vec<ClassIndex> = spec
                .segments
                .iter()
                .map(|&s| ClassIndex::new(s))
                .collect::<Result<_>>()?;
            let (wb, wc) = (pow3(spec.segments[1]), pow3(spec.segments[2]));
            for r in 0..cutoff {
                for v in 0..cutoff {
                    for &(ca, aa) in idx[0].members(p, r) {
                        for &(cb, ab) in idx[1].members(r, v) {
                            for &(cc, ac) in idx[2].members(v, q) {
                                entries.push(((ca * wb + cb) * wc + cc, amp(aa + ab + ac)));
                            }
                        }
                    }
                }
            }
        }
        ApproxKind::PgsRight => {
            need(2)?;
            let (l, r) = (spec.segments[0], spec.segments[1]);
            if q < r || p + (q - r) > l {
                return Err(Error::Domain(format!(
                    "PGS-right needs q >= {r} and p + q - {r} <= {l}, got ({p},{q})"
                )));
            }
            let ups = (pow3(r) - 1) / 2;
            for &(cl, al) in ClassIndex::new(l)?.members(p, q - r) {
                entries.push((cl * pow3(r) + ups, amp(al)));
            }
        }
        ApproxKind::PgsLeft => {
            need(2)?;
            let (l, r) = (spec.segments[0], spec.segments[1]);
            if p < l || (p - l) + q > r {
                return Err(Error::Domain(format!(
                    "PGS-left needs p >= {l} and p - {l} + q <= {r}, got ({p},{q})"
                )));
            }
            let downs = pow3(l) - 1;
            for &(cr, ar) in ClassIndex::new(r)?.members(p - l, q) {
                entries.push((downs * pow3(r) + cr, amp(ar)));
            }
        }
    }
    if entries.is_empty() {
        return Err(Error::Domain(format!(
            "approximate state {:?} on {:?} has no terms",
            spec.kind, spec.segments
        )));
    }
    Ok(SparseState { n, entries }.sorted().normalized())
}

fn check_cutoff(cutoff: usize) -> Result<()> {
    if cutoff == 0 {
        Err(Error::Domain("cutoff must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// Defect of `spec` predicted from normalization factors alone.
///
/// ATGS and FGS use `1 - AN/N` with split sums. A PGS state keeps exactly
/// the walks whose outer segment is all up (or all down); that segment adds
/// the same area to each of them, so `1 - t^{tail} N^{seg}/N`.
pub fn identity_defect(spec: &ApproxStateSpec, table: &FloatNormTable) -> Result<f64> {
    let n = spec.n();
    let (p, q) = (spec.class.p, spec.class.q);
    if n > table.kmax() {
        return Err(Error::Domain(format!("norm table kmax {} below n = {n}", table.kmax())));
    }
    if p + q > n {
        return Err(Error::InvalidClass { n, p, q });
    }
    let t = table.t();
    let total = table.n(n, p, q);
    let kept = match (spec.kind, spec.segments.as_slice()) {
        (ApproxKind::Atgs { cutoff }, &[l, r]) => split_norm(table, l, table, r, p, q, Cutoff::Below(cutoff))?,
        (ApproxKind::Fgs { cutoff }, &[a, b, c]) => split_norm3(table, [a, b, c], p, q, Cutoff::Below(cutoff))?,
        (ApproxKind::PgsRight, &[l, r]) if q >= r => {
            let h = q - r;
            let tail2 = q * q - h * h;
            table.get(l, p, h).copied().unwrap_or(0.0) * t.powi(tail2 as i32)
        }
        (ApproxKind::PgsLeft, &[l, r]) if p >= l => {
            let h = p - l;
            let head2 = p * p - h * h;
            table.get(r, h, q).copied().unwrap_or(0.0) * t.powi(head2 as i32)
        }
        _ => return Err(Error::Domain(format!("no identity for {:?} on {:?}", spec.kind, spec.segments))),
    };
    Ok(1.0 - kept / total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Defect {
    /// `1 - |<exact|approx>|^2`.
    pub value: f64,
    pub at_noise_floor: bool,
}

pub fn overlap_defect(exact: &SparseState, approx: &SparseState) -> Result<Defect> {
    if exact.n != approx.n {
        return Err(Error::DimensionMismatch { expected: exact.n, got: approx.n });
    }
    let o = exact.overlap(approx);
    let value = 1.0 - o * o;
    Ok(Defect {
        value,
        at_noise_floor: value.abs() < DEFECT_NOISE_FLOOR,
    })
}
