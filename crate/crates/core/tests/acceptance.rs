//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

#![allow(clippy::excessive_precision)]

use std::sync::Arc;
use std::time::{Duration, Instant};

use motzkin_core::criterion::{
    boundary_penalty, certify, compute_gamma_k, compute_zk, exact_gap, open_gap_bound, penalty_ratio,
};
use motzkin_core::eigen::{dense_eigh, LanczosOptions};
use motzkin_core::groundspace::{approx_vector, ground_vector, identity_defect, overlap_defect, ApproxKind, ApproxStateSpec};
use motzkin_core::hamiltonian::{Domain, MotzkinHamiltonian, SectorBasis};
use motzkin_core::normtable::{
    build_recursive, convergence_series, fit_rate, lemma_report, ratios, AnyNormTable, ExactNormTable,
    FloatNormTable, ScalarMode,
};
use motzkin_core::oracle::dense_zk;
use motzkin_core::poly::Poly;
use motzkin_core::walks::all_classes;
use motzkin_core::Imbalance;

const T_GRID: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

// Tolerances and limits.
const ORACLE_REL_TOL: f64 = 1e-12;
const KERNEL_THRESHOLD: f64 = 1e-10;
const GS_OVERLAP_TOL: f64 = 1e-10;
const PENALTY_STABILITY: f64 = 0.01;
const LEMMA_KMAX: usize = 60;
const C0_STABILITY: f64 = 1e-6;
const FIT_T: f64 = 0.7;
const FIT_KMAX: usize = 60;
const FIT_LIMIT_K: usize = 300;
const FIT_WINDOW: (f64, f64) = (1e-10, 1e-2);
const FIT_MIN_R2: f64 = 0.98;
const SLOPE_AGREEMENT: f64 = 0.10;
const DENSE_ZK_TOL: f64 = 1e-8;
const BASELINE_TOL: f64 = 1e-8;
const IDENTITY_DEFECT_TOL: f64 = 1e-9;

/// Values computed by the sector-Lanczos path and cross-checked against the
/// dense oracle at k = 2. Frozen as regression baselines.
const Z2_BASELINE: [f64; 9] = [
    1.4037414803564768e-2,
    5.4953009193472527e-2,
    1.1953693753537621e-1,
    2.0334515657053778e-1,
    3.0114496391967605e-1,
    4.0667041000842152e-1,
    5.1216877274248618e-1,
    6.0882061904915608e-1,
    6.8883587103388699e-1,
];
const Z3_BASELINE: [f64; 9] = [
    1.4037774154117295e-3,
    1.0995369281661676e-2,
    3.5944743767508155e-2,
    8.1958570931636887e-2,
    1.5333827346534182e-1,
    2.5259177555209461e-1,
    3.7831746655098170e-1,
    5.2106566992726566e-1,
    6.6020376492470001e-1,
];
const GAMMA2_AT_HALF: f64 = 2.8322630133947208e-1;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// Enumerates all `3^n` strings directly and sums `t^{2A}` per class.
fn enumeration_oracle(n: usize, t: f64) -> Vec<((usize, usize), f64)> {
    let mut sums = std::collections::BTreeMap::new();
    for mut code in 0..3u64.pow(n as u32) {
        let mut steps = vec![0i64; n];
        for s in steps.iter_mut().rev() {
            *s = match code % 3 {
                0 => 0,
                1 => 1,
                _ => -1,
            };
            code /= 3;
        }
        let mut h = vec![0i64; n + 1];
        for (i, s) in steps.iter().enumerate() {
            h[i + 1] = h[i] + s;
        }
        let min = *h.iter().min().unwrap();
        let p = (-min) as usize;
        let q = (h[n] - min) as usize;
        let area2: i64 = (1..=n).map(|j| h[j - 1] - min + h[j] - min).sum();
        *sums.entry((p, q)).or_insert(0.0) += t.powi(area2 as i32);
    }
    sums.into_iter().collect()
}

fn criterion_1() -> Outcome {
    let table = ExactNormTable::build_exact(3).unwrap();
    let expected: [(usize, usize, usize, &[u64]); 10] = [
        (1, 0, 0, &[1]),
        (1, 0, 1, &[0, 1]),
        (2, 0, 0, &[1, 0, 1]),
        (2, 0, 1, &[0, 1, 0, 1]),
        (2, 0, 2, &[0, 0, 0, 0, 1]),
        (2, 1, 1, &[0, 0, 1]),
        (3, 0, 0, &[1, 0, 2, 0, 1]),
        (3, 0, 1, &[0, 1, 0, 2, 0, 1, 0, 1]),
        (3, 0, 2, &[0, 0, 0, 0, 1, 0, 1, 0, 1]),
        (3, 0, 3, &[0, 0, 0, 0, 0, 0, 0, 0, 0, 1]),
    ];
    let extra: [(usize, usize, usize, &[u64]); 2] = [(3, 1, 1, &[0, 0, 1, 0, 2]), (3, 1, 2, &[0, 0, 0, 0, 0, 1])];
    let mut bad = Vec::new();
    for (k, p, q, coeffs) in expected.iter().chain(&extra) {
        let want = Poly::from_coeffs(coeffs.to_vec());
        for (a, b) in [(*p, *q), (*q, *p)] {
            if table.get(*k, a, b) != Some(&want) {
                bad.push(format!("N^{k}_{{{a},{b}}}"));
            }
        }
    }
    outcome(bad.is_empty(), format!("24 entries (with symmetry), mismatches: {bad:?}"))
}

fn criterion_2() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for t in [0.3, 0.6, 0.9] {
        let AnyNormTable::Float(table) = build_recursive(10, ScalarMode::Float64 { t }).unwrap() else {
            unreachable!()
        };
        for n in 1..=10 {
            let oracle = enumeration_oracle(n, t);
            if oracle.len() != all_classes(n).count() {
                return outcome(false, format!("class count mismatch at n={n}"));
            }
            for ((p, q), v) in oracle {
                worst = worst.max(rel_err(table.n(n, p, q), v));
                count += 1;
            }
        }
    }
    outcome(worst <= ORACLE_REL_TOL, format!("{count} entries, max relative error {worst:.2e} (tol {ORACLE_REL_TOL:.0e})"))
}

fn sector_hamiltonian(n: usize, t: f64, pinned: bool, basis: &Arc<SectorBasis>, s: usize) -> MotzkinHamiltonian {
    let domain = Domain::Sector { basis: basis.clone(), sector: s };
    MotzkinHamiltonian::new(n, t, 1, n, pinned, domain).unwrap()
}

fn criterion_3() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;
    let mut min_overlap: f64 = 1.0;
    for t in [0.3, 0.7] {
        for n in 4..=8 {
            let basis = Arc::new(SectorBasis::new(n).unwrap());
            let mut open_kernel = 0;
            let mut pinned_kernel = 0;
            for s in 0..basis.sectors().len() {
                let h = sector_hamiltonian(n, t, false, &basis, s);
                let (vals, _) = dense_eigh(h.to_dense());
                open_kernel += vals.iter().filter(|&&v| v < KERNEL_THRESHOLD).count();

                let hp = sector_hamiltonian(n, t, true, &basis, s);
                let (vals, vecs) = dense_eigh(hp.to_dense());
                let kernel: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] < KERNEL_THRESHOLD).collect();
                pinned_kernel += kernel.len();
                if let [i] = kernel[..] {
                    let gs = ground_vector(n, 0, 0, t).unwrap();
                    let x = gs.state.to_domain(hp.domain());
                    let v = vecs.column(i);
                    let dot: f64 = x.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
                    let nx: f64 = x.iter().map(|a| a * a).sum();
                    min_overlap = min_overlap.min(dot * dot / nx);
                }
            }
            let want = (n + 1) * (n + 2) / 2;
            if open_kernel != want || pinned_kernel != 1 {
                pass = false;
                notes.push(format!("t={t} n={n}: open {open_kernel} (want {want}), pinned {pinned_kernel}"));
            }
        }
    }
    pass &= min_overlap >= 1.0 - GS_OVERLAP_TOL;
    outcome(pass, format!("kernel dims match for n=4..8; min pinned GS overlap {min_overlap:.12} {notes:?}"))
}

fn criterion_4() -> Outcome {
    let mut worst_margin = f64::INFINITY;
    for t in T_GRID {
        let table = FloatNormTable::build_float(200, t).unwrap();
        for n in 1..=200 {
            let r = penalty_ratio(&table, n).unwrap();
            worst_margin = worst_margin.min(r - (1.0 - t));
        }
    }
    let mut pass = worst_margin >= 0.0;
    let mut worst_change: f64 = 0.0;
    for t in T_GRID {
        let mut prev = None;
        for n in 1..=10 {
            let r = boundary_penalty(n, t).unwrap();
            pass &= r.minimum > 0.0;
            if let Some(m) = prev {
                if n == 10 {
                    worst_change = worst_change.max(rel_err(r.minimum, m));
                }
            }
            prev = Some(r.minimum);
        }
    }
    pass &= worst_change < PENALTY_STABILITY;
    outcome(
        pass,
        format!(
            "min(ratio - (1-t)) over n<=200 = {worst_margin:.3e}; n=9->10 change {:.2}% (limit {:.0}%)",
            100.0 * worst_change,
            100.0 * PENALTY_STABILITY
        ),
    )
}

fn criterion_5() -> Outcome {
    let mut pass = true;
    let mut details = Vec::new();
    for t in [0.3, 0.5, 0.7, 0.9] {
        let table = FloatNormTable::build_float(LEMMA_KMAX, t).unwrap();
        let r = lemma_report(&table, &ratios(&table));
        let shorter = FloatNormTable::build_float(LEMMA_KMAX - 10, t).unwrap();
        let r_short = lemma_report(&shorter, &ratios(&shorter));
        let stable = rel_err(r.c0_hat, r_short.c0_hat) < C0_STABILITY;
        let ok = r.k_monotonicity_violations == 0
            && r.p_monotonicity_violations == 0
            && r.c0_hat.is_finite()
            && stable
            && r.c1_hat > 0.0;
        pass &= ok;
        details.push(format!("t={t}: C0hat={:.4} C1hat={:.4}", r.c0_hat, r.c1_hat));
    }
    outcome(pass, format!("no monotonicity violations over kMax={LEMMA_KMAX}; {}", details.join(", ")))
}

fn criterion_6() -> Outcome {
    let deep = FloatNormTable::build_float(FIT_LIMIT_K, FIT_T).unwrap();
    let r = ratios(&deep);
    let mut slopes = Vec::new();
    let mut min_r2: f64 = 1.0;
    for (p, q) in [(0, 1), (1, 1), (2, 1), (1, 2), (2, 2)] {
        let series = convergence_series(&r, p, q, 1..=FIT_KMAX).unwrap();
        let fit = match fit_rate(&series, FIT_WINDOW) {
            Ok(f) => f,
            Err(e) => return outcome(false, format!("fit failed for ({p},{q}): {e}")),
        };
        min_r2 = min_r2.min(fit.r_squared);
        slopes.push((p, fit.slope));
    }
    let p0 = slopes[0].1;
    let rest: Vec<f64> = slopes[1..].iter().map(|s| s.1).collect();
    let lo = rest.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = rest.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let spread = (hi - lo).abs() / hi.abs().min(lo.abs());
    let steeper = rest.iter().all(|&s| p0 < s);
    outcome(
        min_r2 >= FIT_MIN_R2 && spread <= SLOPE_AGREEMENT && steeper,
        format!("min R^2 {min_r2:.6}; p>=1 slope spread {:.3}%; p=0 slope {p0:.4} vs p>=1 [{lo:.4}, {hi:.4}]", 100.0 * spread),
    )
}

fn criterion_7() -> Outcome {
    let opts = LanczosOptions::default();
    let mut pass = true;
    let mut notes = Vec::new();
    let mut worst_baseline: f64 = 0.0;
    for (i, &t) in T_GRID.iter().enumerate() {
        let z2 = compute_zk(2, t, &opts).unwrap().z_k;
        let z3 = compute_zk(3, t, &opts).unwrap().z_k;
        worst_baseline = worst_baseline.max((z2 - Z2_BASELINE[i]).abs()).max((z3 - Z3_BASELINE[i]).abs());
        if z3 > z2 {
            pass = false;
            notes.push(format!("z3>z2 at t={t}"));
        }
        let dense = dense_zk(2, t).unwrap();
        if (dense - z2).abs() > DENSE_ZK_TOL {
            pass = false;
            notes.push(format!("dense mismatch at t={t}: {dense} vs {z2}"));
        }
        if t <= 0.5 {
            for k in 2..=4 {
                let z = if k == 2 { z2 } else if k == 3 { z3 } else { compute_zk(4, t, &opts).unwrap().z_k };
                if z >= 0.5 {
                    pass = false;
                    notes.push(format!("inconclusive k={k} t={t}"));
                }
            }
        }
    }
    let g = compute_gamma_k(2, 0.5, &opts).unwrap().gamma_k;
    worst_baseline = worst_baseline.max((g - GAMMA2_AT_HALF).abs());
    let z_small = compute_zk(2, 0.05, &opts).unwrap().z_k;
    pass &= z_small < 0.1 && worst_baseline <= BASELINE_TOL;
    outcome(
        pass,
        format!("dense agreement <= {DENSE_ZK_TOL:.0e}; z3<=z2 on grid; z_k<1/2 for t<=0.5, k<=4; baseline drift {worst_baseline:.1e} {notes:?}"),
    )
}

fn criterion_8() -> Outcome {
    let opts = LanczosOptions::default();
    let mut pass = true;
    let mut details = Vec::new();
    for t in [0.3, 0.5] {
        let cert = certify(2, t, 10, &opts).unwrap();
        let open = open_gap_bound(cert.gamma_k, cert.z_k).unwrap();
        let Some(pinned) = cert.final_bound else {
            return outcome(false, format!("no pinned bound at t={t}"));
        };
        for n in [6, 8] {
            let g_open = exact_gap(n, t, false).unwrap();
            let g_pinned = exact_gap(n, t, true).unwrap();
            pass &= g_open >= open && g_pinned >= pinned;
            details.push(format!("t={t} n={n}: {g_open:.4}>={open:.4}, {g_pinned:.4}>={pinned:.4}"));
        }
    }
    outcome(pass, details.join("; "))
}

fn criterion_9() -> Outcome {
    let t = 0.5;
    let ns = [8, 10, 12, 14];
    let table = FloatNormTable::build_float(14, t).unwrap();
    let mut pass = true;
    let mut details = Vec::new();
    let mut worst_identity: f64 = 0.0;
    type Geometry = fn(usize) -> ApproxStateSpec;
    let geometries: [(&str, Geometry); 3] = [
        ("atgs", |n| ApproxStateSpec {
            kind: ApproxKind::Atgs { cutoff: n.div_ceil(8) },
            segments: vec![n / 2, n - n / 2],
            class: Imbalance::new(1, 1),
        }),
        ("pgs_right", |n| ApproxStateSpec {
            kind: ApproxKind::PgsRight,
            segments: vec![n / 2, n - n / 2],
            class: Imbalance::new(0, n - 2),
        }),
        ("pgs_left", |n| ApproxStateSpec {
            kind: ApproxKind::PgsLeft,
            segments: vec![n / 2, n - n / 2],
            class: Imbalance::new(n - 2, 0),
        }),
    ];
    for (name, geometry) in geometries {
        let mut defects = Vec::new();
        for n in ns {
            let spec = geometry(n);
            let exact = ground_vector(n, spec.class.p, spec.class.q, t).unwrap();
            let d = overlap_defect(&exact.state, &approx_vector(&spec, t).unwrap()).unwrap().value;
            worst_identity = worst_identity.max((d - identity_defect(&spec, &table).unwrap()).abs());
            defects.push(d);
        }
        let monotone = defects.windows(2).all(|w| w[1] < w[0]);
        pass &= monotone;
        let shown: Vec<String> = defects.iter().map(|d| format!("{d:.3e}")).collect();
        details.push(format!("{name} [{}]", shown.join(", ")));
    }
    pass &= worst_identity <= IDENTITY_DEFECT_TOL;
    outcome(pass, format!("t={t}, n={ns:?}: {}; identity mismatch {worst_identity:.1e}", details.join(", ")))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Duration); 9] = [
        ("initial-data exactness", criterion_1, Duration::from_secs(1)),
        ("oracle equivalence", criterion_2, Duration::from_secs(60)),
        ("ground-space degeneracy", criterion_3, Duration::from_secs(300)),
        ("boundary penalty", criterion_4, Duration::from_secs(60)),
        ("pi-ratio lemmas", criterion_5, Duration::from_secs(60)),
        ("figure reproduction", criterion_6, Duration::from_secs(60)),
        ("criterion at desk scale", criterion_7, Duration::from_secs(3600)),
        ("certificate soundness", criterion_8, Duration::from_secs(600)),
        ("approximation proxies", criterion_9, Duration::from_secs(600)),
    ];
    let mut failures = 0;
    for (i, (name, run, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let mut o = run();
        let elapsed = start.elapsed();
        if elapsed > *limit {
            o.pass = false;
            o.detail.push_str(&format!(" [over time limit {limit:?}]"));
        }
        failures += !o.pass as usize;
        println!(
            "criterion {} {:<26} {} ({:.2}s) {}",
            i + 1,
            name,
            if o.pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            o.detail
        );
    }
    println!("acceptance: {}/{} passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
