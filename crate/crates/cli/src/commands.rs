use motzkin_core::criterion::{
    boundary_penalty, certify, compute_gamma_k, compute_zk, open_gap_bound, penalty_ratio, GapCertificate,
    DEFAULT_PENALTY_N,
};
use motzkin_core::eigen::LanczosOptions;
use motzkin_core::groundspace::{
    approx_vector, ground_vector, identity_defect, overlap_defect, ApproxKind, ApproxStateSpec,
};
use motzkin_core::normtable::{convergence_series, fit_rate, lemma_report, ratios, ExactNormTable, FloatNormTable};
use motzkin_core::{Exec, Imbalance};
use serde_json::{json, Value};

use crate::config::{Format, Mode, RunConfig, TValue};
use crate::table::{Cell, Table};
use crate::{Artifact, CliError, Outcome};

/// Defect window for the exponential fits.
pub const FIT_WINDOW: (f64, f64) = (1e-10, 1e-2);

/// Table depth used as the `k -> infinity` stand-in for the ratio limits.
pub const RATIO_LIMIT_K: usize = 300;

pub const DEFAULT_NORMS_KMAX: usize = 10;
pub const DEFAULT_RATIOS_KMAX: usize = 40;
pub const DEFAULT_PENALTY_RATIO_NMAX: usize = 200;
pub const DEFAULT_PAIRS: [(usize, usize); 5] = [(0, 1), (1, 1), (2, 1), (1, 2), (2, 2)];
pub const DEFAULT_OVERLAP_NS: [usize; 4] = [8, 10, 12, 14];

/// File-name tag for a `t` value.
fn tag(t: &TValue) -> String {
    t.text.replace('/', "_")
}

fn ext(format: Format) -> &'static str {
    match format {
        Format::Csv => "csv",
        Format::Json => "json",
    }
}

fn render(table: &Table, format: Format) -> String {
    match format {
        Format::Csv => table.to_csv(),
        Format::Json => table.to_json(),
    }
}

fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

pub fn cmd_norms(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let kmax = cfg.kmax.unwrap_or(DEFAULT_NORMS_KMAX);
    let mut artifacts = Vec::new();
    match cfg.mode {
        Mode::Exact => {
            let table = ExactNormTable::build_exact(kmax)?;
            let mut out = Table::new(&["k", "p", "q", "polynomial"]);
            for (k, p, q, poly) in table.entries() {
                out.push(vec![k.into(), p.into(), q.into(), poly.to_string().into()]);
            }
            artifacts.push(Artifact::new(format!("norms_exact.{}", ext(cfg.format)), render(&out, cfg.format)));
        }
        Mode::Float => {
            for t in &cfg.t {
                let table = FloatNormTable::build_float(kmax, t.value)?;
                let mut out = Table::new(&["t", "k", "p", "q", "value"]);
                for (k, p, q, v) in table.entries() {
                    out.push(vec![t.value.into(), k.into(), p.into(), q.into(), (*v).into()]);
                }
                artifacts.push(Artifact::new(
                    format!("norms_t{}.{}", tag(t), ext(cfg.format)),
                    render(&out, cfg.format),
                ));
            }
        }
    }
    Ok(Outcome::new(artifacts))
}

pub fn cmd_ratios(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let kmax = cfg.kmax.unwrap_or(DEFAULT_RATIOS_KMAX);
    if kmax == 0 {
        return Err(CliError::Usage("--kmax must be at least 1".into()));
    }
    let pairs: Vec<(usize, usize)> = if cfg.pairs.is_empty() { DEFAULT_PAIRS.to_vec() } else { cfg.pairs.clone() };
    let mut artifacts = Vec::new();
    for t in &cfg.t {
        let deep = FloatNormTable::build_float(kmax.max(RATIO_LIMIT_K), t.value)?;
        let deep_ratios = ratios(&deep);
        let mut fits = Vec::new();
        for &(p, q) in &pairs {
            let mut series_table = Table::new(&["k", "kminus", "pi", "defect"]);
            let entry = match convergence_series(&deep_ratios, p, q, 1..=kmax) {
                Ok(series) => {
                    for d in &series {
                        let k = d.kminus + p + q;
                        series_table.push(vec![
                            k.into(),
                            d.kminus.into(),
                            deep_ratios.pi(k, p, q).into(),
                            d.defect.into(),
                        ]);
                    }
                    match fit_rate(&series, FIT_WINDOW) {
                        Ok(fit) => json!({ "p": p, "q": q, "fit": fit }),
                        Err(e) => json!({ "p": p, "q": q, "error": e.to_string() }),
                    }
                }
                Err(e) => json!({ "p": p, "q": q, "error": e.to_string() }),
            };
            fits.push(entry);
            artifacts.push(Artifact::new(
                format!("ratios_t{}_p{p}_q{q}.{}", tag(t), ext(cfg.format)),
                render(&series_table, cfg.format),
            ));
        }
        artifacts.push(Artifact::new(
            format!("fits_t{}.json", tag(t)),
            json_text(&json!({
                "t": t.value,
                "kmax": kmax,
                "limit_k": deep_ratios.limit_k,
                "window": [FIT_WINDOW.0, FIT_WINDOW.1],
                "fits": fits,
            })),
        ));
        let shallow = FloatNormTable::build_float(kmax, t.value)?;
        let report = lemma_report(&shallow, &ratios(&shallow));
        artifacts.push(Artifact::new(
            format!("lemmas_t{}.json", tag(t)),
            json_text(&serde_json::to_value(&report).expect("report serializes")),
        ));
    }
    Ok(Outcome::new(artifacts))
}

fn points(cfg: &RunConfig) -> Vec<(TValue, usize)> {
    let ks = if cfg.k.is_empty() { vec![2] } else { cfg.k.clone() };
    cfg.t
        .iter()
        .flat_map(|t| ks.iter().map(move |&k| (t.clone(), k)))
        .collect()
}

pub fn cmd_criterion(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let opts = LanczosOptions::default();
    let pts = points(cfg);
    let results = Exec::default().map(&pts, |(t, k)| -> Result<_, CliError> {
        let z = compute_zk(*k, t.value, &opts)?;
        let g = compute_gamma_k(*k, t.value, &opts)?;
        Ok((z, g))
    });
    let mut out = Table::new(&[
        "t",
        "k",
        "z_k",
        "z_argmax_p",
        "z_argmax_q",
        "gamma_k",
        "gamma_argmin_p",
        "gamma_argmin_q",
        "open_bound",
        "criterion_holds",
        "solver_iters",
        "max_residual",
    ]);
    let mut inconclusive = 0;
    for ((t, k), r) in pts.iter().zip(results) {
        let (z, g) = r?;
        let bound = open_gap_bound(g.gamma_k, z.z_k);
        inconclusive += bound.is_none() as usize;
        out.push(vec![
            t.value.into(),
            (*k).into(),
            z.z_k.into(),
            z.argmax.p.into(),
            z.argmax.q.into(),
            g.gamma_k.into(),
            g.argmin.p.into(),
            g.argmin.q.into(),
            bound.into(),
            bound.is_some().into(),
            (z.solver.iters + g.solver.iters).into(),
            z.solver.max_residual.max(g.solver.max_residual).into(),
        ]);
    }
    let mut outcome = Outcome::new(vec![Artifact::new(format!("criterion.{}", ext(cfg.format)), render(&out, cfg.format))]);
    outcome.inconclusive = inconclusive;
    Ok(outcome)
}

pub fn cmd_certify(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let opts = LanczosOptions::default();
    let n_penalty = cfg.n.iter().copied().max().unwrap_or(DEFAULT_PENALTY_N);
    let pts = points(cfg);
    let results = Exec::default().map(&pts, |(t, k)| certify(*k, t.value, n_penalty, &opts));
    let mut artifacts = Vec::new();
    let mut summary = Table::new(&[
        "t", "k", "gamma_k", "z_k", "open_bound", "c2", "epsilon", "final_bound", "conclusive",
    ]);
    let mut inconclusive = 0;
    for ((t, k), r) in pts.iter().zip(results) {
        let c: GapCertificate = r?;
        inconclusive += !c.conclusive as usize;
        summary.push(vec![
            c.t.into(),
            c.k.into(),
            c.gamma_k.into(),
            c.z_k.into(),
            c.open_bound.into(),
            c.c2.into(),
            c.epsilon.into(),
            c.final_bound.into(),
            c.conclusive.into(),
        ]);
        artifacts.push(Artifact::new(
            format!("certificate_t{}_k{k}.json", tag(t)),
            json_text(&serde_json::to_value(&c).expect("certificate serializes")),
        ));
    }
    artifacts.push(Artifact::new(format!("certify_summary.{}", ext(cfg.format)), render(&summary, cfg.format)));
    let mut outcome = Outcome::new(artifacts);
    outcome.inconclusive = inconclusive;
    Ok(outcome)
}

pub fn cmd_penalty(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let ns: Vec<usize> = if cfg.n.is_empty() { (1..=DEFAULT_PENALTY_N).collect() } else { cfg.n.clone() };
    let nmax_ratio = cfg.kmax.unwrap_or(DEFAULT_PENALTY_RATIO_NMAX);
    let mut artifacts = Vec::new();
    for t in &cfg.t {
        let mut summary = Table::new(&[
            "n",
            "minimum",
            "argmin_p",
            "argmin_q",
            "expectation_1_0",
            "ratio",
            "ratio_times_t",
            "relative_change",
        ]);
        let mut sectors = Table::new(&["n", "p", "q", "expectation"]);
        let mut previous: Option<f64> = None;
        for &n in &ns {
            let r = boundary_penalty(n, t.value)?;
            let e10 = r
                .sectors
                .iter()
                .find(|(c, _)| *c == Imbalance::new(1, 0))
                .map(|s| s.1);
            summary.push(vec![
                n.into(),
                r.minimum.into(),
                r.argmin.p.into(),
                r.argmin.q.into(),
                e10.into(),
                r.ratio.into(),
                r.ratio_times_t.into(),
                previous.map(|m| (r.minimum - m).abs() / m).into(),
            ]);
            previous = Some(r.minimum);
            for (c, v) in &r.sectors {
                sectors.push(vec![n.into(), c.p.into(), c.q.into(), (*v).into()]);
            }
        }
        let table = FloatNormTable::build_float(nmax_ratio.max(1), t.value)?;
        let mut series = Table::new(&["n", "ratio", "ratio_times_t", "one_minus_t", "ratio_at_least_one_minus_t"]);
        for n in 1..=nmax_ratio {
            let ratio = penalty_ratio(&table, n)?;
            series.push(vec![
                n.into(),
                ratio.into(),
                (t.value * ratio).into(),
                (1.0 - t.value).into(),
                (ratio >= 1.0 - t.value).into(),
            ]);
        }
        let e = ext(cfg.format);
        artifacts.push(Artifact::new(format!("penalty_t{}.{e}", tag(t)), render(&summary, cfg.format)));
        artifacts.push(Artifact::new(format!("penalty_sectors_t{}.{e}", tag(t)), render(&sectors, cfg.format)));
        artifacts.push(Artifact::new(format!("penalty_ratio_t{}.{e}", tag(t)), render(&series, cfg.format)));
    }
    Ok(Outcome::new(artifacts))
}

/// The approximate states reported by `overlaps` at chain length `n`.
///
/// ATGS and FGS use class `(1, 1)` with halves and thirds. The PGS states
/// use halves and the class with exactly two balanced steps, `(0, n-2)` and
/// its mirror, so the unbalanced excess grows with `n`.
pub fn overlap_specs(n: usize, cutoff: Option<usize>) -> Vec<ApproxStateSpec> {
    let cut = cutoff.unwrap_or(n.div_ceil(8));
    let half = vec![n / 2, n - n / 2];
    let mut specs = vec![
        ApproxStateSpec { kind: ApproxKind::Atgs { cutoff: cut }, segments: half.clone(), class: Imbalance::new(1, 1) },
        ApproxStateSpec {
            kind: ApproxKind::Fgs { cutoff: cut },
            segments: vec![n / 3, n / 3, n - 2 * (n / 3)],
            class: Imbalance::new(1, 1),
        },
    ];
    if n >= 4 {
        specs.push(ApproxStateSpec { kind: ApproxKind::PgsRight, segments: half.clone(), class: Imbalance::new(0, n - 2) });
        specs.push(ApproxStateSpec { kind: ApproxKind::PgsLeft, segments: half, class: Imbalance::new(n - 2, 0) });
    }
    specs
}

fn kind_name(kind: ApproxKind) -> &'static str {
    match kind {
        ApproxKind::Atgs { .. } => "atgs",
        ApproxKind::Fgs { .. } => "fgs",
        ApproxKind::PgsRight => "pgs_right",
        ApproxKind::PgsLeft => "pgs_left",
    }
}

pub fn cmd_overlaps(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let ns: Vec<usize> = if cfg.n.is_empty() { DEFAULT_OVERLAP_NS.to_vec() } else { cfg.n.clone() };
    if let Some(&n) = ns.iter().find(|&&n| n < 3) {
        return Err(CliError::Usage(format!("overlaps needs n >= 3, got {n}")));
    }
    let mut out = Table::new(&[
        "t",
        "kind",
        "n",
        "segments",
        "p",
        "q",
        "cutoff",
        "defect",
        "identity_defect",
        "at_noise_floor",
    ]);
    for t in &cfg.t {
        let table = FloatNormTable::build_float(*ns.iter().max().unwrap(), t.value)?;
        for &n in &ns {
            for spec in overlap_specs(n, cfg.cutoff) {
                let exact = ground_vector(n, spec.class.p, spec.class.q, t.value)?;
                let d = overlap_defect(&exact.state, &approx_vector(&spec, t.value)?)?;
                let cutoff = match spec.kind {
                    ApproxKind::Atgs { cutoff } | ApproxKind::Fgs { cutoff } => Cell::from(cutoff),
                    _ => Cell::Empty,
                };
                let segments: Vec<String> = spec.segments.iter().map(usize::to_string).collect();
                out.push(vec![
                    t.value.into(),
                    kind_name(spec.kind).into(),
                    n.into(),
                    segments.join("+").into(),
                    spec.class.p.into(),
                    spec.class.q.into(),
                    cutoff,
                    d.value.into(),
                    identity_defect(&spec, &table)?.into(),
                    d.at_noise_floor.into(),
                ]);
            }
        }
    }
    Ok(Outcome::new(vec![Artifact::new(format!("overlaps.{}", ext(cfg.format)), render(&out, cfg.format))]))
}
