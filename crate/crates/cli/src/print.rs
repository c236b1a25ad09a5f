//! Plain-text summaries for standard output.

use polymass::evaluators::{AFunctionalReport, AuditReport, LinearizationReport, MassReport};
use polymass::expr::Params;
use polymass::harness::Study;
use polymass::metrics::builtin;

fn params(p: &Params) -> String {
    if p.is_empty() {
        return "-".into();
    }
    p.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(", ")
}

fn row(label: &str, value: impl std::fmt::Display) {
    println!("{label:<16} {value}");
}

fn term(label: &str, value: Option<f64>, error: Option<f64>) {
    if let Some(v) = value {
        match error {
            Some(e) => row(label, format!("{v:.12e}  (+/- {e:.1e})")),
            None => row(label, format!("{v:.12e}")),
        }
    }
}

pub fn report(r: &MassReport) {
    row("evaluator", &r.evaluator);
    row("n", r.n);
    row("params", params(&r.params));
    row("geometry", format!("{} ({}), scale {}", r.geometry.kind, r.geometry.label, r.geometry.scale));
    term("face", r.terms.face, r.errors.face);
    term("edge", r.terms.edge, r.errors.edge);
    term("flux", r.terms.flux, r.errors.flux);
    for (k, v) in &r.terms.extra {
        term(k, Some(*v), None);
    }
    row("normalization", format!("{:.12e}", r.normalization));
    row(
        "total",
        format!("{:.12}  (+/- {:.1e}{})", r.total, r.errors.total, if r.errors.converged { "" } else { ", not converged" }),
    );
    for note in &r.notes {
        row("note", note);
    }
}

pub fn linearization(r: &LinearizationReport, lo: f64, hi: f64) {
    row("weighted", r.weighted);
    println!("{:<16} {:>14} {:>14}", "epsilon", "residual", "first order");
    for ((e, res), f) in r.epsilons.iter().zip(&r.residuals).zip(&r.first_order) {
        println!("{e:<16e} {res:>14.6e} {f:>14.6e}");
    }
    match r.slope {
        Some(s) => row("slope", format!("{s:.4}")),
        None => row("slope", "-"),
    }
    let pass = r.passes(lo, hi);
    row(
        "verdict",
        if r.exact {
            "PASS (residual vanishes)".to_string()
        } else {
            format!("{} (slope in [{lo}, {hi}])", if pass { "PASS" } else { "FAIL" })
        },
    );
}

pub fn a_functional(r: &AFunctionalReport, tolerance: f64) {
    println!(
        "{:<24} {:>14} {:>14} {:>14}",
        "point", "direct", "umbilic", "mean curv."
    );
    for s in &r.samples {
        let p: Vec<String> = s.point.iter().map(|x| format!("{x:.3}")).collect();
        println!(
            "{:<24} {:>14.3e} {:>14.3e} {:>14.6}",
            p.join(","),
            s.direct,
            s.umbilic,
            s.mean_curvature
        );
    }
    row("max |tr h|", format!("{:.3e}", r.max_abs_trace));
    row("umbilicity", format!("{:.3e}", r.max_umbilicity_defect));
    row("conformal", format!("{:.3e}", r.max_conformal_mismatch));
    let bound = tolerance * (1.0 + r.max_abs_trace);
    let pass = r.max_abs_direct <= bound && r.max_abs_umbilic <= bound;
    row("verdict", format!("{} (|A| <= {bound:.1e})", if pass { "PASS" } else { "FAIL" }));
}

pub fn audit(r: &AuditReport) {
    println!(
        "{:>10} {:>16} {:>16} {:>16} {:>10} {:>6}",
        "scale", "face", "edge", "combination", "quad err", "sign"
    );
    for e in &r.elements {
        println!(
            "{:>10} {:>16.8e} {:>16.8e} {:>16.8e} {:>10.1e} {:>6}",
            e.scale,
            e.face,
            e.edge,
            e.combination,
            e.quad_error,
            if e.nonnegative { "ok" } else { "NEG" }
        );
    }
    for f in &r.conditions.failures {
        println!("sequence condition {f}");
    }
    if !r.curvature_violations.is_empty() {
        println!("negative scalar curvature at {} face centres", r.curvature_violations.len());
    }
    row(
        "verdict",
        if r.all_nonnegative() {
            "all combinations nonnegative".to_string()
        } else {
            format!("negative at scales {:?}", r.flagged)
        },
    );
}

pub fn study(s: &Study) {
    row("evaluator", &s.evaluator);
    row("metric", format!("{} (n = {}, {})", s.metric, s.n, params(&s.params)));
    row("sequence", &s.sequence);
    println!("{:>5} {:>10} {:>20} {:>10} {:>10}", "index", "scale", "total", "quad err", "time (s)");
    for (i, r) in s.reports.iter().enumerate() {
        let t = s.wall_times.get(i).copied().unwrap_or(0.0);
        println!("{i:>5} {:>10} {:>20.12} {:>10.1e} {t:>10.2}", r.geometry.scale, r.total, r.errors.total);
    }
    match &s.extrapolation {
        Some(e) => {
            row("limit", format!("{:.10}  (+/- {:.1e})", e.limit, e.uncertainty));
            if let Some(f) = &e.fit {
                row("fit", format!("c = {:.4e}, rate = {:.4}", f.coefficient, f.rate));
            }
        }
        None => row("limit", "- (fewer than three elements)"),
    }
    if let Some(e) = &s.face_only {
        row("without edges", format!("{:.10}", e.limit));
    }
    for (k, v) in &s.decay_slopes {
        row(&format!("slope {k}"), format!("{v:.4}"));
    }
    if let Some(f) = &s.failure {
        row("failed", f);
    }
}

pub fn metrics(n: usize, names: &[&str]) {
    println!("{:<32} {:<16} {:>8}  params", "name", "asymptotics", "decay");
    for name in names {
        match builtin(name, n, &Params::new()) {
            Ok(m) => {
                let p: Vec<String> = m.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
                let decay = if m.decay.is_finite() { m.decay.to_string() } else { "inf".into() };
                println!(
                    "{name:<32} {:<16} {decay:>8}  {}",
                    m.asymptotic.label(),
                    if p.is_empty() { "-".to_string() } else { p.join(", ") }
                );
            }
            Err(e) => println!("{name:<32} unavailable for n = {n}: {e}"),
        }
    }
}
