use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expr;

use super::{eval_sigma, Polytope};

/// How the elements of a sequence are generated from their scale.
#[derive(Debug, Clone)]
pub enum SequenceKind {
    /// `[-L, L]^n` with `L` the scale.
    Box { n: usize },
    /// A prototype scaled by the scale factor.
    Prototype(Arc<Polytope>),
    /// Hyperbolic prism with `L` the scale and half-width `sigma(L)`.
    AhPrism { n: usize, sigma: Expr },
}

/// A growing sequence of polyhedra.
#[derive(Debug, Clone)]
pub struct SequencePlan {
    pub kind: SequenceKind,
    pub scales: Vec<f64>,
}

impl SequencePlan {
    /// `L_j = l0 * 2^j`, `j = 0..count`.
    pub fn boxes(n: usize, l0: f64, count: usize) -> SequencePlan {
        SequencePlan {
            kind: SequenceKind::Box { n },
            scales: doubling(l0, count),
        }
    }

    /// `r_j = r0 * 2^j`.
    pub fn prototypes(proto: Polytope, r0: f64, count: usize) -> SequencePlan {
        SequencePlan {
            kind: SequenceKind::Prototype(Arc::new(proto)),
            scales: doubling(r0, count),
        }
    }

    pub fn ah_prisms(n: usize, ls: Vec<f64>, sigma: Expr) -> SequencePlan {
        SequencePlan {
            kind: SequenceKind::AhPrism { n, sigma },
            scales: ls,
        }
    }

    pub fn len(&self) -> usize {
        self.scales.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scales.is_empty()
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            SequenceKind::Box { n } | SequenceKind::AhPrism { n, .. } => *n,
            SequenceKind::Prototype(p) => p.dim,
        }
    }

    /// The `j`-th polyhedron.
    pub fn element(&self, j: usize) -> Result<Polytope> {
        let s = *self
            .scales
            .get(j)
            .ok_or_else(|| Error::Invalid(format!("sequence has {} elements, asked for {j}", self.len())))?;
        match &self.kind {
            SequenceKind::Box { n } => Polytope::cube(*n, s),
            SequenceKind::Prototype(p) => p.scaled(s),
            SequenceKind::AhPrism { n, sigma } => Polytope::ah_prism(*n, s, sigma),
        }
    }

    pub fn describe(&self) -> String {
        let kind = match &self.kind {
            SequenceKind::Box { n } => format!("box n={n}"),
            SequenceKind::Prototype(p) => format!("prototype {}", p.label),
            SequenceKind::AhPrism { n, sigma } => format!("ah-prism n={n} sigma(L)={sigma}"),
        };
        let scales: Vec<String> = self.scales.iter().map(|s| format!("{s}")).collect();
        format!("{kind} at {}", scales.join(", "))
    }
}

fn doubling(s0: f64, count: usize) -> Vec<f64> {
    (0..count).map(|j| s0 * 2f64.powi(j as i32)).collect()
}

/// Quantities entering conditions a)–d) for one element.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElementConditions {
    pub scale: f64,
    pub encloses_origin: bool,
    pub inner_radius: f64,
    /// `|F| / r^(n-1)`
    pub face_ratio: f64,
    /// `|E| / r^(n-2)`
    pub edge_ratio: f64,
    pub min_sin_angle: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceReport {
    pub elements: Vec<ElementConditions>,
    pub c: f64,
    /// Encloses the origin with strictly increasing inner radius.
    pub a: bool,
    /// `|F| / r^(n-1)` stays bounded.
    pub b: bool,
    /// `|E| / r^(n-2)` stays bounded.
    pub c_edges: bool,
    /// `min |sin alpha_bar| >= c`.
    pub d: bool,
    pub failures: Vec<String>,
}

impl SequenceReport {
    pub fn all_pass(&self) -> bool {
        self.failures.is_empty()
    }
}

/// A finite ratio series counts as bounded when it grows by less than a
/// factor of 2 over the sequence.
const GROWTH_ALLOWANCE: f64 = 2.0;

/// Reports conditions a)–d) on every element; never fails on a violation.
pub fn check_sequence_conditions(seq: &SequencePlan, c: f64) -> Result<SequenceReport> {
    if !(c > 0.0) {
        return Err(Error::Invalid(format!("angle bound c must be positive, got {c}")));
    }
    let n = seq.dim() as i32;
    let mut elements = Vec::with_capacity(seq.len());
    for j in 0..seq.len() {
        let p = seq.element(j)?;
        let r = p.inner_radius();
        elements.push(ElementConditions {
            scale: seq.scales[j],
            encloses_origin: p.encloses_origin(),
            inner_radius: r,
            face_ratio: p.face_measure() / r.powi(n - 1),
            edge_ratio: p.edge_measure() / r.powi(n - 2),
            min_sin_angle: p.min_sin_angle(),
        });
    }
    let mut failures = Vec::new();
    let a = !elements.is_empty()
        && elements.iter().all(|e| e.encloses_origin)
        && elements.windows(2).all(|w| w[1].inner_radius > w[0].inner_radius);
    if !a {
        failures.push("a) elements must enclose the origin with r_P strictly increasing".into());
    }
    let bounded = |f: fn(&ElementConditions) -> f64| {
        let first = elements.first().map(f).unwrap_or(0.0);
        elements.iter().map(f).all(|v| v.is_finite() && v <= GROWTH_ALLOWANCE * first)
    };
    let b = bounded(|e| e.face_ratio);
    if !b {
        failures.push("b) |F| / r_P^(n-1) is not bounded".into());
    }
    let c_edges = bounded(|e| e.edge_ratio);
    if !c_edges {
        failures.push("c) |E| / r_P^(n-2) is not bounded".into());
    }
    let min_sin = elements.iter().map(|e| e.min_sin_angle).fold(f64::INFINITY, f64::min);
    let d = min_sin >= c;
    if !d {
        failures.push(format!("d) min |sin alpha_bar| = {min_sin:.6} is below c = {c}"));
    }
    Ok(SequenceReport {
        elements,
        c,
        a,
        b,
        c_edges,
        d,
        failures,
    })
}

/// Check of `sigma(L)^(n-2-2q) = o(e^((q-n+1)L))` along a doubling ladder of `L`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AhCondition {
    /// `(L, log of the ratio)`
    pub log_ratios: Vec<(f64, f64)>,
    pub satisfied: bool,
}

/// The ratio's logarithm must decrease along `L = 8, 16, ..., 512` and end
/// below `-20`.
pub fn ah_prism_condition(n: usize, q: f64, sigma: &Expr) -> Result<AhCondition> {
    let nf = n as f64;
    let mut log_ratios = Vec::new();
    for j in 0..7 {
        let l = 8.0 * 2f64.powi(j);
        let s = eval_sigma(sigma, l)?;
        let v = (nf - 2.0 - 2.0 * q) * s.ln() - (q - nf + 1.0) * l;
        log_ratios.push((l, v));
    }
    let satisfied = log_ratios.windows(2).all(|w| w[1].1 < w[0].1)
        && log_ratios.last().map(|x| x.1 < -20.0).unwrap_or(false);
    Ok(AhCondition { log_ratios, satisfied })
}
