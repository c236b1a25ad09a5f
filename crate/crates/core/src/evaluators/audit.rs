use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::MetricField;
use crate::polytope::{check_sequence_conditions, Patch, SequencePlan, SequenceReport};
use crate::quadrature::{Domain, QuadPlan};

use super::poly::poly_terms;

/// Angle bound `c` used for condition d) of the sequence.
pub const AUDIT_ANGLE_BOUND: f64 = 1e-2;

/// Scalar curvature below this counts as a violation of `R >= 0`.
const CURVATURE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditElement {
    pub scale: f64,
    /// `int_F H dsigma`
    pub face: f64,
    /// `int_E (alpha - alpha_bar) dmu`
    pub edge: f64,
    /// `-face + edge`
    pub combination: f64,
    pub quad_error: f64,
    /// `combination >= -quad_error`
    pub nonnegative: bool,
    /// Smallest scalar curvature among the face centres.
    pub min_scalar_curvature: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub elements: Vec<AuditElement>,
    /// Scales whose combination is negative beyond quadrature error.
    pub flagged: Vec<f64>,
    /// Face centres where `R(g) < 0` was observed.
    pub curvature_violations: Vec<Vec<f64>>,
    pub conditions: SequenceReport,
}

impl AuditReport {
    pub fn all_nonnegative(&self) -> bool {
        self.flagged.is_empty()
    }
}

fn centre(patch: &Patch) -> Vec<f64> {
    let u = match &patch.domain {
        Domain::Box { lo, hi, .. } => lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect(),
        Domain::Polygon { vertices } => {
            let k = vertices.len() as f64;
            vec![
                vertices.iter().map(|v| v[0]).sum::<f64>() / k,
                vertices.iter().map(|v| v[1]).sum::<f64>() / k,
            ]
        }
    };
    patch.point(&u)
}

/// `-int_F H dsigma + int_E (alpha - alpha_bar) dmu` along a sequence,
/// checked against `>= -(quadrature error)`.
///
/// Never fails on a violation: negative combinations, negative scalar
/// curvature and broken sequence conditions are all reported.
pub fn positivity_audit(g: &MetricField, seq: &SequencePlan, plan: &QuadPlan) -> Result<AuditReport> {
    let conditions = check_sequence_conditions(seq, AUDIT_ANGLE_BOUND)?;
    let mut elements = Vec::with_capacity(seq.len());
    let mut flagged = Vec::new();
    let mut curvature_violations = Vec::new();
    for j in 0..seq.len() {
        let p = seq.element(j)?;
        let t = poly_terms(g, &p, plan)?;
        let quad_error = t.face_error + t.edge_error;
        let combination = t.combination();
        let nonnegative = combination >= -quad_error;
        let mut min_r = f64::INFINITY;
        for f in &p.faces {
            let x = centre(&f.patch);
            let r = g.scalar_curvature(&x)?;
            if r < -CURVATURE_TOLERANCE {
                curvature_violations.push(x);
            }
            min_r = min_r.min(r);
        }
        if !nonnegative {
            flagged.push(seq.scales[j]);
        }
        elements.push(AuditElement {
            scale: seq.scales[j],
            face: t.face,
            edge: t.edge,
            combination,
            quad_error,
            nonnegative,
            min_scalar_curvature: min_r,
        });
    }
    Ok(AuditReport {
        elements,
        flagged,
        curvature_violations,
        conditions,
    })
}
