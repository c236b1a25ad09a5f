//! Mass evaluators: flux integrals on spheres, polyhedral mass, slicing
//! masses, the hyperbolic mass functional and its prism formula, and
//! verifiers for the linearization identities.

mod adm;
mod afunctional;
mod ah;
mod audit;
mod linearization;
mod poly;
mod prism;
mod slice;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::expr::Params;
use crate::polytope::FaceTag;
use crate::quadrature::{ordered_map, QuadPlan, QuadResult};
use crate::Result;

pub use adm::adm_mass;
pub use afunctional::{check_a_functional, AFunctionalReport, AFunctionalSample};
pub use ah::{ah_mass, ah_mass_vector, mass_one_form, AhMassVector, StaticPotential};
pub use audit::{positivity_audit, AuditElement, AuditReport, AUDIT_ANGLE_BOUND};
pub use linearization::{
    check_linearization, check_weighted_linearization, LinearizationReport, DEFAULT_EPSILONS,
};
pub use poly::{poly_mass, poly_terms, PolyTerms};
pub use prism::ah_prism_mass;
pub use slice::{slice_mass_3d, slice_mass_nd, slice_value_2d, slice_value_nd, SquareSlice};

/// Integral over one face or edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PieceTerm {
    pub index: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tag: Option<FaceTag>,
    pub value: f64,
    pub error: f64,
}

/// The separately integrated terms of a mass formula.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Terms {
    pub face: Option<f64>,
    pub edge: Option<f64>,
    pub flux: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub per_face: Vec<PieceTerm>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub per_edge: Vec<PieceTerm>,
    /// Evaluator-specific variants, e.g. the bottom-face-only prism total.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub extra: BTreeMap<String, f64>,
}

/// Quadrature error estimates matching [`Terms`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TermErrors {
    pub face: Option<f64>,
    pub edge: Option<f64>,
    pub flux: Option<f64>,
    /// Error of `total`, after normalization.
    pub total: f64,
    pub converged: bool,
}

/// Where a report was evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryInfo {
    /// `sphere`, `polytope`, `slices` or `prism`.
    pub kind: String,
    pub label: String,
    /// The radius `r`, half-width `L` or scale factor of the element.
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassReport {
    pub evaluator: String,
    pub n: usize,
    pub params: Params,
    pub geometry: GeometryInfo,
    pub terms: Terms,
    pub errors: TermErrors,
    /// The factor dividing the raw combination of terms.
    pub normalization: f64,
    pub total: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl MassReport {
    pub fn with_params(mut self, params: &Params) -> Self {
        self.params = params.clone();
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

/// `(n - 1) omega_(n-1)`, the normalization shared by the flat evaluators.
pub(crate) fn flat_normalization(n: usize) -> f64 {
    (n as f64 - 1.0) * crate::sphere_area(n)
}

/// Integrates `count` pieces concurrently on `plan.workers` threads, each
/// piece serially, and returns the results in piece order.
pub(crate) fn integrate_pieces<F>(count: usize, plan: &QuadPlan, f: F) -> Result<Vec<QuadResult>>
where
    F: Fn(usize, &QuadPlan) -> Result<QuadResult> + Sync + Send,
{
    let inner = plan.serial();
    ordered_map(count, plan.workers, |i| f(i, &inner))
}

/// Sum of component `c` over results, in order, with the summed error.
pub(crate) fn sum_component(results: &[QuadResult], c: usize) -> (f64, f64) {
    let mut v = crate::quadrature::Kahan::default();
    let mut e = 0.0;
    for r in results {
        v.add(r.value[c]);
        e += r.error[c];
    }
    (v.value(), e)
}
