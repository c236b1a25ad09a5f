//! Convergence studies: an evaluator run along a sequence of growing
//! spheres or polyhedra, with power-law extrapolation of the totals.

mod config;
mod emit;
mod fit;

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluators::{
    adm_mass, ah_mass, ah_prism_mass, poly_mass, slice_mass_3d, slice_mass_nd, MassReport, StaticPotential,
};
use crate::expr::Params;
use crate::polytope::{ah_prism_condition, check_sequence_conditions, parse_sigma, SequenceReport};

pub use config::{
    apply_setting, load_study_config, parse_scales, parse_study_config, EvaluatorKind, Format, MetricRef,
    SequenceKind, StudySpec, KEYS,
};
pub use emit::{emit, emit_all, study_csv, study_json, study_svg};
pub use fit::{extrapolate, fit_power_law, log_log_slope, Extrapolation, PowerFit};

/// The outcome of a study, complete or cut short by an evaluator failure.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Study {
    pub evaluator: String,
    pub metric: String,
    pub n: usize,
    pub params: Params,
    pub sequence: String,
    pub scales: Vec<f64>,
    pub reports: Vec<MassReport>,
    /// Limit of the totals; absent below three elements.
    pub extrapolation: Option<Extrapolation>,
    /// Limit of the totals with the edge contribution removed.
    pub face_only: Option<Extrapolation>,
    /// Log-log slopes against scale of `|edge|` and of every extra term.
    pub decay_slopes: BTreeMap<String, f64>,
    pub conditions: Option<SequenceReport>,
    pub warnings: Vec<String>,
    /// The error that stopped the study, if any.
    pub failure: Option<String>,
    /// Seconds per element. Not serialized, so output is reproducible.
    #[serde(skip)]
    pub wall_times: Vec<f64>,
}

impl PartialEq for Study {
    fn eq(&self, other: &Self) -> bool {
        // wall times differ between runs by nature
        self.evaluator == other.evaluator
            && self.metric == other.metric
            && self.n == other.n
            && self.params == other.params
            && self.sequence == other.sequence
            && self.scales == other.scales
            && self.reports == other.reports
            && self.extrapolation == other.extrapolation
            && self.face_only == other.face_only
            && self.decay_slopes == other.decay_slopes
            && self.conditions == other.conditions
            && self.warnings == other.warnings
            && self.failure == other.failure
    }
}

impl Study {
    pub fn is_complete(&self) -> bool {
        self.failure.is_none()
    }

    /// Totals of the evaluated elements.
    pub fn totals(&self) -> Vec<f64> {
        self.reports.iter().map(|r| r.total).collect()
    }

    /// Contribution of the edge term to each total.
    pub fn edge_contributions(&self) -> Vec<f64> {
        self.reports
            .iter()
            .map(|r| r.terms.edge.map_or(0.0, |e| e / r.normalization))
            .collect()
    }
}

/// Runs the evaluator along the sequence, in order.
///
/// Configuration errors are returned as `Err`; an evaluator failure part
/// way through ends the study with `failure` set and the finished elements
/// kept.
pub fn run_study(spec: &StudySpec) -> Result<Study> {
    spec.validate()?;
    let mut mspec = spec.metric_spec()?;
    let n = mspec.dim;
    if spec.evaluator == EvaluatorKind::Prism {
        mspec = mspec.to_upper_half_space()?;
    }
    let params = mspec.resolve_params(&spec.params)?;
    let g = mspec.field(&spec.params)?;
    let seq = spec.sequence_plan(n)?;
    let potential = match &spec.potential {
        Some(c) => StaticPotential::new(c.clone()),
        None => StaticPotential::basis(n, 0),
    };
    if spec.evaluator == EvaluatorKind::AhMass && potential.coeffs.len() != n + 1 {
        return Err(Error::Dimension(format!(
            "potential needs {} coefficients, got {}",
            n + 1,
            potential.coeffs.len()
        )));
    }

    let mut warnings = Vec::new();
    let mut conditions = None;
    if let Some(seq) = &seq {
        if spec.sequence != SequenceKind::Prisms {
            let report = check_sequence_conditions(seq, spec.angle_bound)?;
            warnings.extend(report.failures.iter().map(|f| format!("sequence condition {f}")));
            conditions = Some(report);
        } else {
            let q = mspec.effective_decay(&params);
            let c = ah_prism_condition(n, q, &parse_sigma(&spec.sigma)?)?;
            if !c.satisfied {
                warnings.push(format!("sigma(L) = {} does not meet the prism decay condition for q = {q}", spec.sigma));
            }
        }
    }

    let mut reports = Vec::with_capacity(spec.scales.len());
    let mut wall_times = Vec::with_capacity(spec.scales.len());
    let mut failure = None;
    for (j, &s) in spec.scales.iter().enumerate() {
        let start = Instant::now();
        let result = (|| -> Result<MassReport> {
            let report = match spec.evaluator {
                EvaluatorKind::Adm => {
                    mspec.check_region(&params, s)?;
                    adm_mass(&g, s, &spec.quad)?
                }
                EvaluatorKind::AhMass => {
                    mspec.check_region(&params, s)?;
                    ah_mass(&g, &potential, s, &spec.quad)?
                }
                EvaluatorKind::PolyMass => {
                    let p = seq.as_ref().expect("polytope sequence").element(j)?;
                    mspec.check_region(&params, p.inner_radius())?;
                    poly_mass(&g, &p, &spec.quad)?
                }
                EvaluatorKind::SliceMass => {
                    mspec.check_region(&params, s)?;
                    if n == 3 {
                        slice_mass_3d(&g, s, &spec.quad)?
                    } else {
                        slice_mass_nd(&g, s, &spec.quad)?
                    }
                }
                EvaluatorKind::Prism => {
                    let p = seq.as_ref().expect("prism sequence").element(j)?;
                    ah_prism_mass(&g, &p, &spec.quad)?
                }
            };
            let mut report = report.with_params(&params);
            // the sequence scale, not the inradius a polytope report records
            report.geometry.scale = s;
            Ok(report)
        })();
        wall_times.push(start.elapsed().as_secs_f64());
        match result {
            Ok(r) => {
                if !r.errors.converged {
                    warnings.push(format!("quadrature did not reach tolerance at scale {s}"));
                }
                reports.push(r);
            }
            Err(e) => {
                failure = Some(format!("scale {s}: {e}"));
                break;
            }
        }
    }

    let mut study = Study {
        evaluator: spec.evaluator.label().into(),
        metric: mspec.name.clone(),
        n,
        params,
        sequence: match &seq {
            Some(s) => s.describe(),
            None => format!("spheres at {}", spec.scales.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(", ")),
        },
        scales: spec.scales.clone(),
        reports,
        extrapolation: None,
        face_only: None,
        decay_slopes: BTreeMap::new(),
        conditions,
        warnings,
        failure,
        wall_times,
    };
    summarize(&mut study);
    Ok(study)
}

/// Edge terms below this are rounding noise of a vanishing term.
const EDGE_FLOOR: f64 = 1e-12;

/// Fills in the extrapolations and decay slopes from the reports.
fn summarize(study: &mut Study) {
    let k = study.reports.len();
    let scales = &study.scales[..k];
    let totals = study.totals();
    let errors: Vec<f64> = study.reports.iter().map(|r| r.errors.total).collect();
    study.extrapolation = extrapolate(scales, &totals, &errors);
    let edge = study.edge_contributions();
    let face_only: Vec<f64> = totals.iter().zip(&edge).map(|(t, e)| t - e).collect();
    study.face_only = extrapolate(scales, &face_only, &errors);
    let mut slopes = BTreeMap::new();
    let edges: Vec<f64> = study.reports.iter().map(|r| r.terms.edge.unwrap_or(0.0)).collect();
    // an edge term at rounding level has no meaningful decay rate
    let significant = edges.iter().any(|e| e.abs() > EDGE_FLOOR);
    if let Some(s) = log_log_slope(scales, &edges).filter(|_| significant) {
        slopes.insert("edge".to_string(), s);
    }
    let keys: Vec<String> = study.reports.first().map(|r| r.terms.extra.keys().cloned().collect()).unwrap_or_default();
    for key in keys {
        let v: Vec<f64> = study.reports.iter().map(|r| r.terms.extra.get(&key).copied().unwrap_or(0.0)).collect();
        if let Some(s) = log_log_slope(scales, &v) {
            slopes.insert(key, s);
        }
    }
    study.decay_slopes = slopes;
}
