//! Built-in metrics and user metric files.

mod builtin;
mod file;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{Expr, Node, Params};
use crate::geometry::{Background, MetricField, TensorField};

pub use builtin::{builtin, builtin_names, conformal, perturbed_flat, uhs_map};
pub use file::{load_metric_file, parse_metric_file};

/// Asymptotic model of the end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Asymptotic {
    #[serde(rename = "AF")]
    Flat,
    #[serde(rename = "AH-hyperboloid")]
    Hyperboloid,
    #[serde(rename = "AH-uhs")]
    UpperHalfSpace,
}

impl Asymptotic {
    pub fn label(self) -> &'static str {
        match self {
            Asymptotic::Flat => "AF",
            Asymptotic::Hyperboloid => "AH-hyperboloid",
            Asymptotic::UpperHalfSpace => "AH-uhs",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        match s {
            "AF" => Some(Asymptotic::Flat),
            "AH-hyperboloid" => Some(Asymptotic::Hyperboloid),
            "AH-uhs" => Some(Asymptotic::UpperHalfSpace),
            _ => None,
        }
    }

    pub fn is_hyperbolic(self) -> bool {
        !matches!(self, Asymptotic::Flat)
    }
}

impl fmt::Display for Asymptotic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Coordinates the component expressions are written in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Chart {
    /// Evaluated in the coordinates the expressions are written in.
    Native,
    /// Written in hyperboloid coordinates `z`, evaluated in upper half space
    /// coordinates `y` through the standard isometry.
    HyperboloidToUpperHalfSpace,
}

/// Which builtin, if any, a spec came from, for parameter-domain checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Family {
    Custom,
    Euclidean,
    SchwarzschildIsotropic,
    SchwarzschildAreal,
    Hyperbolic,
    AdsSchwarzschild,
    Conformal,
    PerturbedFlat,
}

/// A metric definition: component expressions, parameters with defaults,
/// background model and decay metadata.
#[derive(Debug, Clone)]
pub struct MetricSpec {
    pub name: String,
    pub dim: usize,
    pub asymptotic: Asymptotic,
    /// Declared decay rate: `p` for AF ends, `q` for AH ends.
    pub decay: f64,
    /// Parameters in declaration order, with defaults.
    pub params: Vec<(String, f64)>,
    /// Upper-triangle components of `g`, row-major.
    pub components: Vec<Expr>,
    /// Component text as written.
    pub sources: Vec<String>,
    /// Cancellation-free `h = g - gbar`, when known in closed form.
    pub perturbation: Option<Vec<Expr>>,
    pub chart: Chart,
    pub(crate) family: Family,
}

impl PartialEq for MetricSpec {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.dim == other.dim
            && self.asymptotic == other.asymptotic
            && self.decay.to_bits() == other.decay.to_bits()
            && self.params == other.params
            && self.components == other.components
            && self.sources == other.sources
            && self.chart == other.chart
    }
}

impl MetricSpec {
    /// Defaults overridden by `overrides`; unknown names are an error.
    pub fn resolve_params(&self, overrides: &Params) -> Result<Params> {
        let mut out: Params = self.params.iter().cloned().collect();
        for (k, v) in overrides {
            if !out.contains_key(k) {
                let known: Vec<&str> = self.params.iter().map(|(n, _)| n.as_str()).collect();
                return Err(Error::Invalid(format!(
                    "metric `{}` has no parameter `{k}` (known: {})",
                    self.name,
                    if known.is_empty() { "none".to_string() } else { known.join(", ") }
                )));
            }
            if !v.is_finite() {
                return Err(Error::ParameterDomain(format!("parameter {k} = {v} is not finite")));
            }
            out.insert(k.clone(), *v);
        }
        Ok(out)
    }

    /// Checks the declared decay rate against the asymptotic type.
    pub fn validate_decay(&self) -> Result<()> {
        validate_decay(self.asymptotic, self.dim, self.decay)
    }

    /// Decay rate in effect for `params` (the perturbed-flat family carries
    /// its rate as a parameter).
    pub fn effective_decay(&self, params: &Params) -> f64 {
        match self.family {
            Family::PerturbedFlat => params.get("p").copied().unwrap_or(self.decay),
            _ => self.decay,
        }
    }

    /// Background model in the evaluation chart.
    pub fn background_kind(&self) -> Background {
        match (self.asymptotic, self.chart) {
            (Asymptotic::Flat, _) => Background::Euclidean,
            (Asymptotic::Hyperboloid, Chart::Native) => Background::HyperbolicHyperboloid,
            _ => Background::HyperbolicUpperHalfSpace,
        }
    }

    /// Smallest coordinate radius at which the metric is defined for `params`.
    pub fn inner_radius(&self, params: &Params) -> f64 {
        let n = self.dim as i32;
        let m = params.get("m").copied().unwrap_or(0.0);
        match self.family {
            // 1 + m/(2 r^(n-2)) > 0
            Family::SchwarzschildIsotropic if m < 0.0 => (-m / 2.0).powf(1.0 / (n - 2) as f64),
            // 1 - 2m r^(2-n) > 0
            Family::SchwarzschildAreal if m > 0.0 => (2.0 * m).powf(1.0 / (n - 2) as f64),
            // 1 + r^2 - 2m r^(2-n) > 0
            Family::AdsSchwarzschild if m > 0.0 => {
                let f = |r: f64| 1.0 + r * r - 2.0 * m * r.powi(2 - n);
                let (mut lo, mut hi) = (1e-12, 1.0 + 2.0 * m);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if f(mid) > 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                hi
            }
            _ => 0.0,
        }
    }

    /// Errors if the region `|x| >= radius` reaches the singular set.
    pub fn check_region(&self, params: &Params, radius: f64) -> Result<()> {
        let inner = self.inner_radius(params);
        if inner > 0.0 && radius <= inner {
            return Err(Error::ParameterDomain(format!(
                "metric `{}` is singular at coordinate radius {inner:.6} but the working region reaches radius {radius:.6}",
                self.name
            )));
        }
        Ok(())
    }

    /// Compiles the metric with parameter overrides into a field in the
    /// evaluation chart.
    pub fn field(&self, overrides: &Params) -> Result<MetricField> {
        let params = self.resolve_params(overrides)?;
        let decay = self.effective_decay(&params);
        validate_decay(self.asymptotic, self.dim, decay)?;
        let n = self.dim;
        let bg_model = match self.asymptotic {
            Asymptotic::Flat => Asymptotic::Flat,
            _ if self.chart == Chart::HyperboloidToUpperHalfSpace => Asymptotic::Hyperboloid,
            a => a,
        };
        let bg_exprs = background_exprs(bg_model, n);
        let h_exprs = match &self.perturbation {
            Some(h) => h.clone(),
            None => self
                .components
                .iter()
                .zip(&bg_exprs)
                .map(|(g, b)| difference(g, b))
                .collect(),
        };
        let h = TensorField::from_exprs(n, h_exprs, &params)?;
        let kind = self.background_kind();
        let field = match self.chart {
            Chart::Native => {
                let bg = match bg_exprs_field(bg_model, n)? {
                    Some(f) => f,
                    None => TensorField::from_exprs(n, bg_exprs, &params)?,
                };
                MetricField::new(bg, Some(h), kind)?
            }
            Chart::HyperboloidToUpperHalfSpace => {
                let map = uhs_map(n)?;
                let h = h.pullback(&map, &params)?;
                let bg = TensorField::from_exprs(n, background_exprs(Asymptotic::UpperHalfSpace, n), &params)?;
                MetricField::new(bg, Some(h), kind)?
            }
        };
        Ok(field.with_decay(Some(decay)))
    }

    /// Renders the spec in the metric file format.
    pub fn to_file_string(&self) -> String {
        file::serialize(self)
    }
}

pub(crate) fn validate_decay(asymptotic: Asymptotic, dim: usize, decay: f64) -> Result<()> {
    let n = dim as f64;
    match asymptotic {
        Asymptotic::Flat => {
            if !(decay > (n - 2.0) / 2.0) {
                return Err(Error::Metric(format!(
                    "decay rate violates p > (n-2)/2: p = {decay}, n = {dim}"
                )));
            }
        }
        _ => {
            if !(decay > n / 2.0) {
                return Err(Error::Metric(format!(
                    "decay rate violates q > n/2: q = {decay}, n = {dim}"
                )));
            }
        }
    }
    Ok(())
}

/// Background expressions in the coordinates of `model`.
pub(crate) fn background_exprs(model: Asymptotic, n: usize) -> Vec<Expr> {
    let mut out = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in i..n {
            let e = match model {
                Asymptotic::Flat => Expr::constant(if i == j { 1.0 } else { 0.0 }, n),
                Asymptotic::Hyperboloid => {
                    // delta_ij - z_i z_j / (1 + r^2)
                    let zz = format!("x{}*x{}/(1 + r^2)", i + 1, j + 1);
                    let src = if i == j { format!("1 - {zz}") } else { format!("-{zz}") };
                    Expr::parse(&src, n).expect("builtin background parses")
                }
                Asymptotic::UpperHalfSpace => {
                    if i == j {
                        Expr::parse("1/x1^2", n).expect("builtin background parses")
                    } else {
                        Expr::constant(0.0, n)
                    }
                }
            };
            out.push(e);
        }
    }
    out
}

fn bg_exprs_field(model: Asymptotic, n: usize) -> Result<Option<TensorField>> {
    Ok(match model {
        Asymptotic::Flat => Some(TensorField::Identity(n)),
        _ => None,
    })
}

fn difference(g: &Expr, b: &Expr) -> Expr {
    match b.root() {
        Node::Num(v) if *v == 0.0 => g.clone(),
        _ => g.sub(b),
    }
}
