use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{Jet2, Params};
use crate::geometry::{area_ratio, d_trace, divergence, trace, Background, MetricAt, MetricField};
use crate::quadrature::{integrate_sphere, QuadPlan};

use super::{GeometryInfo, MassReport, TermErrors, Terms};

/// A static potential `V = a_0 t + sum_i a_i z_i` on the hyperboloid chart,
/// `t = sqrt(1 + |z|^2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StaticPotential {
    pub coeffs: Vec<f64>,
}

impl StaticPotential {
    pub fn new(coeffs: Vec<f64>) -> Self {
        StaticPotential { coeffs }
    }

    /// `t` for `i = 0`, `z_i` for `i >= 1`.
    pub fn basis(n: usize, i: usize) -> Self {
        let mut coeffs = vec![0.0; n + 1];
        coeffs[i] = 1.0;
        StaticPotential { coeffs }
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `V(z)` and `dV(z)`.
    pub fn eval(&self, z: &[f64]) -> (f64, Vec<f64>) {
        let basis = basis_values(z);
        let mut v = 0.0;
        let mut dv = vec![0.0; z.len()];
        for (a, (b, db)) in self.coeffs.iter().zip(&basis) {
            v += a * b;
            for (d, e) in dv.iter_mut().zip(db) {
                *d += a * e;
            }
        }
        (v, dv)
    }
}

/// Values and differentials of `t, z_1, ..., z_n`.
fn basis_values(z: &[f64]) -> Vec<(f64, Vec<f64>)> {
    let n = z.len();
    let t = (1.0 + z.iter().map(|v| v * v).sum::<f64>()).sqrt();
    let mut out = Vec::with_capacity(n + 1);
    out.push((t, z.iter().map(|v| v / t).collect()));
    for i in 0..n {
        let mut d = vec![0.0; n];
        d[i] = 1.0;
        out.push((z[i], d));
    }
    out
}

/// The mass 1-form `U(V) = V (div h - d tr h) + (tr h) dV - h(grad V, .)`
/// as covector components, with `div`, `tr` and `grad` taken in `bg`.
pub fn mass_one_form(bg: &MetricAt, h: &[Jet2], v: f64, dv: &[f64]) -> Vec<f64> {
    let n = bg.n;
    let div = divergence(bg, h);
    let dtr = d_trace(bg, h);
    let tr = trace(bg, h);
    let grad = bg.raise(dv);
    (0..n)
        .map(|j| {
            let hgrad: f64 = (0..n).map(|i| h[i * n + j].value() * grad[i]).sum();
            v * (div[j] - dtr[j]) + tr * dv[j] - hgrad
        })
        .collect()
}

/// Components `p_0 = m(t)`, `p_i = m(z_i)` at one radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AhMassVector {
    pub p: Vec<f64>,
    pub errors: Vec<f64>,
    pub radius: f64,
    pub converged: bool,
}

fn check_hyperbolic(g: &MetricField) -> Result<()> {
    if g.kind() != Background::HyperbolicHyperboloid {
        return Err(Error::Metric(
            "the hyperbolic mass functional needs a metric over the hyperboloid background".into(),
        ));
    }
    if let Some(q) = g.decay() {
        let half = g.dim() as f64 / 2.0;
        if q <= half {
            return Err(Error::ParameterDomain(format!("decay rate q = {q} must exceed n/2 = {half}")));
        }
    }
    Ok(())
}

/// Integrates `U(V_c)(nu_bar)` over `|z| = r` for several potentials at
/// once, with the background normal and measure.
fn flux<F>(g: &MetricField, r: f64, len: usize, plan: &QuadPlan, potentials: F) -> Result<crate::quadrature::QuadResult>
where
    F: Fn(&[f64]) -> Vec<(f64, Vec<f64>)> + Sync,
{
    check_hyperbolic(g)?;
    plan.validate()?;
    integrate_sphere(g.dim(), r, len, plan, |z, normal, out| {
        let bg = g.background_at(z)?;
        let h = g.perturbation_at(z)?;
        let norm = bg.inner_co(normal, normal).sqrt();
        let nu_co: Vec<f64> = normal.iter().map(|v| v / norm).collect();
        let nu = bg.raise(&nu_co);
        let ratio = area_ratio(&bg, normal);
        for (o, (v, dv)) in out.iter_mut().zip(potentials(z)) {
            let u = mass_one_form(&bg, &h, v, &dv);
            *o = u.iter().zip(&nu).map(|(a, b)| a * b).sum::<f64>() * ratio;
        }
        Ok(())
    })
}

/// The mass vector `(p_0, ..., p_n)` at coordinate radius `r`.
pub fn ah_mass_vector(g: &MetricField, r: f64, plan: &QuadPlan) -> Result<AhMassVector> {
    let res = flux(g, r, g.dim() + 1, plan, basis_values)?;
    Ok(AhMassVector {
        p: res.value,
        errors: res.error,
        radius: r,
        converged: res.converged,
    })
}

/// `m(V)` at coordinate radius `r` for one static potential.
pub fn ah_mass(g: &MetricField, v: &StaticPotential, r: f64, plan: &QuadPlan) -> Result<MassReport> {
    let n = g.dim();
    if v.dim() != n {
        return Err(Error::Dimension(format!("potential has {} coefficients, need {}", v.coeffs.len(), n + 1)));
    }
    let res = flux(g, r, 1, plan, |z| vec![v.eval(z)])?;
    Ok(MassReport {
        evaluator: "ah-mass".into(),
        n,
        params: Params::new(),
        geometry: GeometryInfo {
            kind: "sphere".into(),
            label: format!("|z| = r, V = {:?}", v.coeffs),
            scale: r,
        },
        terms: Terms {
            flux: Some(res.value[0]),
            ..Terms::default()
        },
        errors: TermErrors {
            flux: Some(res.error[0]),
            total: res.error[0],
            converged: res.converged,
            ..TermErrors::default()
        },
        normalization: 1.0,
        total: res.value[0],
        notes: vec!["no normalization is applied to the mass functional".into()],
    })
}
