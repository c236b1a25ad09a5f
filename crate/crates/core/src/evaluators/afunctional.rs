use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{face_geometry, Background, MetricField, TensorField};
use crate::polytope::Patch;

use super::linearization::{tangential_components, x_jets};

/// Values at one point of the face.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AFunctionalSample {
    pub point: Vec<f64>,
    /// `tr h dV(nu_bar) - V <A_bar, h>`
    pub direct: f64,
    /// `(dV(nu_bar) - H_bar V / (n - 1)) tr h`
    pub umbilic: f64,
    /// `max |A_bar - H_bar gamma_bar / (n - 1)|`
    pub umbilicity_defect: f64,
    /// `max |A_bar - (V A_E + dV(nu_E) gamma_E)|`; `A_E = 0` on an affine face.
    pub conformal_mismatch: f64,
    pub mean_curvature: f64,
    pub trace_h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AFunctionalReport {
    pub n: usize,
    pub samples: Vec<AFunctionalSample>,
    pub max_abs_direct: f64,
    pub max_abs_umbilic: f64,
    pub max_umbilicity_defect: f64,
    pub max_conformal_mismatch: f64,
    /// `max |tr h|`, the scale against which the values above are small.
    pub max_abs_trace: f64,
}

/// Evaluates `A(V, Sigma)` for `V = 1 / y_1` on an affine hyperplane of
/// upper half space at the given parameter points, directly and through the
/// umbilic reduction, and checks the conformal formula for `A_bar`.
///
/// Only the background of `bg` is used; `h` is the test tensor.
pub fn check_a_functional(bg: &MetricField, h: &TensorField, patch: &Patch, samples: &[Vec<f64>]) -> Result<AFunctionalReport> {
    if bg.kind() != Background::HyperbolicUpperHalfSpace {
        return Err(Error::Metric("the A functional check needs the upper half space background".into()));
    }
    let n = bg.dim();
    if h.dim() != n || patch.origin.len() != n {
        return Err(Error::Dimension(format!("tensor, face and metric must share dimension {n}")));
    }
    if patch.tangents.len() + 1 != n {
        return Err(Error::Dimension("the face must be a hyperplane".into()));
    }
    let normal = euclidean_normal(&patch.tangents)?;
    let k = n - 1;
    let mut out = Vec::with_capacity(samples.len());
    for u in samples {
        let x = patch.point(u);
        if !(x[0] > 0.0) {
            return Err(Error::ParameterDomain(format!("sample {x:?} lies outside y_1 > 0")));
        }
        let m = bg.background_at(&x)?;
        let face = face_geometry(&m, &normal, &patch.tangents)?;
        let hj = h.eval(&x_jets(&x))?;
        let h_tan = tangential_components(&hj, &patch.tangents, n);
        let v = 1.0 / x[0];
        let dv_nu = -face.nu[0] / (x[0] * x[0]);
        let gi = &face.gamma_inv;
        let mut tr = 0.0;
        let mut a_dot_h = 0.0;
        for p in 0..k {
            for q in 0..k {
                tr += gi[p][q] * h_tan[p][q];
                for r in 0..k {
                    for s in 0..k {
                        a_dot_h += gi[p][r] * gi[q][s] * face.second_form[r][s] * h_tan[p][q];
                    }
                }
            }
        }
        let hbar = face.mean_curvature;
        let direct = tr * dv_nu - v * a_dot_h;
        let umbilic = (dv_nu - hbar * v / k as f64) * tr;
        // Euclidean data: gamma_E from the tangents, dV along the Euclidean unit normal
        let gamma_e = gram_euclidean(&patch.tangents);
        let dv_nu_e = -normal[0] / (x[0] * x[0]);
        let mut umbilicity_defect: f64 = 0.0;
        let mut conformal_mismatch: f64 = 0.0;
        for p in 0..k {
            for q in 0..k {
                let a = face.second_form[p][q];
                umbilicity_defect = umbilicity_defect.max((a - hbar * face.gamma[p][q] / k as f64).abs());
                conformal_mismatch = conformal_mismatch.max((a - dv_nu_e * gamma_e[p][q]).abs());
            }
        }
        out.push(AFunctionalSample {
            point: x,
            direct,
            umbilic,
            umbilicity_defect,
            conformal_mismatch,
            mean_curvature: hbar,
            trace_h: tr,
        });
    }
    let max = |f: fn(&AFunctionalSample) -> f64| out.iter().map(f).fold(0.0, f64::max);
    Ok(AFunctionalReport {
        n,
        max_abs_direct: max(|s| s.direct.abs()),
        max_abs_umbilic: max(|s| s.umbilic.abs()),
        max_umbilicity_defect: max(|s| s.umbilicity_defect),
        max_conformal_mismatch: max(|s| s.conformal_mismatch),
        max_abs_trace: max(|s| s.trace_h.abs()),
        samples: out,
    })
}

/// Euclidean unit covector orthogonal to the tangents, by Gram-Schmidt on
/// the coordinate basis.
fn euclidean_normal(tangents: &[Vec<f64>]) -> Result<Vec<f64>> {
    let n = tangents[0].len();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n);
    let orth = |v: &[f64], basis: &Vec<Vec<f64>>| {
        let mut w = v.to_vec();
        for b in basis {
            let d: f64 = w.iter().zip(b).map(|(a, c)| a * c).sum();
            for (wi, bi) in w.iter_mut().zip(b) {
                *wi -= d * bi;
            }
        }
        let norm = w.iter().map(|a| a * a).sum::<f64>().sqrt();
        (norm, w)
    };
    for t in tangents {
        let (norm, w) = orth(t, &basis);
        if norm < 1e-12 {
            return Err(Error::Degenerate("face tangents are linearly dependent".into()));
        }
        basis.push(w.iter().map(|a| a / norm).collect());
    }
    let (norm, w) = (0..n)
        .map(|i| {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            orth(&e, &basis)
        })
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .expect("n >= 1");
    Ok(w.iter().map(|a| a / norm).collect())
}

fn gram_euclidean(tangents: &[Vec<f64>]) -> Vec<Vec<f64>> {
    tangents
        .iter()
        .map(|a| tangents.iter().map(|b| a.iter().zip(b).map(|(p, q)| p * q).sum()).collect())
        .collect()
}
