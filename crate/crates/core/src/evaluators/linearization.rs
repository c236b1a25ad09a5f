//! Numerical checks of the first-order expansions of the mean curvature
//! under `g = gbar + eps h`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{Expr, Jet2, Params};
use crate::geometry::{d_trace, divergence, face_geometry, mean_curvature, FaceGeometry, MetricAt, MetricField, TensorField};
use crate::harness::log_log_slope;
use crate::polytope::Patch;
use crate::quadrature::{integrate, QuadPlan};

use super::ah::mass_one_form;

pub const DEFAULT_EPSILONS: [f64; 4] = [1e-1, 1e-2, 1e-3, 1e-4];

/// Residual norms `int |R(eps)| dsigma_bar` along a ladder of `eps`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearizationReport {
    pub weighted: bool,
    pub epsilons: Vec<f64>,
    pub residuals: Vec<f64>,
    /// `int |first-order term| dsigma_bar` at each `eps`, for scale.
    pub first_order: Vec<f64>,
    /// Least-squares slope of `log residual` against `log eps`; absent when
    /// the residual vanishes identically.
    pub slope: Option<f64>,
    /// The residual is zero to rounding at every `eps`.
    pub exact: bool,
    pub converged: bool,
}

impl LinearizationReport {
    /// Slope inside `[lo, hi]`, or an identically vanishing residual.
    pub fn passes(&self, lo: f64, hi: f64) -> bool {
        self.exact || self.slope.is_some_and(|s| (lo..=hi).contains(&s))
    }
}

/// Inverse and determinant of a jet matrix by Gauss-Jordan elimination with
/// partial pivoting on values.
fn jet_inverse(a: &[Vec<Jet2>]) -> Result<(Vec<Vec<Jet2>>, Jet2)> {
    let k = a.len();
    let d = a[0][0].dim();
    let zero = Jet2::constant(d, 0.0);
    let one = Jet2::constant(d, 1.0);
    let mut m: Vec<Vec<Jet2>> = a.to_vec();
    let mut inv: Vec<Vec<Jet2>> = (0..k).map(|i| (0..k).map(|j| if i == j { one } else { zero }).collect()).collect();
    let mut det = one;
    for c in 0..k {
        let p = (c..k)
            .max_by(|&i, &j| m[i][c].value().abs().total_cmp(&m[j][c].value().abs()))
            .expect("nonempty");
        if m[p][c].value() == 0.0 {
            return Err(Error::Degenerate("singular jet matrix".into()));
        }
        if p != c {
            m.swap(p, c);
            inv.swap(p, c);
            det = -det;
        }
        let piv = m[c][c];
        det = det * piv;
        let r = piv.recip();
        for j in 0..k {
            m[c][j] = m[c][j] * r;
            inv[c][j] = inv[c][j] * r;
        }
        for i in 0..k {
            if i == c {
                continue;
            }
            let f = m[i][c];
            for j in 0..k {
                m[i][j] = m[i][j] - f * m[c][j];
                inv[i][j] = inv[i][j] - f * inv[c][j];
            }
        }
    }
    Ok((inv, det))
}

/// Tangential data of the face as jets in its parameters `u`.
struct FaceJets {
    /// `sqrt(det gamma_bar)`
    area: Jet2,
    /// `X^a = gamma_bar^ab h(nu_bar, e_b)`
    x: Vec<Jet2>,
}

fn face_jets(bg: &MetricField, h: &TensorField, normal: &[f64], patch: &Patch, u: &[f64]) -> Result<FaceJets> {
    let n = bg.dim();
    let k = patch.tangents.len();
    let x0 = patch.point(u);
    let zero_hess = vec![vec![0.0; k]; k];
    let xj: Vec<Jet2> = (0..n)
        .map(|i| {
            let grad: Vec<f64> = patch.tangents.iter().map(|t| t[i]).collect();
            Jet2::from_parts(x0[i], &grad, &zero_hess)
        })
        .collect();
    let g = bg.eval(&xj)?;
    let hj = h.eval(&xj)?;
    let gm: Vec<Vec<Jet2>> = (0..n).map(|i| (0..n).map(|j| g[i * n + j]).collect()).collect();
    let (ginv, _) = jet_inverse(&gm)?;
    let zero = Jet2::constant(k, 0.0);
    let mut nn = zero;
    for i in 0..n {
        for j in 0..n {
            nn = nn + ginv[i][j].scale(normal[i] * normal[j]);
        }
    }
    let inv_norm = nn.sqrt().recip();
    let nu: Vec<Jet2> = (0..n)
        .map(|i| (0..n).fold(zero, |s, j| s + ginv[i][j].scale(normal[j])) * inv_norm)
        .collect();
    let e = &patch.tangents;
    let gamma: Vec<Vec<Jet2>> = (0..k)
        .map(|a| {
            (0..k)
                .map(|b| {
                    let mut s = zero;
                    for i in 0..n {
                        for j in 0..n {
                            let c = e[a][i] * e[b][j];
                            if c != 0.0 {
                                s = s + gm[i][j].scale(c);
                            }
                        }
                    }
                    s
                })
                .collect()
        })
        .collect();
    let (gamma_inv, det) = jet_inverse(&gamma)?;
    let hnu: Vec<Jet2> = (0..k)
        .map(|b| {
            let mut s = zero;
            for i in 0..n {
                for j in 0..n {
                    if e[b][j] != 0.0 {
                        s = s + hj[i * n + j] * nu[i].scale(e[b][j]);
                    }
                }
            }
            s
        })
        .collect();
    let x = (0..k).map(|a| (0..k).fold(zero, |s, b| s + gamma_inv[a][b] * hnu[b])).collect();
    Ok(FaceJets { area: det.sqrt(), x })
}

/// `div_gamma_bar (f X) = (1 / sqrt gamma) d_a (sqrt gamma f X^a)` for a
/// scalar `f` with value `f0` and tangential derivatives `df`.
fn tangential_divergence(fj: &FaceJets, f0: f64, df: &[f64]) -> f64 {
    let a = fj.area.value();
    let mut s = 0.0;
    for (i, x) in fj.x.iter().enumerate() {
        let w = fj.area * *x;
        s += f0 * w.d(i) / a + x.value() * df[i];
    }
    s
}

pub(super) fn x_jets(x: &[f64]) -> Vec<Jet2> {
    (0..x.len()).map(|i| Jet2::variable(x.len(), i, x[i])).collect()
}

/// Pointwise quantities shared by both checks.
struct Pointwise {
    bg: MetricAt,
    face: FaceGeometry,
    h: Vec<Jet2>,
    /// `h(e_a, e_b)`
    h_tan: Vec<Vec<f64>>,
}

fn pointwise(bg: &MetricField, h: &TensorField, normal: &[f64], patch: &Patch, x: &[f64]) -> Result<Pointwise> {
    let m = bg.at(x)?;
    let face = face_geometry(&m, normal, &patch.tangents)?;
    let hj = h.eval(&x_jets(x))?;
    let h_tan = tangential_components(&hj, &patch.tangents, m.n);
    Ok(Pointwise { bg: m, face, h: hj, h_tan })
}

/// `h(e_a, e_b)` for row-major `h` jets.
pub(super) fn tangential_components(h: &[Jet2], tangents: &[Vec<f64>], n: usize) -> Vec<Vec<f64>> {
    tangents
        .iter()
        .map(|a| {
            tangents
                .iter()
                .map(|b| {
                    let mut s = 0.0;
                    for i in 0..n {
                        for j in 0..n {
                            s += h[i * n + j].value() * a[i] * b[j];
                        }
                    }
                    s
                })
                .collect()
        })
        .collect()
}

impl Pointwise {
    /// Mean curvature of the face in `gbar + eps h`.
    fn perturbed_mean_curvature(&self, normal: &[f64], eps: f64) -> Result<f64> {
        let jets: Vec<Jet2> = self.bg.jets().iter().zip(&self.h).map(|(g, h)| *g + h.scale(eps)).collect();
        let m = MetricAt::from_jets(&self.bg.x, jets)
            .map_err(|_| Error::ParameterDomain(format!("eps = {eps} makes gbar + eps h indefinite at {:?}", self.bg.x)))?;
        mean_curvature(&m, normal)
    }

    /// `<h, A_bar>_gamma_bar`
    fn h_dot_a(&self) -> f64 {
        let gi = &self.face.gamma_inv;
        let a = &self.face.second_form;
        let k = gi.len();
        let mut s = 0.0;
        for p in 0..k {
            for q in 0..k {
                for r in 0..k {
                    for t in 0..k {
                        s += gi[p][r] * gi[q][t] * self.h_tan[p][q] * a[r][t];
                    }
                }
            }
        }
        s
    }

    /// `tr_gamma_bar h`
    fn tangential_trace(&self) -> f64 {
        let gi = &self.face.gamma_inv;
        let k = gi.len();
        (0..k).flat_map(|a| (0..k).map(move |b| (a, b))).map(|(a, b)| gi[a][b] * self.h_tan[a][b]).sum()
    }

    fn along_normal(&self, covector: &[f64]) -> f64 {
        covector.iter().zip(&self.face.nu).map(|(a, b)| a * b).sum()
    }
}

fn validate(bg: &MetricField, h: &TensorField, normal: &[f64], patch: &Patch, epsilons: &[f64]) -> Result<()> {
    let n = bg.dim();
    if h.dim() != n || normal.len() != n || patch.origin.len() != n {
        return Err(Error::Dimension(format!("metric, direction and face must share dimension {n}")));
    }
    if patch.tangents.len() + 1 != n {
        return Err(Error::Dimension(format!(
            "face has {} tangents, a hypersurface needs {}",
            patch.tangents.len(),
            n - 1
        )));
    }
    if epsilons.len() < 2 || epsilons.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::Invalid("need at least two positive eps values".into()));
    }
    Ok(())
}

/// Residual of `2 (H - H_bar) = (d tr h - div h)(nu_bar) - div X - <h, A_bar>`
/// for `h -> eps h`, integrated in absolute value over the face.
pub fn check_linearization(
    bg: &MetricField,
    h: &TensorField,
    normal: &[f64],
    patch: &Patch,
    epsilons: &[f64],
    plan: &QuadPlan,
) -> Result<LinearizationReport> {
    validate(bg, h, normal, patch, epsilons)?;
    let ne = epsilons.len();
    let res = integrate(&patch.domain, ne + 1, &slope_plan(plan), |u, out| {
        let x = patch.point(u);
        let p = pointwise(bg, h, normal, patch, &x)?;
        let fj = face_jets(bg, h, normal, patch, u)?;
        let hbar = p.face.mean_curvature;
        let dtr = d_trace(&p.bg, &p.h);
        let div = divergence(&p.bg, &p.h);
        let flux: Vec<f64> = dtr.iter().zip(&div).map(|(a, b)| a - b).collect();
        let k = patch.tangents.len();
        let first = p.along_normal(&flux) - tangential_divergence(&fj, 1.0, &vec![0.0; k]) - p.h_dot_a();
        let da = p.face.area_element;
        for (c, &eps) in epsilons.iter().enumerate() {
            let lhs = 2.0 * (p.perturbed_mean_curvature(normal, eps)? - hbar);
            out[c] = (lhs - eps * first).abs() / (eps * eps) * da;
        }
        out[ne] = first.abs() * da;
        Ok(())
    })?;
    Ok(report(false, epsilons, &res))
}

/// Residual of the weighted expansion
/// `U(V)(nu_bar) = 2 V (H_bar - H) - div(V X) + tr h dV(nu_bar) - V <A_bar, h>`
/// for `h -> eps h`, integrated in absolute value over the face.
#[allow(clippy::too_many_arguments)]
pub fn check_weighted_linearization(
    bg: &MetricField,
    h: &TensorField,
    v: &Expr,
    params: &Params,
    normal: &[f64],
    patch: &Patch,
    epsilons: &[f64],
    plan: &QuadPlan,
) -> Result<LinearizationReport> {
    validate(bg, h, normal, patch, epsilons)?;
    if v.dim() != bg.dim() {
        return Err(Error::Dimension(format!("potential is {}-dimensional", v.dim())));
    }
    let ne = epsilons.len();
    let tape = v.compile(params)?;
    let res = integrate(&patch.domain, ne + 1, &slope_plan(plan), |u, out| {
        let x = patch.point(u);
        let p = pointwise(bg, h, normal, patch, &x)?;
        let fj = face_jets(bg, h, normal, patch, u)?;
        let vj = tape.eval_at(&x)?;
        let (v0, dv) = (vj.value(), vj.grad().to_vec());
        let dv_tan: Vec<f64> = patch
            .tangents
            .iter()
            .map(|t| t.iter().zip(&dv).map(|(a, b)| a * b).sum())
            .collect();
        let u_nu = p.along_normal(&mass_one_form(&p.bg, &p.h, v0, &dv));
        let a_term = p.tangential_trace() * p.along_normal(&dv) - v0 * p.h_dot_a();
        let div_vx = tangential_divergence(&fj, v0, &dv_tan);
        let hbar = p.face.mean_curvature;
        let da = p.face.area_element;
        for (c, &eps) in epsilons.iter().enumerate() {
            let h_eps = p.perturbed_mean_curvature(normal, eps)?;
            let rhs = 2.0 * v0 * (hbar - h_eps) - eps * div_vx + eps * a_term;
            out[c] = (eps * u_nu - rhs).abs() / (eps * eps) * da;
        }
        out[ne] = u_nu.abs() * da;
        Ok(())
    })?;
    Ok(report(true, epsilons, &res))
}

/// `|R|` has kinks where `R` changes sign, which stalls tight adaptive
/// refinement; a slope fit needs only a few digits.
fn slope_plan(plan: &QuadPlan) -> QuadPlan {
    QuadPlan {
        rtol: plan.rtol.max(SLOPE_RTOL),
        ..plan.clone()
    }
}

const SLOPE_RTOL: f64 = 1e-4;

/// Components arrive as `|R| / eps^2` and the first-order term at `eps = 1`, so
/// that every component has unit scale during refinement.
fn report(weighted: bool, epsilons: &[f64], res: &crate::quadrature::QuadResult) -> LinearizationReport {
    let ne = epsilons.len();
    let residuals: Vec<f64> = res.value[..ne].iter().zip(epsilons).map(|(r, e)| r * e * e).collect();
    let first_order: Vec<f64> = epsilons.iter().map(|e| e * res.value[ne]).collect();
    // zero to rounding relative to the first-order term
    let exact = residuals
        .iter()
        .zip(&first_order)
        .all(|(r, f)| *r <= 1e-12 * f.max(f64::MIN_POSITIVE));
    let slope = if exact { None } else { log_log_slope(epsilons, &residuals) };
    LinearizationReport {
        weighted,
        epsilons: epsilons.to_vec(),
        residuals,
        first_order,
        slope,
        exact,
        converged: res.converged,
    }
}
