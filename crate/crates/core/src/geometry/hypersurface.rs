//! Pointwise geometry of coordinate-affine hypersurfaces and their edges.
//!
//! Faces are described by a Euclidean outward covector `n` and a set of
//! Euclidean tangent vectors. Sign convention: `H` is the divergence of the
//! outward unit normal, so outward-oriented round spheres have `H > 0`.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use super::point::{Mat, MetricAt};
use crate::error::{Error, Result};

/// Second fundamental form data of an affine face at one point.
#[derive(Debug, Clone)]
pub struct FaceGeometry {
    /// Outward `g`-unit normal vector.
    pub nu: Vec<f64>,
    /// Its covector, `n / |n|_g`.
    pub nu_co: Vec<f64>,
    /// Induced metric in the supplied tangent basis.
    pub gamma: Vec<Vec<f64>>,
    pub gamma_inv: Vec<Vec<f64>>,
    pub second_form: Vec<Vec<f64>>,
    pub mean_curvature: f64,
    /// `sqrt(det gamma)`: the `g` area per unit parameter volume.
    pub area_element: f64,
}

fn unit_normal(m: &MetricAt, normal: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let norm2 = m.inner_co(normal, normal);
    if !(norm2 > 0.0) || !norm2.is_finite() {
        return Err(Error::Degenerate(format!("normal covector {normal:?} has g-norm {norm2}")));
    }
    let s = 1.0 / norm2.sqrt();
    let nu_co: Vec<f64> = normal.iter().map(|v| v * s).collect();
    let nu = m.raise(&nu_co);
    Ok((nu, nu_co))
}

/// Mean curvature of the affine hypersurface with outward covector `normal`:
/// `H = -(g^ij - nu^i nu^j) nu_k Gamma^k_ij`.
pub fn mean_curvature(m: &MetricAt, normal: &[f64]) -> Result<f64> {
    let n = m.n;
    let (nu, nu_co) = unit_normal(m, normal)?;
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            let p = m.ginv[i][j] - nu[i] * nu[j];
            if p == 0.0 {
                continue;
            }
            let mut c = 0.0;
            for k in 0..n {
                c += nu_co[k] * m.gamma[k][i][j];
            }
            s += p * c;
        }
    }
    Ok(-s)
}

/// Mean curvature of the level set of `f` through `m.x`, oriented toward
/// increasing `f`: `H = P^ij (d_ij f - Gamma^k_ij d_k f) / |df|_g`.
pub fn level_set_mean_curvature(m: &MetricAt, df: &[f64], ddf: &Mat) -> Result<f64> {
    let n = m.n;
    let (nu, _) = unit_normal(m, df)?;
    let norm = m.inner_co(df, df).sqrt();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            let p = m.ginv[i][j] - nu[i] * nu[j];
            let mut hess = ddf[i][j];
            for k in 0..n {
                hess -= m.gamma[k][i][j] * df[k];
            }
            s += p * hess;
        }
    }
    Ok(s / norm)
}

/// Gram matrix `g(e_a, e_b)` of a set of vectors.
pub fn gram(m: &MetricAt, vectors: &[Vec<f64>]) -> Vec<Vec<f64>> {
    vectors
        .iter()
        .map(|a| vectors.iter().map(|b| m.inner(a, b)).collect())
        .collect()
}

/// `sqrt(det g(e_a, e_b))`; for Euclidean-orthonormal `e_a` this is the ratio
/// of the `g` volume element to the Euclidean one.
pub fn volume_element(m: &MetricAt, vectors: &[Vec<f64>]) -> Result<f64> {
    if vectors.is_empty() {
        return Ok(1.0);
    }
    let k = vectors.len();
    let gr = gram(m, vectors);
    let det = DMatrix::from_fn(k, k, |a, b| gr[a][b]).determinant();
    if !(det > 0.0) {
        return Err(Error::Degenerate(format!("induced metric has determinant {det}")));
    }
    Ok(det.sqrt())
}

/// Ratio of the `g` area element of a hypersurface to the Euclidean one, from
/// its Euclidean unit normal covector: `sqrt(det g) |N|_g`.
pub fn area_ratio(m: &MetricAt, unit_normal: &[f64]) -> f64 {
    m.volume_density() * m.inner_co(unit_normal, unit_normal).sqrt()
}

/// Full second fundamental form data, `A_ab = -nu_k Gamma^k_ij e_a^i e_b^j`.
pub fn face_geometry(m: &MetricAt, normal: &[f64], tangents: &[Vec<f64>]) -> Result<FaceGeometry> {
    let n = m.n;
    let k = tangents.len();
    let (nu, nu_co) = unit_normal(m, normal)?;
    let gamma = gram(m, tangents);
    let gm = DMatrix::from_fn(k, k, |a, b| gamma[a][b]);
    let det = gm.determinant();
    if !(det > 0.0) {
        return Err(Error::Degenerate(format!("induced metric has determinant {det}")));
    }
    let inv = gm
        .try_inverse()
        .ok_or_else(|| Error::Degenerate("induced metric is singular".into()))?;
    let gamma_inv: Vec<Vec<f64>> = (0..k).map(|a| (0..k).map(|b| inv[(a, b)]).collect()).collect();
    let mut proj = vec![[0.0; crate::expr::MAX_DIM]; n];
    for i in 0..n {
        for j in 0..n {
            proj[i][j] = (0..n).map(|c| nu_co[c] * m.gamma[c][i][j]).sum();
        }
    }
    let mut second_form = vec![vec![0.0; k]; k];
    for a in 0..k {
        for b in a..k {
            let mut s = 0.0;
            for i in 0..n {
                for j in 0..n {
                    s += proj[i][j] * tangents[a][i] * tangents[b][j];
                }
            }
            second_form[a][b] = -s;
            second_form[b][a] = -s;
        }
    }
    let mut h = 0.0;
    for a in 0..k {
        for b in 0..k {
            h += gamma_inv[a][b] * second_form[a][b];
        }
    }
    Ok(FaceGeometry {
        nu,
        nu_co,
        gamma,
        gamma_inv,
        second_form,
        mean_curvature: h,
        area_element: det.sqrt(),
    })
}

/// Interior dihedral angle between two faces meeting along an edge, from
/// their Euclidean outward covectors: `alpha = arccos(-g(nu1, nu2))`, or
/// `2 pi` minus that along a reflex edge.
pub fn dihedral_angle(m: &MetricAt, n1: &[f64], n2: &[f64], reflex: bool) -> Result<f64> {
    let a = m.inner_co(n1, n1);
    let b = m.inner_co(n2, n2);
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::Degenerate("zero face normal at edge".into()));
    }
    let c = (-m.inner_co(n1, n2) / (a * b).sqrt()).clamp(-1.0, 1.0);
    let alpha = c.acos();
    Ok(if reflex { 2.0 * PI - alpha } else { alpha })
}

/// Geodesic curvature of the straight coordinate segment with direction `d`
/// in a 2-dimensional metric, measured against the left normal (inward for a
/// counterclockwise boundary): `kappa = g(nabla_T T, N)`.
pub fn geodesic_curvature(m: &MetricAt, d: &[f64; 2]) -> Result<f64> {
    if m.n != 2 {
        return Err(Error::Dimension(format!("geodesic curvature needs a 2-metric, got {}", m.n)));
    }
    let t2 = m.inner(d, d);
    if !(t2 > 0.0) {
        return Err(Error::Degenerate("zero tangent".into()));
    }
    // left normal covector of d is (-d2, d1)
    let eta = [-d[1], d[0]];
    let (_, nu_co) = unit_normal(m, &eta)?;
    // nabla_d d = Gamma^k_ij d^i d^j d_k for a constant coordinate vector
    let mut s = 0.0;
    for k in 0..2 {
        let mut acc = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                acc += m.gamma[k][i][j] * d[i] * d[j];
            }
        }
        s += nu_co[k] * acc;
    }
    Ok(s / t2)
}

/// Signed turning angle from `t_in` to `t_out` in a 2-metric; positive for a
/// left (counterclockwise) turn.
pub fn turning_angle(m: &MetricAt, t_in: &[f64; 2], t_out: &[f64; 2]) -> Result<f64> {
    let a = m.inner(t_in, t_in);
    let b = m.inner(t_out, t_out);
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::Degenerate("zero tangent".into()));
    }
    let c = (m.inner(t_in, t_out) / (a * b).sqrt()).clamp(-1.0, 1.0);
    let cross = t_in[0] * t_out[1] - t_in[1] * t_out[0];
    Ok(if cross < 0.0 { -c.acos() } else { c.acos() })
}
