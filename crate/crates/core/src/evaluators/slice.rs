use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::expr::Params;
use crate::geometry::{geodesic_curvature, turning_angle, CoordinateSlice, MetricSource};
use crate::polytope::Polytope;
use crate::quadrature::{integrate, Domain, QuadPlan};

use super::poly::{poly_mass, poly_terms};
use super::{flat_normalization, integrate_pieces, sum_component, GeometryInfo, MassReport, PieceTerm, TermErrors, Terms};

/// Boundary data of one square slice `S_t^(k)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SquareSlice {
    /// `int kappa ds` over the four sides.
    pub curvature: f64,
    pub curvature_error: f64,
    /// Sum of the four signed turning angles.
    pub turning: f64,
    pub converged: bool,
}

impl SquareSlice {
    /// `2 pi - int kappa ds - sum beta`
    pub fn mass(&self) -> f64 {
        2.0 * PI - self.curvature - self.turning
    }
}

/// Unit directions of the sides of `[-L, L]^2`, counterclockwise from the
/// bottom.
const DIRECTIONS: [[f64; 2]; 4] = [[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]];

/// Point of side `i` at parameter `s in [-L, L]`.
fn side_point(i: usize, s: f64, l: f64) -> [f64; 2] {
    match i {
        0 => [s, -l],
        1 => [l, s],
        2 => [-s, l],
        _ => [-l, -s],
    }
}

/// Geodesic curvature and turning angles of the square `|y| <= L` in the
/// plane `{x_k = t}` of a 3-metric.
pub fn slice_value_2d<S: MetricSource + ?Sized>(g: &S, k: usize, t: f64, l: f64, plan: &QuadPlan) -> Result<SquareSlice> {
    if g.dim() != 3 {
        return Err(Error::Dimension(format!("square slices need a 3-metric, got {}", g.dim())));
    }
    let slice = CoordinateSlice::new(g, k, t)?;
    let dom = Domain::boxed(vec![-l], vec![l]);
    let mut curvature = crate::quadrature::Kahan::default();
    let mut curvature_error = 0.0;
    let mut converged = true;
    for (i, d) in DIRECTIONS.iter().enumerate() {
        let r = integrate(&dom, 1, plan, |s, out| {
            let m = slice.at(&side_point(i, s[0], l))?;
            out[0] = geodesic_curvature(&m, d)? * m.inner(d, d).sqrt();
            Ok(())
        })?;
        curvature.add(r.value[0]);
        curvature_error += r.error[0];
        converged &= r.converged;
    }
    let corners = [[l, -l], [l, l], [-l, l], [-l, -l]];
    let mut turning = 0.0;
    for (c, corner) in corners.iter().enumerate() {
        let m = slice.at(corner)?;
        turning += turning_angle(&m, &DIRECTIONS[c], &DIRECTIONS[(c + 1) % 4])?;
    }
    Ok(SquareSlice {
        curvature: curvature.value(),
        curvature_error,
        turning,
        converged,
    })
}

/// `(1 / 8 pi) sum_k int_{-L}^{L} (2 pi - int kappa ds - sum beta) dt`
/// over the square slices of `[-L, L]^3`.
pub fn slice_mass_3d<S: MetricSource + ?Sized>(g: &S, l: f64, plan: &QuadPlan) -> Result<MassReport> {
    if g.dim() != 3 {
        return Err(Error::Dimension(format!("slice_mass_3d needs n = 3, got {}", g.dim())));
    }
    plan.validate()?;
    let dom = Domain::boxed(vec![-l], vec![l]);
    // per axis: [int int kappa ds dt, int (2 pi - sum beta) dt]
    let per_axis = integrate_pieces(3, plan, |k, inner| {
        integrate(&dom, 3, inner, |t, out| {
            let s = slice_value_2d(g, k, t[0], l, inner)?;
            out[0] = s.curvature;
            out[1] = 2.0 * PI - s.turning;
            out[2] = s.curvature_error;
            Ok(())
        })
    })?;
    let (curv, curv_err) = sum_component(&per_axis, 0);
    let (angle, angle_err) = sum_component(&per_axis, 1);
    // errors of the inner integrals, integrated over t
    let curv_err = curv_err + sum_component(&per_axis, 2).0;
    let norm = 8.0 * PI;
    let per_face = per_axis
        .iter()
        .enumerate()
        .map(|(k, r)| PieceTerm {
            index: k,
            tag: None,
            value: -r.value[0] + r.value[1],
            error: r.error[0] + r.error[1] + r.value[2],
        })
        .collect();
    Ok(MassReport {
        evaluator: "slice-mass-3d".into(),
        n: 3,
        params: Params::new(),
        geometry: GeometryInfo {
            kind: "slices".into(),
            label: format!("square slices of [-{l}, {l}]^3"),
            scale: l,
        },
        terms: Terms {
            face: Some(curv),
            edge: Some(angle),
            per_face,
            ..Terms::default()
        },
        errors: TermErrors {
            face: Some(curv_err),
            edge: Some(angle_err),
            total: (curv_err + angle_err) / norm,
            converged: per_axis.iter().all(|r| r.converged),
            ..TermErrors::default()
        },
        normalization: norm,
        total: (angle - curv) / norm,
        notes: vec!["face = int kappa ds dt, edge = int (2 pi - sum of turning angles) dt".into()],
    })
}

/// `m_k^(n-1)(t, L)`: the polyhedral mass of the `(n-1)`-box of half-width
/// `L` in the hyperplane `{x_k = t}` with the induced metric.
pub fn slice_value_nd<S: MetricSource + ?Sized>(g: &S, k: usize, t: f64, l: f64, plan: &QuadPlan) -> Result<MassReport> {
    let slice = CoordinateSlice::new(g, k, t)?;
    let mut r = poly_mass(&slice, &Polytope::cube(g.dim() - 1, l)?, plan)?;
    r.evaluator = "slice-value".into();
    r.geometry.label = format!("[-{l}, {l}]^{} in {{x_{} = {t}}}", g.dim() - 1, k + 1);
    Ok(r)
}

/// `omega_(n-2) / ((n-1) omega_(n-1)) sum_k int_{-L}^{L} m_k^(n-1)(t, L) dt`.
pub fn slice_mass_nd<S: MetricSource + ?Sized>(g: &S, l: f64, plan: &QuadPlan) -> Result<MassReport> {
    let n = g.dim();
    if n < 4 {
        return Err(Error::Dimension(format!("slice_mass_nd needs n >= 4, got {n}")));
    }
    plan.validate()?;
    let cube = Polytope::cube(n - 1, l)?;
    let dom = Domain::boxed(vec![-l], vec![l]);
    // per axis: [int (int_F H) dt, int (int_E (alpha - pi/2)) dt]
    let per_axis = integrate_pieces(n, plan, |k, inner| {
        integrate(&dom, 4, inner, |t, out| {
            let slice = CoordinateSlice::new(g, k, t[0])?;
            let s = poly_terms(&slice, &cube, inner)?;
            out[0] = s.face;
            out[1] = s.edge;
            out[2] = s.face_error;
            out[3] = s.edge_error;
            Ok(())
        })
    })?;
    let (face, face_err) = sum_component(&per_axis, 0);
    let (edge, edge_err) = sum_component(&per_axis, 1);
    let face_err = face_err + sum_component(&per_axis, 2).0;
    let edge_err = edge_err + sum_component(&per_axis, 3).0;
    // omega_(n-2) / ((n-1) omega_(n-1)) times 1 / ((n-2) omega_(n-2))
    let norm = flat_normalization(n) * (n as f64 - 2.0);
    let inner_norm = flat_normalization(n - 1);
    let per_face = per_axis
        .iter()
        .enumerate()
        .map(|(k, r)| PieceTerm {
            index: k,
            tag: None,
            value: (-r.value[0] + r.value[1]) / inner_norm,
            error: (r.error[0] + r.error[1] + r.value[2] + r.value[3]) / inner_norm,
        })
        .collect();
    Ok(MassReport {
        evaluator: "slice-mass-nd".into(),
        n,
        params: Params::new(),
        geometry: GeometryInfo {
            kind: "slices".into(),
            label: format!("box slices of [-{l}, {l}]^{n}"),
            scale: l,
        },
        terms: Terms {
            face: Some(face),
            edge: Some(edge),
            per_face,
            ..Terms::default()
        },
        errors: TermErrors {
            face: Some(face_err),
            edge: Some(edge_err),
            total: (face_err + edge_err) / norm,
            converged: per_axis.iter().all(|r| r.converged),
            ..TermErrors::default()
        },
        normalization: norm,
        total: (edge - face) / norm,
        notes: vec!["per_face holds int m_k^(n-1)(t, L) dt for each axis k".into()],
    })
}
