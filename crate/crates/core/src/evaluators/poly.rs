use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::expr::Params;
use crate::geometry::{dihedral_angle, mean_curvature, volume_element, MetricAt, MetricSource};
use crate::polytope::{Edge, Polytope};
use crate::quadrature::{integrate, QuadPlan};

use super::{flat_normalization, integrate_pieces, sum_component, GeometryInfo, MassReport, PieceTerm, TermErrors, Terms};

/// Face and edge integrals of a polyhedron before normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyTerms {
    /// `int_F H dsigma`
    pub face: f64,
    pub face_error: f64,
    /// `int_E (alpha - alpha_bar) dmu`
    pub edge: f64,
    pub edge_error: f64,
    pub per_face: Vec<PieceTerm>,
    pub per_edge: Vec<PieceTerm>,
    pub converged: bool,
}

impl PolyTerms {
    /// `-int_F H dsigma + int_E (alpha - alpha_bar) dmu`
    pub fn combination(&self) -> f64 {
        -self.face + self.edge
    }
}

/// `alpha - alpha_bar` at one point of an edge. Right angles use `asin`,
/// which keeps full relative precision for small deficits.
pub(crate) fn angle_deficit(m: &MetricAt, n1: &[f64], n2: &[f64], edge: &Edge) -> Result<f64> {
    if !edge.reflex && edge.angle == FRAC_PI_2 {
        let a = m.inner_co(n1, n1);
        let b = m.inner_co(n2, n2);
        if !(a > 0.0 && b > 0.0) {
            return Err(Error::Degenerate("zero face normal at edge".into()));
        }
        let c = (-m.inner_co(n1, n2) / (a * b).sqrt()).clamp(-1.0, 1.0);
        return Ok(-c.asin());
    }
    Ok(dihedral_angle(m, n1, n2, edge.reflex)? - edge.angle)
}

pub fn poly_terms<S: MetricSource + ?Sized>(g: &S, p: &Polytope, plan: &QuadPlan) -> Result<PolyTerms> {
    if p.dim != g.dim() {
        return Err(Error::Dimension(format!(
            "polytope is {}-dimensional, metric {}-dimensional",
            p.dim,
            g.dim()
        )));
    }
    plan.validate()?;
    let nf = p.faces.len();
    let results = integrate_pieces(nf + p.edges.len(), plan, |i, inner| {
        if i < nf {
            let f = &p.faces[i];
            integrate(&f.patch.domain, 1, inner, |u, out| {
                let m = g.at(&f.patch.point(u))?;
                out[0] = mean_curvature(&m, &f.normal)? * volume_element(&m, &f.patch.tangents)?;
                Ok(())
            })
        } else {
            let e = &p.edges[i - nf];
            let (n1, n2) = (&p.faces[e.faces[0]].normal, &p.faces[e.faces[1]].normal);
            integrate(&e.patch.domain, 1, inner, |u, out| {
                let m = g.at(&e.patch.point(u))?;
                out[0] = angle_deficit(&m, n1, n2, e)? * volume_element(&m, &e.patch.tangents)?;
                Ok(())
            })
        }
    })?;
    let (faces, edges) = results.split_at(nf);
    let (face, face_error) = sum_component(faces, 0);
    let (edge, edge_error) = sum_component(edges, 0);
    let piece = |(i, r): (usize, &crate::quadrature::QuadResult), tag| PieceTerm {
        index: i,
        tag,
        value: r.value[0],
        error: r.error[0],
    };
    Ok(PolyTerms {
        face,
        face_error,
        edge,
        edge_error,
        per_face: faces.iter().enumerate().map(|x| piece(x, Some(p.faces[x.0].tag))).collect(),
        per_edge: edges.iter().enumerate().map(|x| piece(x, None)).collect(),
        converged: results.iter().all(|r| r.converged),
    })
}

/// Polyhedral mass `(-int_F H dsigma + int_E (alpha - alpha_bar) dmu) / ((n-1) omega_(n-1))`
/// with `g`-induced measures.
pub fn poly_mass<S: MetricSource + ?Sized>(g: &S, p: &Polytope, plan: &QuadPlan) -> Result<MassReport> {
    let n = p.dim;
    let t = poly_terms(g, p, plan)?;
    let norm = flat_normalization(n);
    Ok(MassReport {
        evaluator: "poly-mass".into(),
        n,
        params: Params::new(),
        geometry: GeometryInfo {
            kind: "polytope".into(),
            label: p.label.clone(),
            scale: p.inner_radius(),
        },
        terms: Terms {
            face: Some(t.face),
            edge: Some(t.edge),
            per_face: t.per_face.clone(),
            per_edge: t.per_edge.clone(),
            ..Terms::default()
        },
        errors: TermErrors {
            face: Some(t.face_error),
            edge: Some(t.edge_error),
            total: (t.face_error + t.edge_error) / norm,
            converged: t.converged,
            ..TermErrors::default()
        },
        normalization: norm,
        total: t.combination() / norm,
        notes: Vec::new(),
    })
}
