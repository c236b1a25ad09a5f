use crate::error::{Error, Result};
use crate::expr::Params;
use crate::geometry::{mean_curvature, volume_element, Background, MetricField};
use crate::polytope::{FaceTag, Polytope};
use crate::quadrature::{integrate, QuadPlan};

use super::poly::angle_deficit;
use super::{integrate_pieces, sum_component, GeometryInfo, MassReport, PieceTerm, TermErrors, Terms};

/// `2 [int_F V (H_bar - H) dsigma + int_E V (alpha - pi/2) dmu]` with
/// `V = 1 / y_1`, in upper half space coordinates.
///
/// `dsigma`, `dmu` are the background measures; the same combination with
/// `g` measures is reported as `total_g_measure`, and twice the bottom
/// horosphere's face term as `bottom_only`.
pub fn ah_prism_mass(g: &MetricField, p: &Polytope, plan: &QuadPlan) -> Result<MassReport> {
    if g.kind() != Background::HyperbolicUpperHalfSpace {
        return Err(Error::Metric("the prism formula needs a metric in upper half space coordinates".into()));
    }
    let n = g.dim();
    if p.dim != n {
        return Err(Error::Dimension(format!("prism is {}-dimensional, metric {n}-dimensional", p.dim)));
    }
    plan.validate()?;
    let nf = p.faces.len();
    // components: [background measure, g measure]
    let results = integrate_pieces(nf + p.edges.len(), plan, |i, inner| {
        if i < nf {
            let f = &p.faces[i];
            integrate(&f.patch.domain, 2, inner, |u, out| {
                let x = f.patch.point(u);
                let bg = g.background_at(&x)?;
                let full = g.at(&x)?;
                let w = (mean_curvature(&bg, &f.normal)? - mean_curvature(&full, &f.normal)?) / x[0];
                out[0] = w * volume_element(&bg, &f.patch.tangents)?;
                out[1] = w * volume_element(&full, &f.patch.tangents)?;
                Ok(())
            })
        } else {
            let e = &p.edges[i - nf];
            let (n1, n2) = (&p.faces[e.faces[0]].normal, &p.faces[e.faces[1]].normal);
            integrate(&e.patch.domain, 2, inner, |u, out| {
                let x = e.patch.point(u);
                let bg = g.background_at(&x)?;
                let full = g.at(&x)?;
                let w = angle_deficit(&full, n1, n2, e)? / x[0];
                out[0] = w * volume_element(&bg, &e.patch.tangents)?;
                out[1] = w * volume_element(&full, &e.patch.tangents)?;
                Ok(())
            })
        }
    })?;
    let (faces, edges) = results.split_at(nf);
    let (face, face_err) = sum_component(faces, 0);
    let (edge, edge_err) = sum_component(edges, 0);
    let (face_g, _) = sum_component(faces, 1);
    let (edge_g, _) = sum_component(edges, 1);
    let mut bottom = 0.0;
    let mut rest = crate::quadrature::Kahan::default();
    for (f, r) in p.faces.iter().zip(faces) {
        if f.tag == FaceTag::BottomHorosphere {
            bottom += r.value[0];
        } else {
            rest.add(r.value[0]);
        }
    }
    let piece = |i: usize, r: &crate::quadrature::QuadResult, tag| PieceTerm {
        index: i,
        tag,
        value: r.value[0],
        error: r.error[0],
    };
    let mut terms = Terms {
        face: Some(face),
        edge: Some(edge),
        per_face: faces.iter().enumerate().map(|(i, r)| piece(i, r, Some(p.faces[i].tag))).collect(),
        per_edge: edges.iter().enumerate().map(|(i, r)| piece(i, r, None)).collect(),
        ..Terms::default()
    };
    terms.extra.insert("face_bottom".into(), bottom);
    terms.extra.insert("face_non_bottom".into(), rest.value());
    terms.extra.insert("bottom_only".into(), 2.0 * bottom);
    terms.extra.insert("face_g_measure".into(), face_g);
    terms.extra.insert("edge_g_measure".into(), edge_g);
    terms.extra.insert("total_g_measure".into(), 2.0 * (face_g + edge_g));
    Ok(MassReport {
        evaluator: "ah-prism".into(),
        n,
        params: Params::new(),
        geometry: GeometryInfo {
            kind: "prism".into(),
            label: p.label.clone(),
            // L from the bottom horosphere y_1 = e^-L
            scale: p
                .faces
                .iter()
                .find(|f| f.tag == FaceTag::BottomHorosphere)
                .map_or_else(|| p.inner_radius(), |f| -f.patch.origin[0].ln()),
        },
        terms,
        errors: TermErrors {
            face: Some(face_err),
            edge: Some(edge_err),
            total: 2.0 * (face_err + edge_err),
            converged: results.iter().all(|r| r.converged),
            ..TermErrors::default()
        },
        normalization: 0.5,
        total: 2.0 * (face + edge),
        notes: vec!["face and edge measures are taken with respect to the background metric".into()],
    })
}
