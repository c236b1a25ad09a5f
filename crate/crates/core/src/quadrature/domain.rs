use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A parameter domain for tensor-product quadrature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Domain {
    /// `prod [lo_a, hi_a]`; axes flagged `log` get panels uniform in `ln u`
    /// (they need `lo > 0`).
    Box { lo: Vec<f64>, hi: Vec<f64>, log: Vec<bool> },
    /// A simple polygon in the plane, counterclockwise.
    Polygon { vertices: Vec<[f64; 2]> },
}

impl Domain {
    pub fn boxed(lo: Vec<f64>, hi: Vec<f64>) -> Domain {
        let log = vec![false; lo.len()];
        Domain::Box { lo, hi, log }
    }

    /// Symmetric cube `[-a, a]^k`.
    pub fn cube(k: usize, a: f64) -> Domain {
        Domain::boxed(vec![-a; k], vec![a; k])
    }

    pub fn polygon(mut vertices: Vec<[f64; 2]>) -> Result<Domain> {
        if vertices.len() < 3 {
            return Err(Error::Polytope(format!("polygon needs 3 vertices, got {}", vertices.len())));
        }
        if signed_area(&vertices) < 0.0 {
            vertices.reverse();
        }
        Ok(Domain::Polygon { vertices })
    }

    /// Marks axis `a` for logarithmic panels.
    pub fn with_log_axis(mut self, a: usize) -> Domain {
        if let Domain::Box { log, .. } = &mut self {
            log[a] = true;
        }
        self
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Box { lo, .. } => lo.len(),
            Domain::Polygon { .. } => 2,
        }
    }

    /// Euclidean measure of the domain (1 for a point).
    pub fn measure(&self) -> f64 {
        match self {
            Domain::Box { lo, hi, .. } => lo.iter().zip(hi).map(|(a, b)| b - a).product(),
            Domain::Polygon { vertices } => signed_area(vertices).abs(),
        }
    }

    pub fn scaled(&self, r: f64) -> Domain {
        match self {
            Domain::Box { lo, hi, log } => Domain::Box {
                lo: lo.iter().map(|v| v * r).collect(),
                hi: hi.iter().map(|v| v * r).collect(),
                log: log.clone(),
            },
            Domain::Polygon { vertices } => Domain::Polygon {
                vertices: vertices.iter().map(|p| [p[0] * r, p[1] * r]).collect(),
            },
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        match self {
            Domain::Box { lo, hi, log } => {
                if lo.len() != hi.len() || lo.len() != log.len() {
                    return Err(Error::Quadrature("box bounds of unequal length".into()));
                }
                for a in 0..lo.len() {
                    if !(lo[a] < hi[a]) || !lo[a].is_finite() || !hi[a].is_finite() {
                        return Err(Error::Quadrature(format!("empty box axis {a}: [{}, {}]", lo[a], hi[a])));
                    }
                    if log[a] && lo[a] <= 0.0 {
                        return Err(Error::Quadrature(format!("logarithmic axis {a} starts at {}", lo[a])));
                    }
                }
                Ok(())
            }
            Domain::Polygon { vertices } => {
                if signed_area(vertices) <= 0.0 {
                    return Err(Error::Quadrature("polygon is degenerate or clockwise".into()));
                }
                Ok(())
            }
        }
    }
}

pub(crate) fn signed_area(v: &[[f64; 2]]) -> f64 {
    let n = v.len();
    let mut s = 0.0;
    for i in 0..n {
        let (a, b) = (v[i], v[(i + 1) % n]);
        s += a[0] * b[1] - a[1] * b[0];
    }
    0.5 * s
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn inside_triangle(p: [f64; 2], a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> bool {
    cross(a, b, p) >= 0.0 && cross(b, c, p) >= 0.0 && cross(c, a, p) >= 0.0
}

/// Ear-clipping triangulation of a counterclockwise simple polygon; triangles
/// are counterclockwise and emitted in a fixed order.
pub fn triangulate(vertices: &[[f64; 2]]) -> Result<Vec<[[f64; 2]; 3]>> {
    let mut idx: Vec<usize> = (0..vertices.len()).collect();
    let mut out = Vec::with_capacity(vertices.len().saturating_sub(2));
    let scale = vertices
        .iter()
        .flat_map(|p| p.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(1e-300);
    let eps = 1e-14 * scale * scale;
    while idx.len() > 3 {
        let m = idx.len();
        let mut clipped = false;
        for i in 0..m {
            let (ip, ic, inx) = (idx[(i + m - 1) % m], idx[i], idx[(i + 1) % m]);
            let (a, b, c) = (vertices[ip], vertices[ic], vertices[inx]);
            let turn = cross(a, b, c);
            if turn.abs() <= eps {
                // collinear vertex: drop it, the area is unchanged
                idx.remove(i);
                clipped = true;
                break;
            }
            if turn < 0.0 {
                continue;
            }
            let blocked = idx
                .iter()
                .filter(|&&j| j != ip && j != ic && j != inx)
                .any(|&j| inside_triangle(vertices[j], a, b, c));
            if !blocked {
                out.push([a, b, c]);
                idx.remove(i);
                clipped = true;
                break;
            }
        }
        if !clipped {
            return Err(Error::Polytope("polygon is not simple; ear clipping failed".into()));
        }
    }
    let (a, b, c) = (vertices[idx[0]], vertices[idx[1]], vertices[idx[2]]);
    if cross(a, b, c) > eps {
        out.push([a, b, c]);
    }
    Ok(out)
}
