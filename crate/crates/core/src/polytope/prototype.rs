//! Three-dimensional prototypes from vertex and face lists.
//!
//! ```text
//! # unit tetrahedron
//! vertices
//!  1  1  1
//!  1 -1 -1
//! -1  1 -1
//! -1 -1  1
//! face 1 2 3
//! ...
//! ```
//!
//! Faces list 1-based vertex indices counterclockwise seen from outside.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use crate::error::{Error, Result};
use crate::quadrature::Domain;

use super::{euclidean_angle, Edge, Face, FaceTag, Patch, Polytope};

/// Vertex and face lists of a 3-dimensional polyhedron.
#[derive(Debug, Clone, PartialEq)]
pub struct PrototypeSpec {
    pub vertices: Vec<[f64; 3]>,
    /// 0-based vertex indices per face.
    pub faces: Vec<Vec<usize>>,
}

const NAMES: [&str; 5] = ["cube", "rect-box", "triangular-prism", "wedge", "tetrahedron"];

pub fn prototype_names() -> &'static [&'static str] {
    &NAMES
}

/// Prism over a triangle in the `x1 x2` plane, `|x3| <= h`.
fn prism(tri: [[f64; 2]; 3], h: f64) -> PrototypeSpec {
    let mut vertices = Vec::new();
    for z in [-h, h] {
        for p in tri {
            vertices.push([p[0], p[1], z]);
        }
    }
    PrototypeSpec {
        vertices,
        faces: vec![
            vec![0, 2, 1],
            vec![3, 4, 5],
            vec![0, 1, 4, 3],
            vec![1, 2, 5, 4],
            vec![2, 0, 3, 5],
        ],
    }
}

/// A built-in prototype; each encloses the origin.
pub fn prototype(name: &str) -> Result<Polytope> {
    let spec = match name {
        "cube" => return Polytope::cube(3, 1.0).map(|p| relabel(p, name)),
        "rect-box" => {
            return Polytope::rectangular(&[-1.0, -1.5, -0.5], &[1.0, 1.5, 0.5]).map(|p| relabel(p, name))
        }
        "triangular-prism" => {
            // equilateral cross-section centred on the axis: 60 degree vertical edges
            let tri = [0.0f64, 2.0 * PI / 3.0, 4.0 * PI / 3.0].map(|a| [a.cos(), a.sin()]);
            prism(tri, 1.0)
        }
        "wedge" => {
            // isosceles cross-section with a 1 degree apex at (2, 0)
            let half = 0.5f64.to_radians();
            let back = -1.0;
            let w = (2.0 - back) * half.tan();
            prism([[back, -w], [2.0, 0.0], [back, w]], 1.0)
        }
        "tetrahedron" => PrototypeSpec {
            vertices: vec![[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]],
            faces: vec![vec![0, 1, 2], vec![0, 3, 1], vec![0, 2, 3], vec![1, 3, 2]],
        },
        other => {
            return Err(Error::Invalid(format!(
                "unknown prototype `{other}` (known: {})",
                NAMES.join(", ")
            )))
        }
    };
    let mut p = from_spec(&spec)?;
    p.label = name.to_string();
    Ok(p)
}

fn relabel(mut p: Polytope, name: &str) -> Polytope {
    p.label = name.to_string();
    p
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn normalize(a: [f64; 3]) -> [f64; 3] {
    let l = dot(a, a).sqrt();
    [a[0] / l, a[1] / l, a[2] / l]
}

/// Builds the polytope, deriving edges, normals and angles.
pub fn from_spec(spec: &PrototypeSpec) -> Result<Polytope> {
    let v = &spec.vertices;
    if spec.faces.len() < 4 {
        return Err(Error::Polytope(format!("a polyhedron needs at least 4 faces, got {}", spec.faces.len())));
    }
    let scale = v.iter().flat_map(|p| p.iter()).fold(0.0f64, |m, x| m.max(x.abs()));
    let mut faces = Vec::with_capacity(spec.faces.len());
    for (fi, idx) in spec.faces.iter().enumerate() {
        if idx.len() < 3 {
            return Err(Error::Polytope(format!("face {} has {} vertices", fi + 1, idx.len())));
        }
        if let Some(&bad) = idx.iter().find(|&&i| i >= v.len()) {
            return Err(Error::Polytope(format!("face {} uses vertex {} of {}", fi + 1, bad + 1, v.len())));
        }
        // Newell normal
        let mut nrm = [0.0; 3];
        for i in 0..idx.len() {
            let (a, b) = (v[idx[i]], v[idx[(i + 1) % idx.len()]]);
            nrm[0] += (a[1] - b[1]) * (a[2] + b[2]);
            nrm[1] += (a[2] - b[2]) * (a[0] + b[0]);
            nrm[2] += (a[0] - b[0]) * (a[1] + b[1]);
        }
        if dot(nrm, nrm).sqrt() <= 1e-12 * scale * scale {
            return Err(Error::Polytope(format!("face {} is degenerate", fi + 1)));
        }
        let nrm = normalize(nrm);
        let origin = v[idx[0]];
        for &i in idx {
            let off = dot(sub(v[i], origin), nrm);
            if off.abs() > 1e-9 * scale.max(1.0) {
                return Err(Error::Polytope(format!(
                    "face {} is not planar: vertex {} is {off:e} off its plane",
                    fi + 1,
                    i + 1
                )));
            }
        }
        let t1 = normalize(sub(v[idx[1]], origin));
        let t2 = cross(nrm, t1);
        let poly: Vec<[f64; 2]> = idx
            .iter()
            .map(|&i| {
                let d = sub(v[i], origin);
                [dot(d, t1), dot(d, t2)]
            })
            .collect();
        let domain = Domain::polygon(poly)?;
        faces.push(Face {
            normal: nrm.to_vec(),
            patch: Patch {
                origin: origin.to_vec(),
                tangents: vec![t1.to_vec(), t2.to_vec()],
                domain,
            },
            tag: FaceTag::Plain,
            edges: Vec::new(),
        });
    }
    // directed boundary segments: (a, b) -> face traversing a to b
    let mut directed: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (fi, idx) in spec.faces.iter().enumerate() {
        for i in 0..idx.len() {
            let (a, b) = (idx[i], idx[(i + 1) % idx.len()]);
            if directed.insert((a, b), fi).is_some() {
                return Err(Error::Polytope(format!(
                    "segment {}-{} is traversed twice in the same direction (inconsistent orientation)",
                    a + 1,
                    b + 1
                )));
            }
        }
    }
    let mut edges = Vec::new();
    for (&(a, b), &f1) in &directed {
        if a > b {
            continue;
        }
        let Some(&f2) = directed.get(&(b, a)) else {
            return Err(Error::Polytope(format!("segment {}-{} borders only one face", a + 1, b + 1)));
        };
        let d = sub(v[b], v[a]);
        let len = dot(d, d).sqrt();
        let n1: [f64; 3] = faces[f1].normal.clone().try_into().expect("3 components");
        let n2: [f64; 3] = faces[f2].normal.clone().try_into().expect("3 components");
        // f1 traverses a -> b; the edge is convex when (n1 x n2) points along it
        let reflex = dot(cross(n1, n2), d) < -1e-12 * len;
        let e = edges.len();
        faces[f1].edges.push(e);
        faces[f2].edges.push(e);
        edges.push(Edge {
            faces: [f1, f2],
            patch: Patch {
                origin: v[a].to_vec(),
                tangents: vec![normalize(d).to_vec()],
                domain: Domain::boxed(vec![0.0], vec![len]),
            },
            reflex,
            angle: euclidean_angle(&n1, &n2, reflex),
        });
    }
    // outward orientation: positive enclosed volume
    let mut vol = 0.0;
    for idx in &spec.faces {
        for i in 1..idx.len() - 1 {
            vol += dot(v[idx[0]], cross(v[idx[i]], v[idx[i + 1]]));
        }
    }
    if vol <= 0.0 {
        return Err(Error::Polytope(
            "faces are oriented inward (list vertices counterclockwise seen from outside)".into(),
        ));
    }
    let p = Polytope {
        dim: 3,
        label: "prototype".into(),
        faces,
        edges,
    };
    p.check_incidence()?;
    Ok(p)
}

fn perr(path: &str, line: usize, msg: impl Into<String>) -> Error {
    Error::File {
        path: path.to_string(),
        line,
        column: 1,
        message: msg.into(),
    }
}

/// Parses the prototype text format; `path` is for messages only.
pub fn parse_prototype(text: &str, path: &str) -> Result<Polytope> {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    let mut in_vertices = false;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let s = raw.split('#').next().unwrap_or("").trim();
        if s.is_empty() {
            continue;
        }
        if s == "vertices" {
            if !vertices.is_empty() || !faces.is_empty() {
                return Err(perr(path, line, "`vertices` block must come first and only once"));
            }
            in_vertices = true;
            continue;
        }
        if let Some(rest) = s.strip_prefix("face") {
            in_vertices = false;
            let idx = rest
                .split_whitespace()
                .map(|t| match t.parse::<usize>() {
                    Ok(k) if k >= 1 => Ok(k - 1),
                    _ => Err(perr(path, line, format!("invalid vertex index `{t}` (1-based)"))),
                })
                .collect::<Result<Vec<_>>>()?;
            faces.push(idx);
            continue;
        }
        if !in_vertices {
            return Err(perr(path, line, format!("unexpected line `{s}`")));
        }
        let c: Vec<f64> = s
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| perr(path, line, format!("invalid coordinate `{t}`"))))
            .collect::<Result<_>>()?;
        if c.len() != 3 {
            return Err(perr(path, line, format!("expected 3 coordinates, got {}", c.len())));
        }
        vertices.push([c[0], c[1], c[2]]);
    }
    let spec = PrototypeSpec { vertices, faces };
    let mut p = from_spec(&spec).map_err(|e| match e {
        Error::Polytope(m) => Error::Polytope(format!("{path}: {m}")),
        other => other,
    })?;
    p.label = path.to_string();
    Ok(p)
}

pub fn load_prototype(path: impl AsRef<Path>) -> Result<Polytope> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut p = parse_prototype(&text, &path.display().to_string())?;
    p.label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "prototype".into());
    Ok(p)
}
