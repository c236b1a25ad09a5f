//! Coordinate polyhedra: boxes, scaled prototypes and hyperbolic prisms,
//! with face–edge incidence and Euclidean dihedral angles.

mod prototype;
mod sequence;

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::quadrature::{integrate, Domain, QuadPlan};

pub use prototype::{load_prototype, parse_prototype, prototype, prototype_names, PrototypeSpec};
pub use sequence::{
    ah_prism_condition, check_sequence_conditions, AhCondition, ElementConditions, SequenceKind, SequencePlan,
    SequenceReport,
};

/// An affine piece `origin + sum_a u_a t_a`, `u` in `domain`, with
/// Euclidean-orthonormal tangents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Patch {
    pub origin: Vec<f64>,
    pub tangents: Vec<Vec<f64>>,
    pub domain: Domain,
}

impl Patch {
    pub fn point(&self, u: &[f64]) -> Vec<f64> {
        let mut x = self.origin.clone();
        for (ua, t) in u.iter().zip(&self.tangents) {
            for (xi, ti) in x.iter_mut().zip(t) {
                *xi += ua * ti;
            }
        }
        x
    }

    /// Euclidean measure.
    pub fn measure(&self) -> f64 {
        self.domain.measure()
    }

    fn scaled(&self, r: f64) -> Patch {
        Patch {
            origin: self.origin.iter().map(|v| v * r).collect(),
            tangents: self.tangents.clone(),
            domain: self.domain.scaled(r),
        }
    }

    /// Euclidean distance from the origin of coordinates to the patch.
    pub fn distance_to_origin(&self) -> f64 {
        // parameter coordinates of the foot point of the origin
        let foot: Vec<f64> = self
            .tangents
            .iter()
            .map(|t| -t.iter().zip(&self.origin).map(|(a, b)| a * b).sum::<f64>())
            .collect();
        let clamp = |u: &[f64]| -> Vec<f64> {
            match &self.domain {
                Domain::Box { lo, hi, .. } => u.iter().zip(lo.iter().zip(hi)).map(|(v, (l, h))| v.clamp(*l, *h)).collect(),
                Domain::Polygon { vertices } => closest_in_polygon([u[0], u[1]], vertices).to_vec(),
            }
        };
        let u = clamp(&foot);
        self.point(&u).iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

fn closest_on_segment(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let s = if len2 > 0.0 {
        (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    [a[0] + s * d[0], a[1] + s * d[1]]
}

fn closest_in_polygon(p: [f64; 2], v: &[[f64; 2]]) -> [f64; 2] {
    // even-odd containment
    let mut inside = false;
    let n = v.len();
    for i in 0..n {
        let (a, b) = (v[i], v[(i + 1) % n]);
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
            if p[0] < x {
                inside = !inside;
            }
        }
    }
    if inside {
        return p;
    }
    let mut best = v[0];
    let mut best_d = f64::INFINITY;
    for i in 0..n {
        let c = closest_on_segment(p, v[i], v[(i + 1) % n]);
        let d = (c[0] - p[0]).powi(2) + (c[1] - p[1]).powi(2);
        if d < best_d {
            best_d = d;
            best = c;
        }
    }
    best
}

/// Role of a face in a hyperbolic prism.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FaceTag {
    Plain,
    BottomHorosphere,
    TopHorosphere,
    Vertical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Face {
    /// Euclidean outward unit normal covector.
    pub normal: Vec<f64>,
    pub patch: Patch,
    pub tag: FaceTag,
    /// Incident edges.
    pub edges: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    /// The two adjacent faces.
    pub faces: [usize; 2],
    pub patch: Patch,
    /// Interior angle exceeds `pi`.
    pub reflex: bool,
    /// Euclidean interior dihedral angle.
    pub angle: f64,
}

/// A polyhedron in `dim` coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polytope {
    pub dim: usize,
    pub label: String,
    pub faces: Vec<Face>,
    pub edges: Vec<Edge>,
}

/// Interior angle from outward normals, the Euclidean case of the metric
/// dihedral angle so both agree exactly for `g = delta`.
pub(crate) fn euclidean_angle(n1: &[f64], n2: &[f64], reflex: bool) -> f64 {
    let dot: f64 = n1.iter().zip(n2).map(|(a, b)| a * b).sum();
    let a: f64 = n1.iter().map(|v| v * v).sum();
    let b: f64 = n2.iter().map(|v| v * v).sum();
    let alpha = (-dot / (a * b).sqrt()).clamp(-1.0, 1.0).acos();
    if reflex {
        2.0 * std::f64::consts::PI - alpha
    } else {
        alpha
    }
}

fn unit(n: usize, k: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[k] = 1.0;
    v
}

impl Polytope {
    /// The cube `[-L, L]^n`.
    pub fn cube(n: usize, l: f64) -> Result<Polytope> {
        if !(l > 0.0) || !l.is_finite() {
            return Err(Error::Polytope(format!("box half-width must be positive, got {l}")));
        }
        let mut p = Polytope::rectangular(&vec![-l; n], &vec![l; n])?;
        p.label = format!("box(n={n}, L={l})");
        Ok(p)
    }

    /// The axis-aligned box `prod [lo_k, hi_k]`.
    pub fn rectangular(lo: &[f64], hi: &[f64]) -> Result<Polytope> {
        let n = lo.len();
        if n < 2 || hi.len() != n || n > crate::expr::MAX_DIM {
            return Err(Error::Dimension(format!("boxes need 2..={} axes", crate::expr::MAX_DIM)));
        }
        if (0..n).any(|k| !(lo[k] < hi[k])) {
            return Err(Error::Polytope(format!("empty box {lo:?} x {hi:?}")));
        }
        let side = |k: usize, s: usize| if s == 0 { lo[k] } else { hi[k] };
        let mut faces = Vec::with_capacity(2 * n);
        // face index 2k + s, s = 0 for the low side
        for k in 0..n {
            for s in 0..2 {
                let free: Vec<usize> = (0..n).filter(|&a| a != k).collect();
                let mut origin = vec![0.0; n];
                origin[k] = side(k, s);
                let normal: Vec<f64> = unit(n, k).iter().map(|v| if s == 0 { -v } else { *v }).collect();
                faces.push(Face {
                    normal,
                    patch: Patch {
                        origin,
                        tangents: free.iter().map(|&a| unit(n, a)).collect(),
                        domain: Domain::boxed(free.iter().map(|&a| lo[a]).collect(), free.iter().map(|&a| hi[a]).collect()),
                    },
                    tag: FaceTag::Plain,
                    edges: Vec::new(),
                });
            }
        }
        let mut edges = Vec::with_capacity(2 * n * (n - 1));
        for k in 0..n {
            for l in k + 1..n {
                for s in 0..2 {
                    for t in 0..2 {
                        let free: Vec<usize> = (0..n).filter(|&a| a != k && a != l).collect();
                        let mut origin = vec![0.0; n];
                        origin[k] = side(k, s);
                        origin[l] = side(l, t);
                        let (f1, f2) = (2 * k + s, 2 * l + t);
                        let e = edges.len();
                        faces[f1].edges.push(e);
                        faces[f2].edges.push(e);
                        edges.push(Edge {
                            faces: [f1, f2],
                            patch: Patch {
                                origin,
                                tangents: free.iter().map(|&a| unit(n, a)).collect(),
                                domain: Domain::boxed(
                                    free.iter().map(|&a| lo[a]).collect(),
                                    free.iter().map(|&a| hi[a]).collect(),
                                ),
                            },
                            reflex: false,
                            angle: FRAC_PI_2,
                        });
                    }
                }
            }
        }
        Ok(Polytope {
            dim: n,
            label: format!("box({lo:?}, {hi:?})"),
            faces,
            edges,
        })
    }

    /// The prism `{e^-L <= y_1 <= e^L, |y_a| <= sigma(L)}` in upper half space
    /// coordinates; `sigma` is an expression in the parameter `L`.
    pub fn ah_prism(n: usize, l: f64, sigma: &Expr) -> Result<Polytope> {
        if !(l > 0.0) {
            return Err(Error::Polytope(format!("prism parameter L must be positive, got {l}")));
        }
        let s = eval_sigma(sigma, l)?;
        let mut lo = vec![-s; n];
        let mut hi = vec![s; n];
        lo[0] = (-l).exp();
        hi[0] = l.exp();
        let mut p = Polytope::rectangular(&lo, &hi)?;
        for (i, f) in p.faces.iter_mut().enumerate() {
            f.tag = match i {
                0 => FaceTag::BottomHorosphere,
                1 => FaceTag::TopHorosphere,
                _ => FaceTag::Vertical,
            };
            // panels uniform in log y_1 along the vertical direction
            if i >= 2 {
                f.patch.domain = f.patch.domain.clone().with_log_axis(0);
            }
        }
        for e in p.edges.iter_mut() {
            if e.faces.iter().all(|&f| f >= 2) {
                e.patch.domain = e.patch.domain.clone().with_log_axis(0);
            }
        }
        p.label = format!("ah-prism(n={n}, L={l}, sigma={s})");
        Ok(p)
    }

    /// Scales every vertex by `r`; angles are unchanged.
    pub fn scaled(&self, r: f64) -> Result<Polytope> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::Polytope(format!("scale factor must be positive, got {r}")));
        }
        if !self.encloses_origin() {
            return Err(Error::Polytope(format!("prototype `{}` does not enclose the origin", self.label)));
        }
        Ok(Polytope {
            dim: self.dim,
            label: format!("{} x {r}", self.label),
            faces: self
                .faces
                .iter()
                .map(|f| Face {
                    normal: f.normal.clone(),
                    patch: f.patch.scaled(r),
                    tag: f.tag,
                    edges: f.edges.clone(),
                })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| Edge {
                    faces: e.faces,
                    patch: e.patch.scaled(r),
                    reflex: e.reflex,
                    angle: e.angle,
                })
                .collect(),
        })
    }

    /// Total Euclidean face measure `|F|`.
    pub fn face_measure(&self) -> f64 {
        self.faces.iter().map(|f| f.patch.measure()).sum()
    }

    /// Total Euclidean edge measure `|E|`.
    pub fn edge_measure(&self) -> f64 {
        self.edges.iter().map(|e| e.patch.measure()).sum()
    }

    /// Smallest Euclidean distance from the origin to the boundary.
    pub fn inner_radius(&self) -> f64 {
        self.faces
            .iter()
            .map(|f| f.patch.distance_to_origin())
            .fold(f64::INFINITY, f64::min)
    }

    /// `min |sin alpha_bar|` over edges.
    pub fn min_sin_angle(&self) -> f64 {
        self.edges.iter().map(|e| e.angle.sin().abs()).fold(f64::INFINITY, f64::min)
    }

    /// Whether the origin lies strictly inside, by the Euclidean flux of the
    /// field `x/|x|^n` through the boundary (its total solid angle).
    pub fn encloses_origin(&self) -> bool {
        if self.inner_radius() <= 0.0 {
            return false;
        }
        let n = self.dim;
        let plan = QuadPlan {
            order: 6,
            rtol: 1e-6,
            max_levels: 3,
            ..QuadPlan::default()
        };
        let mut total = 0.0;
        for f in &self.faces {
            if let (3, Domain::Polygon { vertices }) = (n, &f.patch.domain) {
                match polygon_solid_angle(&f.patch, vertices) {
                    Some(w) => total += w,
                    None => return false,
                }
                continue;
            }
            let res = integrate(&f.patch.domain, 1, &plan, |u, out| {
                let x = f.patch.point(u);
                let r2: f64 = x.iter().map(|v| v * v).sum();
                let flux: f64 = x.iter().zip(&f.normal).map(|(a, b)| a * b).sum();
                out[0] = flux / r2.powf(n as f64 / 2.0);
                Ok(())
            });
            match res {
                Ok(r) => total += r.value[0],
                Err(_) => return false,
            }
        }
        let sphere = crate::sphere_area(n);
        (total / sphere - 1.0).abs() < 1e-2
    }

    /// Euclidean flux of a constant field through the boundary; vanishes for a
    /// closed boundary.
    pub fn constant_flux(&self, field: &[f64], plan: &QuadPlan) -> Result<f64> {
        let mut total = 0.0;
        for f in &self.faces {
            let dot: f64 = field.iter().zip(&f.normal).map(|(a, b)| a * b).sum();
            let res = integrate(&f.patch.domain, 1, plan, |_, out| {
                out[0] = dot;
                Ok(())
            })?;
            total += res.value[0];
        }
        Ok(total)
    }

    /// Checks that every edge has two distinct adjacent faces listing it.
    pub fn check_incidence(&self) -> Result<()> {
        for (i, e) in self.edges.iter().enumerate() {
            if e.faces[0] == e.faces[1] {
                return Err(Error::Polytope(format!("edge {i} is adjacent to face {} twice", e.faces[0])));
            }
            for &f in &e.faces {
                if !self.faces[f].edges.contains(&i) {
                    return Err(Error::Polytope(format!("face {f} does not list its edge {i}")));
                }
            }
        }
        for (fi, f) in self.faces.iter().enumerate() {
            for &e in &f.edges {
                if !self.edges[e].faces.contains(&fi) {
                    return Err(Error::Polytope(format!("face {fi} lists edge {e}, which does not list it")));
                }
            }
        }
        Ok(())
    }
}

/// Solid angle of a planar polygon seen from the origin, signed by the
/// outward normal; exact per triangle.
fn polygon_solid_angle(patch: &Patch, vertices: &[[f64; 2]]) -> Option<f64> {
    let tris = crate::quadrature::triangulate(vertices).ok()?;
    let lift = |u: &[f64; 2]| -> [f64; 3] {
        let x = patch.point(u);
        [x[0], x[1], x[2]]
    };
    let dot = |a: [f64; 3], b: [f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let norm = |a: [f64; 3]| dot(a, a).sqrt();
    let mut total = 0.0;
    for t in &tris {
        let [a, b, c] = [lift(&t[0]), lift(&t[1]), lift(&t[2])];
        let bxc = [b[1] * c[2] - b[2] * c[1], b[2] * c[0] - b[0] * c[2], b[0] * c[1] - b[1] * c[0]];
        let (la, lb, lc) = (norm(a), norm(b), norm(c));
        let num = dot(a, bxc);
        let den = la * lb * lc + dot(a, b) * lc + dot(a, c) * lb + dot(b, c) * la;
        total += 2.0 * num.atan2(den);
    }
    Some(total)
}

pub(crate) fn eval_sigma(sigma: &Expr, l: f64) -> Result<f64> {
    let params = [("L".to_string(), l)].into_iter().collect();
    let s = sigma.eval_jet2(&vec![0.0; sigma.dim()], &params)?.value();
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::Polytope(format!("sigma({l}) = {s} must be positive")));
    }
    Ok(s)
}

/// Parses a prism half-width rule `sigma(L)`.
pub fn parse_sigma(src: &str) -> Result<Expr> {
    Expr::parse_with_params(src, 1, &["L".to_string()])
}
