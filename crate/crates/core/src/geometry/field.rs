use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::{Expr, Jet2, Node, Params, Tape, MAX_DIM};

use super::point::MetricAt;

/// A symmetric 2-tensor field whose components can be evaluated on jets.
///
/// Evaluation takes one jet per coordinate. Seeding those jets as independent
/// variables yields ordinary derivatives; seeding them with the jets of
/// another map composes the field with that map.
#[derive(Clone)]
pub enum TensorField {
    Zero(usize),
    Identity(usize),
    Components(Arc<Components>),
    Pullback(Arc<Pullback>),
}

/// Expression components, stored for `i <= j` in row-major order.
pub struct Components {
    dim: usize,
    exprs: Vec<Expr>,
    tapes: Vec<Tape>,
    params: Params,
}

/// `(phi^* T)_ij = T_ab(phi) d_i phi^a d_j phi^b` for a map from `dim`
/// coordinates into the coordinates of `base`.
pub struct Pullback {
    dim: usize,
    base: TensorField,
    map: Vec<Tape>,
    // jac[a * dim + i] = d_i phi^a
    jac: Vec<Tape>,
}

pub(crate) fn packed(i: usize, j: usize, n: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * n - i * (i + 1) / 2 + j
}

impl TensorField {
    /// Builds a field from upper-triangle expressions `exprs[packed(i, j)]`.
    pub fn from_exprs(dim: usize, exprs: Vec<Expr>, params: &Params) -> Result<TensorField> {
        if exprs.len() != dim * (dim + 1) / 2 {
            return Err(Error::Dimension(format!(
                "{} components given for a {dim}-dimensional tensor",
                exprs.len()
            )));
        }
        if let Some(bad) = exprs.iter().find(|e| e.dim() != dim) {
            return Err(Error::Dimension(format!(
                "component `{bad}` is in {} coordinates, expected {dim}",
                bad.dim()
            )));
        }
        let tapes = exprs
            .iter()
            .map(|e| e.compile(params))
            .collect::<Result<Vec<_>>>()?;
        Ok(TensorField::Components(Arc::new(Components {
            dim,
            exprs,
            tapes,
            params: params.clone(),
        })))
    }

    /// Builds a field from a full matrix of expressions, which must be symmetric
    /// as written.
    pub fn from_matrix(dim: usize, m: &[Vec<Expr>], params: &Params) -> Result<TensorField> {
        let mut exprs = Vec::with_capacity(dim * (dim + 1) / 2);
        for i in 0..dim {
            for j in i..dim {
                if m[i][j] != m[j][i] {
                    return Err(Error::Metric(format!(
                        "component ({},{}) differs from ({},{})",
                        i + 1,
                        j + 1,
                        j + 1,
                        i + 1
                    )));
                }
                exprs.push(m[i][j].clone());
            }
        }
        TensorField::from_exprs(dim, exprs, params)
    }

    pub fn dim(&self) -> usize {
        match self {
            TensorField::Zero(n) | TensorField::Identity(n) => *n,
            TensorField::Components(c) => c.dim,
            TensorField::Pullback(p) => p.dim,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            TensorField::Zero(_) => true,
            TensorField::Components(c) => c.exprs.iter().all(|e| e.is_zero()),
            _ => false,
        }
    }

    /// Component expressions (upper triangle), when the field is stored that way.
    pub fn exprs(&self) -> Option<&[Expr]> {
        match self {
            TensorField::Components(c) => Some(&c.exprs),
            _ => None,
        }
    }

    /// Components as a full row-major `n x n` array of jets.
    pub fn eval(&self, x: &[Jet2]) -> Result<Vec<Jet2>> {
        let n = self.dim();
        debug_assert_eq!(x.len(), n);
        let jd = x.first().map(|j| j.dim()).unwrap_or(0);
        let mut out = vec![Jet2::constant(jd, 0.0); n * n];
        match self {
            TensorField::Zero(_) => {}
            TensorField::Identity(_) => {
                for i in 0..n {
                    out[i * n + i] = Jet2::constant(jd, 1.0);
                }
            }
            TensorField::Components(c) => {
                let mut stack = Vec::with_capacity(16);
                for i in 0..n {
                    for j in i..n {
                        let v = c.tapes[packed(i, j, n)].eval(x, &mut stack)?;
                        out[i * n + j] = v;
                        out[j * n + i] = v;
                    }
                }
            }
            TensorField::Pullback(p) => {
                let mut stack = Vec::with_capacity(16);
                let nb = p.base.dim();
                let u = p
                    .map
                    .iter()
                    .map(|t| t.eval(x, &mut stack))
                    .collect::<Result<Vec<_>>>()?;
                let jac = p
                    .jac
                    .iter()
                    .map(|t| t.eval(x, &mut stack))
                    .collect::<Result<Vec<_>>>()?;
                if nb == n {
                    let mut m = [[0.0; MAX_DIM]; MAX_DIM];
                    for a in 0..nb {
                        for i in 0..n {
                            m[a][i] = jac[a * n + i].value();
                        }
                    }
                    if determinant(&m, n).abs() < 1e-300 {
                        return Err(Error::SingularJacobian {
                            point: x.iter().map(|j| j.value()).collect(),
                        });
                    }
                }
                let base = p.base.eval(&u)?;
                // t[a][j] = T_ab d_j phi^b
                let mut t = vec![Jet2::constant(jd, 0.0); nb * n];
                for a in 0..nb {
                    for j in 0..n {
                        let mut s = Jet2::constant(jd, 0.0);
                        for b in 0..nb {
                            if base[a * nb + b].is_constant() && base[a * nb + b].value() == 0.0 {
                                continue;
                            }
                            s = s + base[a * nb + b] * jac[b * n + j];
                        }
                        t[a * n + j] = s;
                    }
                }
                for i in 0..n {
                    for j in i..n {
                        let mut s = Jet2::constant(jd, 0.0);
                        for a in 0..nb {
                            s = s + jac[a * n + i] * t[a * n + j];
                        }
                        out[i * n + j] = s;
                        out[j * n + i] = s;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Pulls the field back along `map`, given as `base.dim()` expressions in
    /// `dim` coordinates.
    pub fn pullback(&self, map: &[Expr], params: &Params) -> Result<TensorField> {
        if map.len() != self.dim() {
            return Err(Error::Dimension(format!(
                "map has {} components, tensor lives in {} coordinates",
                map.len(),
                self.dim()
            )));
        }
        let dim = map.first().map(|e| e.dim()).unwrap_or(0);
        if let TensorField::Zero(_) = self {
            return Ok(TensorField::Zero(dim));
        }
        let tapes = map
            .iter()
            .map(|e| e.compile(params))
            .collect::<Result<Vec<_>>>()?;
        let mut jac = Vec::with_capacity(map.len() * dim);
        for e in map {
            for i in 0..dim {
                jac.push(e.derivative(i).compile(params)?);
            }
        }
        Ok(TensorField::Pullback(Arc::new(Pullback {
            dim,
            base: self.clone(),
            map: tapes,
            jac,
        })))
    }

    /// Restriction to the hyperplane `{x_k = t}` (0-based `k`) in the
    /// remaining coordinates, in their original order.
    pub fn restrict(&self, k: usize, t: f64) -> Result<TensorField> {
        let n = self.dim();
        if k >= n {
            return Err(Error::Invalid(format!("axis {} out of range 1..={n}", k + 1)));
        }
        if n < 2 {
            return Err(Error::Dimension("cannot restrict a 1-dimensional tensor".into()));
        }
        let m = n - 1;
        match self {
            TensorField::Zero(_) => Ok(TensorField::Zero(m)),
            TensorField::Identity(_) => Ok(TensorField::Identity(m)),
            TensorField::Components(c) => {
                let vars = hyperplane_vars(n, k, t);
                let keep: Vec<usize> = (0..n).filter(|&i| i != k).collect();
                let mut exprs = Vec::with_capacity(m * (m + 1) / 2);
                for a in 0..m {
                    for b in a..m {
                        let e = &c.exprs[packed(keep[a], keep[b], n)];
                        exprs.push(e.substitute(&vars, m));
                    }
                }
                TensorField::from_exprs(m, exprs, &c.params)
            }
            TensorField::Pullback(_) => {
                let map: Vec<Expr> = hyperplane_vars(n, k, t)
                    .into_iter()
                    .map(|v| Expr::from_node(v, m))
                    .collect();
                self.pullback(&map, &Params::new())
            }
        }
    }
}

fn hyperplane_vars(n: usize, k: usize, t: f64) -> Vec<Node> {
    (0..n)
        .map(|i| match i.cmp(&k) {
            std::cmp::Ordering::Less => Node::Var(i),
            std::cmp::Ordering::Equal => Node::Num(t),
            std::cmp::Ordering::Greater => Node::Var(i - 1),
        })
        .collect()
}

pub(crate) fn determinant(m: &[[f64; MAX_DIM]; MAX_DIM], n: usize) -> f64 {
    let mut a = *m;
    let mut det = 1.0;
    for c in 0..n {
        let p = (c..n)
            .max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))
            .unwrap_or(c);
        if a[p][c] == 0.0 {
            return 0.0;
        }
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        det *= a[c][c];
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                a[r][k] -= f * a[c][k];
            }
        }
    }
    det
}

impl fmt::Debug for TensorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TensorField::Zero(n) => write!(f, "Zero({n})"),
            TensorField::Identity(n) => write!(f, "Identity({n})"),
            TensorField::Components(c) => {
                let shown: Vec<String> = c.exprs.iter().map(|e| e.to_string()).collect();
                f.debug_struct("Components")
                    .field("dim", &c.dim)
                    .field("exprs", &shown)
                    .finish()
            }
            TensorField::Pullback(p) => f
                .debug_struct("Pullback")
                .field("dim", &p.dim)
                .field("base", &p.base)
                .finish(),
        }
    }
}

/// Which model background a metric is measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Background {
    Euclidean,
    HyperbolicHyperboloid,
    HyperbolicUpperHalfSpace,
    None,
}

/// A Riemannian metric `g = gbar + h` split into a background and a
/// perturbation.
///
/// Keeping `h` separate lets evaluators read it without forming `g - gbar`,
/// which would cancel catastrophically far out where `h` is tiny.
#[derive(Debug, Clone)]
pub struct MetricField {
    background: TensorField,
    perturbation: Option<TensorField>,
    kind: Background,
    decay: Option<f64>,
}

impl MetricField {
    pub fn new(background: TensorField, perturbation: Option<TensorField>, kind: Background) -> Result<Self> {
        if let Some(h) = &perturbation {
            if h.dim() != background.dim() {
                return Err(Error::Dimension(format!(
                    "perturbation is {}-dimensional, background {}-dimensional",
                    h.dim(),
                    background.dim()
                )));
            }
        }
        let perturbation = perturbation.filter(|h| !h.is_zero());
        Ok(MetricField {
            background,
            perturbation,
            kind,
            decay: None,
        })
    }

    pub fn euclidean(n: usize) -> Self {
        MetricField {
            background: TensorField::Identity(n),
            perturbation: None,
            kind: Background::Euclidean,
            decay: None,
        }
    }

    /// A metric with no declared background; `h` is reported as zero.
    pub fn plain(g: TensorField) -> Self {
        MetricField {
            background: g,
            perturbation: None,
            kind: Background::None,
            decay: None,
        }
    }

    pub fn with_decay(mut self, decay: Option<f64>) -> Self {
        self.decay = decay;
        self
    }

    pub fn dim(&self) -> usize {
        self.background.dim()
    }

    pub fn kind(&self) -> Background {
        self.kind
    }

    pub fn decay(&self) -> Option<f64> {
        self.decay
    }

    pub fn background(&self) -> &TensorField {
        &self.background
    }

    pub fn perturbation(&self) -> Option<&TensorField> {
        self.perturbation.as_ref()
    }

    /// The background as a metric in its own right.
    pub fn background_metric(&self) -> MetricField {
        MetricField {
            background: self.background.clone(),
            perturbation: None,
            kind: self.kind,
            decay: None,
        }
    }

    /// Full metric components `gbar + h` on jets.
    pub fn eval(&self, x: &[Jet2]) -> Result<Vec<Jet2>> {
        let mut g = self.background.eval(x)?;
        if let Some(h) = &self.perturbation {
            for (a, b) in g.iter_mut().zip(h.eval(x)?) {
                *a = *a + b;
            }
        }
        Ok(g)
    }

    /// Perturbation components `h` on jets (zero when absent).
    pub fn eval_perturbation(&self, x: &[Jet2]) -> Result<Vec<Jet2>> {
        match &self.perturbation {
            Some(h) => h.eval(x),
            None => {
                let n = self.dim();
                let jd = x.first().map(|j| j.dim()).unwrap_or(0);
                Ok(vec![Jet2::constant(jd, 0.0); n * n])
            }
        }
    }

    /// Pointwise metric data with first and second derivatives.
    pub fn at(&self, x: &[f64]) -> Result<MetricAt> {
        let n = self.dim();
        if x.len() != n {
            return Err(Error::Dimension(format!(
                "point has {} coordinates, metric is {n}-dimensional",
                x.len()
            )));
        }
        let vars: Vec<Jet2> = (0..n).map(|i| Jet2::variable(n, i, x[i])).collect();
        MetricAt::from_jets(x, self.eval(&vars)?)
    }

    pub fn background_at(&self, x: &[f64]) -> Result<MetricAt> {
        self.background_metric().at(x)
    }

    /// Perturbation jets seeded at `x`.
    pub fn perturbation_at(&self, x: &[f64]) -> Result<Vec<Jet2>> {
        let n = self.dim();
        let vars: Vec<Jet2> = (0..n).map(|i| Jet2::variable(n, i, x[i])).collect();
        self.eval_perturbation(&vars)
    }

    pub fn scalar_curvature(&self, x: &[f64]) -> Result<f64> {
        Ok(self.at(x)?.scalar_curvature())
    }

    /// Pullback of background and perturbation separately along `map`.
    pub fn pullback(&self, map: &[Expr], params: &Params, kind: Background) -> Result<MetricField> {
        Ok(MetricField {
            background: self.background.pullback(map, params)?,
            perturbation: match &self.perturbation {
                Some(h) => Some(h.pullback(map, params)?),
                None => None,
            },
            kind,
            decay: self.decay,
        })
    }

    /// Metric induced on `{x_k = t}` (0-based axis) in the remaining coordinates.
    pub fn induced_on_hyperplane(&self, k: usize, t: f64) -> Result<MetricField> {
        let kind = match self.kind {
            Background::Euclidean => Background::Euclidean,
            _ => Background::None,
        };
        Ok(MetricField {
            background: self.background.restrict(k, t)?,
            perturbation: match &self.perturbation {
                Some(h) => Some(h.restrict(k, t)?),
                None => None,
            },
            kind,
            decay: self.decay,
        })
    }
}
