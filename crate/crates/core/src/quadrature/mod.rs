//! Deterministic adaptive tensor-product Gauss–Legendre quadrature.
//!
//! Every level doubles the panel count per axis and recomputes the integral.
//! The error estimate is the L1 distance between the last two levels. Each
//! panel is summed on its own, and panel sums are then merged in lexicographic
//! order with compensated summation, so results do not depend on the worker
//! count.

mod domain;
mod gauss;

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use domain::{triangulate, Domain};
pub use gauss::{gauss_legendre, GaussRule, MAX_ORDER};

/// Refinement and parallelism settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadPlan {
    /// Gauss points per axis per panel.
    pub order: usize,
    /// Relative tolerance on the L1 norm of the (vector) integral.
    pub rtol: f64,
    /// Absolute tolerance per unit parameter measure, for integrals that
    /// vanish.
    pub atol: f64,
    /// Refinement levels after the initial one.
    pub max_levels: usize,
    /// Panels per axis at level 0.
    pub initial_panels: usize,
    /// Worker threads; 0 uses every available core.
    pub workers: usize,
}

impl Default for QuadPlan {
    fn default() -> Self {
        QuadPlan {
            order: 8,
            rtol: 1e-8,
            atol: 1e-14,
            max_levels: 6,
            initial_panels: 1,
            workers: 1,
        }
    }
}

impl QuadPlan {
    pub fn validate(&self) -> Result<()> {
        if !(1..=MAX_ORDER).contains(&self.order) {
            return Err(Error::Quadrature(format!("order {} outside 1..={MAX_ORDER}", self.order)));
        }
        if !(self.rtol > 0.0) || !(self.atol >= 0.0) {
            return Err(Error::Quadrature(format!(
                "tolerances must be positive (rtol {}, atol {})",
                self.rtol, self.atol
            )));
        }
        if self.initial_panels == 0 {
            return Err(Error::Quadrature("initial panel count must be positive".into()));
        }
        if self.max_levels > 20 {
            return Err(Error::Quadrature(format!("max_levels {} is unreasonably deep", self.max_levels)));
        }
        Ok(())
    }

    /// The same plan running on a single thread, for integrals nested inside
    /// a parallel one.
    pub fn serial(&self) -> QuadPlan {
        QuadPlan {
            workers: 1,
            ..self.clone()
        }
    }
}

/// A converged (or best-effort) vector integral.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadResult {
    pub value: Vec<f64>,
    /// `|I_fine - I_coarse|` per component.
    pub error: Vec<f64>,
    pub levels: usize,
    pub converged: bool,
    pub evaluations: usize,
}

impl QuadResult {
    fn zeros(len: usize) -> Self {
        QuadResult {
            value: vec![0.0; len],
            error: vec![0.0; len],
            levels: 0,
            converged: true,
            evaluations: 0,
        }
    }

    /// Componentwise sum of independent integrals.
    pub fn accumulate(&mut self, other: &QuadResult) {
        for (a, b) in self.value.iter_mut().zip(&other.value) {
            *a += b;
        }
        for (a, b) in self.error.iter_mut().zip(&other.error) {
            *a += b;
        }
        self.levels = self.levels.max(other.levels);
        self.converged &= other.converged;
        self.evaluations += other.evaluations;
    }

    pub fn error_l1(&self) -> f64 {
        self.error.iter().sum()
    }
}

/// Compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct Kahan {
    sum: f64,
    c: f64,
}

impl Kahan {
    #[inline]
    pub fn add(&mut self, v: f64) {
        let y = v - self.c;
        let t = self.sum + y;
        self.c = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

fn pool(workers: usize) -> Result<Arc<rayon::ThreadPool>> {
    static POOLS: OnceLock<Mutex<HashMap<usize, Arc<rayon::ThreadPool>>>> = OnceLock::new();
    let pools = POOLS.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = pools.lock().map_err(|_| Error::Quadrature("thread pool registry poisoned".into()))?;
    if let Some(p) = guard.get(&workers) {
        return Ok(p.clone());
    }
    let p = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .thread_name(|i| format!("polymass-quad-{i}"))
        .build()
        .map_err(|e| Error::Quadrature(format!("cannot start {workers} workers: {e}")))?;
    let p = Arc::new(p);
    guard.insert(workers, p.clone());
    Ok(p)
}

/// Runs `f(i)` for `i in 0..count` and returns the results in index order,
/// on `workers` threads.
pub fn ordered_map<T, F>(count: usize, workers: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    let serial = workers == 1 || count <= 1 || rayon::current_thread_index().is_some();
    if serial {
        return (0..count).map(f).collect();
    }
    let threads = if workers == 0 { rayon::current_num_threads().max(1) } else { workers };
    pool(threads)?.install(|| (0..count).into_par_iter().map(&f).collect())
}

/// One panel of a level: Gauss nodes mapped into the domain.
struct Level<'a> {
    domain: &'a Domain,
    rule: &'a GaussRule,
    panels: usize,
    triangles: &'a [[[f64; 2]; 3]],
}

impl Level<'_> {
    fn count(&self) -> usize {
        match self.domain {
            Domain::Box { lo, .. } => self.panels.pow(lo.len() as u32),
            Domain::Polygon { .. } => self.triangles.len() * self.panels * self.panels,
        }
    }

    /// Sums `w * f(u)` over the nodes of panel `index` into `out`.
    fn panel<F>(&self, index: usize, len: usize, f: &F, out: &mut Vec<f64>) -> Result<usize>
    where
        F: Fn(&[f64], &mut [f64]) -> Result<()>,
    {
        let q = self.rule.nodes.len();
        let p = self.panels;
        let mut acc = vec![Kahan::default(); len];
        let mut buf = vec![0.0; len];
        let mut evals = 0;
        match self.domain {
            Domain::Box { lo, hi, log } => {
                let k = lo.len();
                // per-axis panel index, lexicographic with axis 0 slowest
                let mut pidx = vec![0usize; k];
                let mut rem = index;
                for a in (0..k).rev() {
                    pidx[a] = rem % p;
                    rem /= p;
                }
                // per-axis mapped nodes and weights for this panel
                let mut xs = vec![vec![0.0; q]; k];
                let mut ws = vec![vec![0.0; q]; k];
                for a in 0..k {
                    let (l, h) = if log[a] { (lo[a].ln(), hi[a].ln()) } else { (lo[a], hi[a]) };
                    let width = (h - l) / p as f64;
                    let start = l + width * pidx[a] as f64;
                    for i in 0..q {
                        let s = start + 0.5 * width * (self.rule.nodes[i] + 1.0);
                        let w = 0.5 * width * self.rule.weights[i];
                        if log[a] {
                            let x = s.exp();
                            xs[a][i] = x;
                            ws[a][i] = w * x;
                        } else {
                            xs[a][i] = s;
                            ws[a][i] = w;
                        }
                    }
                }
                let total = q.pow(k as u32);
                let mut u = vec![0.0; k];
                for node in 0..total {
                    let mut rem = node;
                    let mut w = 1.0;
                    for a in (0..k).rev() {
                        let i = rem % q;
                        rem /= q;
                        u[a] = xs[a][i];
                        w *= ws[a][i];
                    }
                    self.eval_node(&u, w, f, &mut buf, &mut acc)?;
                    evals += 1;
                }
            }
            Domain::Polygon { .. } => {
                let per = p * p;
                let tri = &self.triangles[index / per];
                let cell = index % per;
                let (ps, pt) = (cell / p, cell % p);
                let [a, b, c] = *tri;
                let jac = ((b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0])).abs();
                let width = 1.0 / p as f64;
                let mut u = [0.0; 2];
                for i in 0..q {
                    let s = width * (ps as f64 + 0.5 * (self.rule.nodes[i] + 1.0));
                    let ws = 0.5 * width * self.rule.weights[i];
                    for j in 0..q {
                        let t = width * (pt as f64 + 0.5 * (self.rule.nodes[j] + 1.0));
                        let wt = 0.5 * width * self.rule.weights[j];
                        // Duffy collapse of the unit square onto the triangle
                        for d in 0..2 {
                            u[d] = a[d] + s * (b[d] - a[d]) + s * t * (c[d] - b[d]);
                        }
                        self.eval_node(&u, ws * wt * s * jac, f, &mut buf, &mut acc)?;
                        evals += 1;
                    }
                }
            }
        }
        out.clear();
        out.extend(acc.iter().map(|k| k.value()));
        Ok(evals)
    }

    #[inline]
    fn eval_node<F>(&self, u: &[f64], w: f64, f: &F, buf: &mut [f64], acc: &mut [Kahan]) -> Result<()>
    where
        F: Fn(&[f64], &mut [f64]) -> Result<()>,
    {
        buf.iter_mut().for_each(|v| *v = 0.0);
        f(u, buf)?;
        for (k, v) in buf.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("integrand component {k} at {u:?}")));
            }
            acc[k].add(w * v);
        }
        Ok(())
    }
}

fn integrate_level<F>(level: &Level<'_>, len: usize, workers: usize, f: &F) -> Result<(Vec<f64>, usize)>
where
    F: Fn(&[f64], &mut [f64]) -> Result<()> + Sync,
{
    let count = level.count();
    let partial = ordered_map(count, workers, |i| {
        let mut out = Vec::with_capacity(len);
        let evals = level.panel(i, len, f, &mut out)?;
        Ok((out, evals))
    })?;
    let mut acc = vec![Kahan::default(); len];
    let mut evals = 0;
    for (v, e) in &partial {
        for (a, x) in acc.iter_mut().zip(v) {
            a.add(*x);
        }
        evals += e;
    }
    Ok((acc.iter().map(|k| k.value()).collect(), evals))
}

/// Integrates a `len`-vector valued `f(u, out)` over `domain` with the
/// Euclidean parameter measure.
pub fn integrate<F>(domain: &Domain, len: usize, plan: &QuadPlan, f: F) -> Result<QuadResult>
where
    F: Fn(&[f64], &mut [f64]) -> Result<()> + Sync,
{
    plan.validate()?;
    domain.validate()?;
    let rule = gauss_legendre(plan.order);
    let triangles = match domain {
        Domain::Polygon { vertices } => triangulate(vertices)?,
        Domain::Box { .. } => Vec::new(),
    };
    if domain.dim() == 0 {
        let mut v = vec![0.0; len];
        f(&[], &mut v)?;
        if let Some(k) = v.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite(format!("integrand component {k} at the point")));
        }
        return Ok(QuadResult {
            value: v,
            error: vec![0.0; len],
            levels: 0,
            converged: true,
            evaluations: 1,
        });
    }
    let floor = plan.atol * domain.measure();
    let mut level = Level {
        domain,
        rule: &rule,
        panels: plan.initial_panels,
        triangles: &triangles,
    };
    let (mut coarse, mut evaluations) = integrate_level(&level, len, plan.workers, &f)?;
    let mut error = vec![f64::INFINITY; len];
    for l in 1..=plan.max_levels {
        level.panels *= 2;
        let (fine, e) = integrate_level(&level, len, plan.workers, &f)?;
        evaluations += e;
        error = fine.iter().zip(&coarse).map(|(a, b)| (a - b).abs()).collect();
        let diff: f64 = error.iter().sum();
        let size: f64 = fine.iter().map(|v| v.abs()).sum();
        coarse = fine;
        if diff <= (plan.rtol * size).max(floor) {
            return Ok(QuadResult {
                value: coarse,
                error,
                levels: l,
                converged: true,
                evaluations,
            });
        }
    }
    if plan.max_levels == 0 {
        // no second level to compare against: report the value itself
        error = coarse.iter().map(|v| v.abs()).collect();
    }
    Ok(QuadResult {
        value: coarse,
        error,
        levels: plan.max_levels,
        converged: false,
        evaluations,
    })
}

/// Integrates `f(x, nu, out)` over the coordinate sphere `|x| = r` in
/// `n` dimensions with the Euclidean area element; `nu` is the outward unit
/// normal.
///
/// The sphere is covered by the central projections of the `2n` faces of the
/// cube `[-1, 1]^n`, on which `dsigma = r^(n-1) |c|^(-n) du`.
pub fn integrate_sphere<F>(n: usize, r: f64, len: usize, plan: &QuadPlan, f: F) -> Result<QuadResult>
where
    F: Fn(&[f64], &[f64], &mut [f64]) -> Result<()> + Sync,
{
    if n < 2 {
        return Err(Error::Dimension(format!("spheres need n >= 2, got {n}")));
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Quadrature(format!("sphere radius must be positive, got {r}")));
    }
    let mut total = QuadResult::zeros(len);
    let domain = Domain::cube(n - 1, 1.0);
    let rn = r.powi(n as i32 - 1);
    for axis in 0..n {
        for sign in [-1.0, 1.0] {
            let chart = integrate(&domain, len, plan, |u, out| {
                let mut c = Vec::with_capacity(n);
                c.extend_from_slice(&u[..axis]);
                c.push(sign);
                c.extend_from_slice(&u[axis..]);
                let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
                let nu: Vec<f64> = c.iter().map(|v| v / norm).collect();
                let x: Vec<f64> = nu.iter().map(|v| v * r).collect();
                f(&x, &nu, out)?;
                let w = rn * norm.powi(-(n as i32));
                out.iter_mut().for_each(|v| *v *= w);
                Ok(())
            })?;
            total.accumulate(&chart);
        }
    }
    Ok(total)
}
