use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::expr::{Jet2, MAX_DIM};

pub type Mat = [[f64; MAX_DIM]; MAX_DIM];

pub(crate) const ZERO: Mat = [[0.0; MAX_DIM]; MAX_DIM];

/// Metric data at one point: components, inverse, first derivatives and
/// Christoffel symbols, plus the raw jets for second derivatives.
#[derive(Debug, Clone)]
pub struct MetricAt {
    pub n: usize,
    pub x: Vec<f64>,
    pub g: Mat,
    pub ginv: Mat,
    /// `dg[k][i][j] = d_k g_ij`
    pub dg: [Mat; MAX_DIM],
    /// `gamma[i][k][l] = Gamma^i_kl`
    pub gamma: [Mat; MAX_DIM],
    /// `gamma_low[m][k][l] = Gamma_{m,kl} = g_mi Gamma^i_kl`
    pub gamma_low: [Mat; MAX_DIM],
    jets: Vec<Jet2>,
}

impl MetricAt {
    /// Builds pointwise data from row-major component jets seeded at `x`.
    pub fn from_jets(x: &[f64], jets: Vec<Jet2>) -> Result<MetricAt> {
        let n = x.len();
        if jets.iter().any(|j| !j.is_finite()) {
            return Err(Error::NonFinite(format!("metric components at {x:?}")));
        }
        let mut g = ZERO;
        let mut dg = [ZERO; MAX_DIM];
        for i in 0..n {
            for j in 0..n {
                let c = &jets[i * n + j];
                g[i][j] = c.value();
                for k in 0..n {
                    dg[k][i][j] = c.d(k);
                }
            }
        }
        let ginv = spd_inverse(&g, n).ok_or_else(|| Error::NotPositiveDefinite { point: x.to_vec() })?;
        let mut gamma_low = [ZERO; MAX_DIM];
        for m in 0..n {
            for k in 0..n {
                for l in k..n {
                    let v = 0.5 * (dg[k][m][l] + dg[l][m][k] - dg[m][k][l]);
                    gamma_low[m][k][l] = v;
                    gamma_low[m][l][k] = v;
                }
            }
        }
        let mut gamma = [ZERO; MAX_DIM];
        for i in 0..n {
            for k in 0..n {
                for l in k..n {
                    let mut s = 0.0;
                    for m in 0..n {
                        s += ginv[i][m] * gamma_low[m][k][l];
                    }
                    gamma[i][k][l] = s;
                    gamma[i][l][k] = s;
                }
            }
        }
        Ok(MetricAt {
            n,
            x: x.to_vec(),
            g,
            ginv,
            dg,
            gamma,
            gamma_low,
            jets,
        })
    }

    /// Metric data of the restriction to the coordinate subspace spanned by
    /// `axes`, e.g. the induced metric on a coordinate hyperplane.
    pub fn restrict(&self, axes: &[usize]) -> Result<MetricAt> {
        let n = self.n;
        let k = axes.len();
        let x: Vec<f64> = axes.iter().map(|&a| self.x[a]).collect();
        let mut jets = Vec::with_capacity(k * k);
        for &i in axes {
            for &j in axes {
                let c = &self.jets[i * n + j];
                let grad: Vec<f64> = axes.iter().map(|&a| c.d(a)).collect();
                let hess: Vec<Vec<f64>> = axes
                    .iter()
                    .map(|&a| axes.iter().map(|&b| c.dd(a, b)).collect())
                    .collect();
                jets.push(Jet2::from_parts(c.value(), &grad, &hess));
            }
        }
        MetricAt::from_jets(&x, jets)
    }

    /// Row-major component jets.
    pub fn jets(&self) -> &[Jet2] {
        &self.jets
    }

    /// `sqrt(det g)`
    pub fn volume_density(&self) -> f64 {
        let n = self.n;
        DMatrix::from_fn(n, n, |i, j| self.g[i][j]).determinant().max(0.0).sqrt()
    }

    /// `d_k d_l g_ij`
    pub fn ddg(&self, k: usize, l: usize, i: usize, j: usize) -> f64 {
        self.jets[i * self.n + j].dd(k, l)
    }

    /// `g(u, v)`
    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                s += self.g[i][j] * u[i] * v[j];
            }
        }
        s
    }

    /// `g^{-1}(a, b)` for covectors.
    pub fn inner_co(&self, a: &[f64], b: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                s += self.ginv[i][j] * a[i] * b[j];
            }
        }
        s
    }

    pub fn raise(&self, a: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.ginv[i][j] * a[j]).sum())
            .collect()
    }

    pub fn lower(&self, v: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.g[i][j] * v[j]).sum())
            .collect()
    }

    /// `d_l g^{ij} = -g^{ia} d_l g_ab g^{bj}`
    pub fn dginv(&self) -> [Mat; MAX_DIM] {
        let n = self.n;
        let mut out = [ZERO; MAX_DIM];
        for l in 0..n {
            let mut t = ZERO;
            for i in 0..n {
                for b in 0..n {
                    t[i][b] = (0..n).map(|a| self.ginv[i][a] * self.dg[l][a][b]).sum();
                }
            }
            for i in 0..n {
                for j in 0..n {
                    out[l][i][j] = -(0..n).map(|b| t[i][b] * self.ginv[b][j]).sum::<f64>();
                }
            }
        }
        out
    }

    /// `dgamma[l][i][k][m] = d_l Gamma^i_km`
    pub fn christoffel_derivatives(&self) -> Vec<[Mat; MAX_DIM]> {
        let n = self.n;
        let dginv = self.dginv();
        let mut out = vec![[ZERO; MAX_DIM]; n];
        for (l, dl) in out.iter_mut().enumerate() {
            for i in 0..n {
                for k in 0..n {
                    for m in k..n {
                        let mut s = 0.0;
                        for a in 0..n {
                            let low = self.gamma_low[a][k][m];
                            let dlow = 0.5
                                * (self.ddg(l, k, a, m) + self.ddg(l, m, a, k) - self.ddg(l, a, k, m));
                            s += dginv[l][i][a] * low + self.ginv[i][a] * dlow;
                        }
                        dl[i][k][m] = s;
                        dl[i][m][k] = s;
                    }
                }
            }
        }
        out
    }

    /// `R = g^{ik}(d_l Gamma^l_ik - d_i Gamma^l_lk + Gamma^l_lm Gamma^m_ik - Gamma^l_im Gamma^m_lk)`
    pub fn scalar_curvature(&self) -> f64 {
        let n = self.n;
        let dgam = self.christoffel_derivatives();
        let mut ric = ZERO;
        for i in 0..n {
            for k in i..n {
                let mut s = 0.0;
                for l in 0..n {
                    s += dgam[l][l][i][k] - dgam[i][l][l][k];
                    for m in 0..n {
                        s += self.gamma[l][l][m] * self.gamma[m][i][k]
                            - self.gamma[l][i][m] * self.gamma[m][l][k];
                    }
                }
                ric[i][k] = s;
                ric[k][i] = s;
            }
        }
        let mut r = 0.0;
        for i in 0..n {
            for k in 0..n {
                r += self.ginv[i][k] * ric[i][k];
            }
        }
        r
    }
}

/// Inverse of a symmetric positive definite matrix, `None` if not SPD.
pub(crate) fn spd_inverse(g: &Mat, n: usize) -> Option<Mat> {
    let m = DMatrix::from_fn(n, n, |i, j| g[i][j]);
    let chol = m.cholesky()?;
    let inv = chol.inverse();
    let mut out = ZERO;
    for i in 0..n {
        for j in 0..n {
            out[i][j] = 0.5 * (inv[(i, j)] + inv[(j, i)]);
        }
    }
    Some(out)
}

/// Trace `gbar^{ij} h_ij` for row-major `h` jets.
pub fn trace(bg: &MetricAt, h: &[Jet2]) -> f64 {
    let n = bg.n;
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += bg.ginv[i][j] * h[i * n + j].value();
        }
    }
    s
}

/// Differential of the trace, `d_l (gbar^{ij} h_ij)`.
pub fn d_trace(bg: &MetricAt, h: &[Jet2]) -> Vec<f64> {
    let n = bg.n;
    let dginv = bg.dginv();
    (0..n)
        .map(|l| {
            let mut s = 0.0;
            for i in 0..n {
                for j in 0..n {
                    let hij = &h[i * n + j];
                    s += dginv[l][i][j] * hij.value() + bg.ginv[i][j] * hij.d(l);
                }
            }
            s
        })
        .collect()
}

/// Covariant divergence `(div h)_j = gbar^{ik}(d_i h_kj - Gamma^m_ik h_mj - Gamma^m_ij h_km)`.
pub fn divergence(bg: &MetricAt, h: &[Jet2]) -> Vec<f64> {
    let n = bg.n;
    let hv = |a: usize, b: usize| h[a * n + b].value();
    (0..n)
        .map(|j| {
            let mut s = 0.0;
            for i in 0..n {
                for k in 0..n {
                    let gik = bg.ginv[i][k];
                    if gik == 0.0 {
                        continue;
                    }
                    let mut t = h[k * n + j].d(i);
                    for m in 0..n {
                        t -= bg.gamma[m][i][k] * hv(m, j) + bg.gamma[m][i][j] * hv(k, m);
                    }
                    s += gik * t;
                }
            }
            s
        })
        .collect()
}

/// Values of a row-major jet tensor as a matrix.
pub fn values(h: &[Jet2], n: usize) -> Mat {
    let mut out = ZERO;
    for i in 0..n {
        for j in 0..n {
            out[i][j] = h[i * n + j].value();
        }
    }
    out
}
