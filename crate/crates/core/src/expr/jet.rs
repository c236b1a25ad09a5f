//! Second-order forward-mode jets.
//!
//! A [`Jet2`] carries a value together with its gradient and Hessian with
//! respect to up to [`MAX_DIM`] independent variables. Arithmetic on jets
//! propagates exact first and second derivatives, which is equivalent to
//! nested (second-order) dual numbers with the redundant mixed tangent folded
//! into a packed symmetric Hessian.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Largest number of independent variables a jet can carry.
pub const MAX_DIM: usize = 6;

const HESS_LEN: usize = MAX_DIM * (MAX_DIM + 1) / 2;

/// Value, gradient and symmetric Hessian of a scalar function.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet2 {
    dim: usize,
    value: f64,
    grad: [f64; MAX_DIM],
    hess: [f64; HESS_LEN],
}

impl Jet2 {
    pub fn constant(dim: usize, value: f64) -> Self {
        debug_assert!(dim <= MAX_DIM);
        Jet2 {
            dim,
            value,
            grad: [0.0; MAX_DIM],
            hess: [0.0; HESS_LEN],
        }
    }

    /// The coordinate function `x_index` evaluated at `value`.
    pub fn variable(dim: usize, index: usize, value: f64) -> Self {
        let mut j = Jet2::constant(dim, value);
        j.grad[index] = 1.0;
        j
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn grad(&self) -> &[f64] {
        &self.grad[..self.dim]
    }

    pub fn d(&self, i: usize) -> f64 {
        self.grad[i]
    }

    /// Second derivative ∂ᵢ∂ⱼ; symmetric by construction.
    pub fn dd(&self, i: usize, j: usize) -> f64 {
        self.hess[index(i, j)]
    }

    pub fn hessian(&self) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.dd(i, j)).collect())
            .collect()
    }

    pub fn is_finite(&self) -> bool {
        if !self.value.is_finite() {
            return false;
        }
        let n = self.dim;
        if self.grad[..n].iter().any(|v| !v.is_finite()) {
            return false;
        }
        for i in 0..n {
            for j in i..n {
                if !self.hess[index(i, j)].is_finite() {
                    return false;
                }
            }
        }
        true
    }

    /// Builds a jet from explicit parts; `hess` is read as a full matrix.
    pub fn from_parts(value: f64, grad: &[f64], hess: &[Vec<f64>]) -> Self {
        let dim = grad.len();
        let mut j = Jet2::constant(dim, value);
        j.grad[..dim].copy_from_slice(grad);
        for a in 0..dim {
            for b in a..dim {
                j.hess[index(a, b)] = 0.5 * (hess[a][b] + hess[b][a]);
            }
        }
        j
    }

    /// Applies a scalar function given its value and first two derivatives
    /// at `self.value`.
    #[inline]
    pub fn chain(&self, f0: f64, f1: f64, f2: f64) -> Self {
        let n = self.dim;
        let mut out = Jet2::constant(n, f0);
        for i in 0..n {
            out.grad[i] = f1 * self.grad[i];
        }
        for i in 0..n {
            let gi = self.grad[i];
            for j in i..n {
                let k = index(i, j);
                out.hess[k] = f1 * self.hess[k] + f2 * gi * self.grad[j];
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        let n = self.dim;
        let mut out = *self;
        out.value *= s;
        for i in 0..n {
            out.grad[i] *= s;
        }
        for i in 0..n {
            for j in i..n {
                out.hess[index(i, j)] *= s;
            }
        }
        out
    }

    pub fn recip(&self) -> Self {
        let v = self.value;
        let r = 1.0 / v;
        self.chain(r, -r * r, 2.0 * r * r * r)
    }

    pub fn sqrt(&self) -> Self {
        let s = self.value.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * self.value))
    }

    pub fn exp(&self) -> Self {
        let e = self.value.exp();
        self.chain(e, e, e)
    }

    pub fn ln(&self) -> Self {
        let v = self.value;
        self.chain(v.ln(), 1.0 / v, -1.0 / (v * v))
    }

    pub fn sin(&self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.chain(s, c, -s)
    }

    pub fn cos(&self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.chain(c, -s, -c)
    }

    pub fn tan(&self) -> Self {
        let t = self.value.tan();
        let sec2 = 1.0 + t * t;
        self.chain(t, sec2, 2.0 * t * sec2)
    }

    pub fn atan(&self) -> Self {
        let v = self.value;
        let d = 1.0 / (1.0 + v * v);
        self.chain(v.atan(), d, -2.0 * v * d * d)
    }

    pub fn abs(&self) -> Self {
        let s = if self.value < 0.0 { -1.0 } else { 1.0 };
        self.chain(self.value.abs(), s, 0.0)
    }

    /// Integer power by repeated multiplication, valid for any sign of the base.
    pub fn powi(&self, k: i32) -> Self {
        if k == 0 {
            return Jet2::constant(self.dim, 1.0);
        }
        let v = self.value;
        let kf = k as f64;
        let f1 = kf * v.powi(k - 1);
        let f2 = if k == 1 { 0.0 } else { kf * (kf - 1.0) * v.powi(k - 2) };
        self.chain(v.powi(k), f1, f2)
    }

    /// True when the jet has no dependence on the variables.
    pub fn is_constant(&self) -> bool {
        let n = self.dim;
        self.grad[..n].iter().all(|&g| g == 0.0)
            && (0..n).all(|i| (i..n).all(|j| self.hess[index(i, j)] == 0.0))
    }
}

#[inline]
fn index(i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    // row i starts after sum_{r<i} (MAX_DIM - r) entries
    i * MAX_DIM - i * i.saturating_sub(1) / 2 + (j - i)
}

impl Add for Jet2 {
    type Output = Jet2;
    #[inline]
    fn add(self, rhs: Jet2) -> Jet2 {
        let n = self.dim.max(rhs.dim);
        let mut out = self;
        out.dim = n;
        out.value += rhs.value;
        for i in 0..n {
            out.grad[i] += rhs.grad[i];
        }
        for i in 0..n {
            for j in i..n {
                let k = index(i, j);
                out.hess[k] += rhs.hess[k];
            }
        }
        out
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    #[inline]
    fn sub(self, rhs: Jet2) -> Jet2 {
        let n = self.dim.max(rhs.dim);
        let mut out = self;
        out.dim = n;
        out.value -= rhs.value;
        for i in 0..n {
            out.grad[i] -= rhs.grad[i];
        }
        for i in 0..n {
            for j in i..n {
                let k = index(i, j);
                out.hess[k] -= rhs.hess[k];
            }
        }
        out
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    #[inline]
    fn mul(self, rhs: Jet2) -> Jet2 {
        let n = self.dim.max(rhs.dim);
        let (a, b) = (self.value, rhs.value);
        let mut out = Jet2::constant(n, a * b);
        for i in 0..n {
            out.grad[i] = self.grad[i] * b + a * rhs.grad[i];
        }
        for i in 0..n {
            let (ga, gb) = (self.grad[i], rhs.grad[i]);
            for j in i..n {
                let k = index(i, j);
                out.hess[k] = self.hess[k] * b
                    + a * rhs.hess[k]
                    + ga * rhs.grad[j]
                    + gb * self.grad[j];
            }
        }
        out
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    #[inline]
    fn neg(self) -> Jet2 {
        self.scale(-1.0)
    }
}

impl Div for Jet2 {
    type Output = Jet2;
    #[inline]
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Jet2) -> Jet2 {
        self * rhs.recip()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn packed_index_is_a_bijection_on_the_upper_triangle() {
        let mut seen = [false; HESS_LEN];
        for i in 0..MAX_DIM {
            for j in i..MAX_DIM {
                let k = index(i, j);
                assert!(k < HESS_LEN, "({i},{j}) -> {k}");
                assert!(!seen[k], "({i},{j}) collides");
                seen[k] = true;
                assert_eq!(index(j, i), k);
            }
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn product_rule_on_bilinear() {
        let x = Jet2::variable(2, 0, 3.0);
        let y = Jet2::variable(2, 1, 5.0);
        let p = x * y;
        assert_eq!(p.value(), 15.0);
        assert_eq!(p.grad(), &[5.0, 3.0]);
        assert_eq!(p.dd(0, 1), 1.0);
        assert_eq!(p.dd(0, 0), 0.0);
        assert_eq!(p.dd(1, 1), 0.0);
    }

    #[test]
    fn powi_handles_nonpositive_base() {
        let x = Jet2::variable(1, 0, -2.0);
        let c = x.powi(3);
        assert_eq!(c.value(), -8.0);
        assert_eq!(c.d(0), 12.0);
        assert_eq!(c.dd(0, 0), -12.0);
        let z = Jet2::variable(1, 0, 0.0).powi(2);
        assert_eq!((z.value(), z.d(0), z.dd(0, 0)), (0.0, 0.0, 2.0));
    }
}
