//! Mass of asymptotically flat and asymptotically hyperbolic manifolds from
//! the geometry of large coordinate polyhedra.

// Tensor code indexes components by name; `!(x > 0.0)` also rejects NaN.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod evaluators;
pub mod expr;
pub mod geometry;
pub mod harness;
pub mod metrics;
pub mod polytope;
pub mod quadrature;

pub use error::{Error, Result};

/// Area of the unit sphere `S^(n-1)` in `R^n`, `omega_(n-1) = 2 pi^(n/2) / Gamma(n/2)`.
pub fn sphere_area(n: usize) -> f64 {
    use std::f64::consts::PI;
    // Gamma(k) = (k-1)!, Gamma(k + 1/2) = sqrt(pi) prod_{i<k} (i + 1/2)
    let gamma_half = |n: usize| -> f64 {
        if n.is_multiple_of(2) {
            (1..n / 2).map(|i| i as f64).product()
        } else {
            let k = n / 2;
            let mut g = PI.sqrt();
            for i in 0..k {
                g *= i as f64 + 0.5;
            }
            g
        }
    };
    2.0 * PI.powf(n as f64 / 2.0) / gamma_half(n)
}
