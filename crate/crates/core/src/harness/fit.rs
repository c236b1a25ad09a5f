//! Power-law extrapolation `v(L) = v_inf + c L^(-s)` and log-log slopes.

use serde::{Deserialize, Serialize};

/// Exact fit of `v_inf + c L^(-s)` through three points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerFit {
    pub limit: f64,
    pub coefficient: f64,
    pub rate: f64,
}

impl PowerFit {
    pub fn eval(&self, l: f64) -> f64 {
        self.limit + self.coefficient * l.powf(-self.rate)
    }
}

/// Largest rate the fit will report; beyond it the last value is the limit.
const MAX_RATE: f64 = 30.0;

/// Fits `v_inf + c L^(-s)` through `(l[i], v[i])`, `i = 0..3`, with
/// `l` strictly increasing. `None` when the differences do not shrink
/// monotonically, so no decaying power law passes through the points.
pub fn fit_power_law(l: [f64; 3], v: [f64; 3]) -> Option<PowerFit> {
    if !(l[0] > 0.0 && l[0] < l[1] && l[1] < l[2]) || v.iter().any(|x| !x.is_finite()) {
        return None;
    }
    let d1 = v[1] - v[0];
    let d2 = v[2] - v[1];
    if d1 == 0.0 || d2 == 0.0 || d1.signum() != d2.signum() || d2.abs() >= d1.abs() {
        return None;
    }
    let target = d2 / d1;
    // ratio(s) = (L1^-s - L2^-s) / (L0^-s - L1^-s), decreasing from its s -> 0 limit to 0
    let ratio = |s: f64| {
        let p = |x: f64| (-s * x.ln()).exp();
        (p(l[1]) - p(l[2])) / (p(l[0]) - p(l[1]))
    };
    let (mut lo, mut hi) = (1e-9, MAX_RATE);
    if !(ratio(lo) > target && ratio(hi) < target) {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ratio(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let s = 0.5 * (lo + hi);
    let c = d1 / (l[1].powf(-s) - l[0].powf(-s));
    Some(PowerFit {
        limit: v[2] - c * l[2].powf(-s),
        coefficient: c,
        rate: s,
    })
}

/// A limit estimate with its uncertainty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extrapolation {
    pub limit: f64,
    pub uncertainty: f64,
    /// The power law through the last three points, when one exists.
    pub fit: Option<PowerFit>,
    /// Largest misfit of the power law at the earlier points (0 with three).
    pub residual: f64,
    pub points: usize,
}

/// Extrapolates a series from its last three points.
///
/// The uncertainty is the larger of the largest quadrature error and the
/// shift from the fit through the previous three points, or, with exactly
/// three points, the distance from the last value to the limit. Without a
/// decaying power law the last value is returned and the uncertainty covers
/// the spread of the last three values. `None` below three points.
pub fn extrapolate(scales: &[f64], values: &[f64], errors: &[f64]) -> Option<Extrapolation> {
    let k = scales.len();
    if k < 3 || values.len() != k {
        return None;
    }
    let quad = errors.iter().copied().fold(0.0, f64::max);
    let triple = |i: usize| {
        fit_power_law(
            [scales[i], scales[i + 1], scales[i + 2]],
            [values[i], values[i + 1], values[i + 2]],
        )
    };
    let last = values[k - 1];
    match triple(k - 3) {
        Some(fit) => {
            let shift = if k >= 4 {
                triple(k - 4).map_or((fit.limit - last).abs(), |prev| (fit.limit - prev.limit).abs())
            } else {
                (fit.limit - last).abs()
            };
            let residual = (0..k - 3)
                .map(|i| (fit.eval(scales[i]) - values[i]).abs())
                .fold(0.0, f64::max);
            Some(Extrapolation {
                limit: fit.limit,
                uncertainty: shift.max(quad),
                fit: Some(fit),
                residual,
                points: k,
            })
        }
        None => {
            let tail = &values[k - 3..];
            let spread = tail.iter().map(|v| (v - last).abs()).fold(0.0, f64::max);
            Some(Extrapolation {
                limit: last,
                uncertainty: spread.max(quad),
                fit: None,
                residual: 0.0,
                points: k,
            })
        }
    }
}

/// Least-squares slope of `ln |y|` against `ln x`, skipping zeros. `None`
/// with fewer than two usable points.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b != 0.0 && b.is_finite())
        .map(|(a, b)| (a.ln(), b.abs().ln()))
        .collect();
    least_squares_slope(&pts)
}

fn least_squares_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}
