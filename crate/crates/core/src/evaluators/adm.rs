use crate::error::{Error, Result};
use crate::expr::Params;
use crate::geometry::{Background, MetricField};
use crate::quadrature::{integrate_sphere, QuadPlan};

use super::{flat_normalization, GeometryInfo, MassReport, TermErrors, Terms};

/// ADM flux `int_{S_r} (d_i g_ij - d_j g_ii) nu^j dsigma / (2 (n-1) omega_(n-1))`
/// with Euclidean normal and measure.
pub fn adm_mass(g: &MetricField, r: f64, plan: &QuadPlan) -> Result<MassReport> {
    let n = g.dim();
    if matches!(g.kind(), Background::HyperbolicHyperboloid | Background::HyperbolicUpperHalfSpace) {
        return Err(Error::Metric("the ADM flux needs an asymptotically flat metric".into()));
    }
    plan.validate()?;
    let res = integrate_sphere(n, r, 1, plan, |x, nu, out| {
        let m = g.at(x)?;
        let mut s = 0.0;
        for j in 0..n {
            let mut c = 0.0;
            for i in 0..n {
                c += m.dg[i][i][j] - m.dg[j][i][i];
            }
            s += c * nu[j];
        }
        out[0] = s;
        Ok(())
    })?;
    let norm = 2.0 * flat_normalization(n);
    let flux = res.value[0];
    Ok(MassReport {
        evaluator: "adm".into(),
        n,
        params: Params::new(),
        geometry: GeometryInfo {
            kind: "sphere".into(),
            label: format!("S_r in R^{n}"),
            scale: r,
        },
        terms: Terms {
            flux: Some(flux),
            ..Terms::default()
        },
        errors: TermErrors {
            flux: Some(res.error[0]),
            total: res.error[0] / norm,
            converged: res.converged,
            ..TermErrors::default()
        },
        normalization: norm,
        total: flux / norm,
        notes: Vec::new(),
    })
}
