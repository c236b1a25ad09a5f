use crate::error::{Error, Result};
use crate::expr::{Expr, Params};

use super::{background_exprs, Asymptotic, Chart, Family, MetricSpec};

const NAMES: [&str; 8] = [
    "euclidean",
    "schwarzschild-isotropic",
    "schwarzschild-areal-rect",
    "hyperbolic-hyperboloid",
    "hyperbolic-uhs",
    "ads-schwarzschild-hyperboloid",
    "conformal-custom",
    "perturbed-flat",
];

pub fn builtin_names() -> &'static [&'static str] {
    &NAMES
}

/// `r^k` written compactly.
fn rpow(k: usize) -> String {
    if k == 1 {
        "r".into()
    } else {
        format!("r^{k}")
    }
}

/// The conformal exponent `4/(n-2)` as expression text.
fn conformal_exponent(n: usize) -> String {
    let k = n - 2;
    if 4 % k == 0 {
        format!("{}", 4 / k)
    } else {
        format!("(4/{k})")
    }
}

fn parse_all(sources: &[String], n: usize) -> Vec<Expr> {
    sources
        .iter()
        .map(|s| Expr::parse(s, n).unwrap_or_else(|e| panic!("builtin `{s}`: {e}")))
        .collect()
}

fn upper<F: FnMut(usize, usize) -> String>(n: usize, mut f: F) -> Vec<String> {
    let mut out = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in i..n {
            out.push(f(i, j));
        }
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn spec(
    name: &str,
    n: usize,
    asymptotic: Asymptotic,
    decay: f64,
    params: Vec<(String, f64)>,
    sources: Vec<String>,
    perturbation: Option<Vec<String>>,
    family: Family,
) -> MetricSpec {
    MetricSpec {
        name: name.to_string(),
        dim: n,
        asymptotic,
        decay,
        params,
        components: parse_all(&sources, n),
        sources,
        perturbation: perturbation.map(|p| parse_all(&p, n)),
        chart: Chart::Native,
        family,
    }
}

/// A built-in metric by name, with parameter overrides applied to its
/// defaults.
pub fn builtin(name: &str, n: usize, overrides: &Params) -> Result<MetricSpec> {
    if !(2..=crate::expr::MAX_DIM).contains(&n) {
        return Err(Error::Dimension(format!(
            "builtin metrics support 2..={} dimensions, got {n}",
            crate::expr::MAX_DIM
        )));
    }
    let needs_af_dim = matches!(
        name,
        "schwarzschild-isotropic" | "schwarzschild-areal-rect" | "conformal-custom" | "ads-schwarzschild-hyperboloid"
    );
    if needs_af_dim && n < 3 {
        return Err(Error::Dimension(format!("`{name}` needs n >= 3, got {n}")));
    }
    let k = n.saturating_sub(2);
    let p = |v: &[(&str, f64)]| v.iter().map(|(a, b)| (a.to_string(), *b)).collect::<Vec<_>>();
    let mut s = match name {
        "euclidean" => spec(
            name,
            n,
            Asymptotic::Flat,
            f64::INFINITY,
            vec![],
            upper(n, |i, j| if i == j { "1".into() } else { "0".into() }),
            None,
            Family::Euclidean,
        ),
        "schwarzschild-isotropic" => {
            let e = conformal_exponent(n);
            let u = format!("(1 + m/(2*{}))", rpow(k));
            spec(
                name,
                n,
                Asymptotic::Flat,
                k as f64,
                p(&[("m", 1.0)]),
                upper(n, |i, j| if i == j { format!("{u}^{e}") } else { "0".into() }),
                None,
                Family::SchwarzschildIsotropic,
            )
        }
        "schwarzschild-areal-rect" => {
            // A(r) - 1 = 2m r^(2-n) / (1 - 2m r^(2-n))
            let f = format!("2*m/({} - 2*m)", rpow(k));
            let h = upper(n, |i, j| format!("{f}*x{}*x{}/r^2", i + 1, j + 1));
            let g = upper(n, |i, j| {
                if i == j {
                    format!("1 + {f}*x{}^2/r^2", i + 1)
                } else {
                    format!("{f}*x{}*x{}/r^2", i + 1, j + 1)
                }
            });
            spec(
                name,
                n,
                Asymptotic::Flat,
                k as f64,
                p(&[("m", 1.0)]),
                g,
                Some(h),
                Family::SchwarzschildAreal,
            )
        }
        "hyperbolic-hyperboloid" | "hyperbolic-uhs" => {
            let g: Vec<String> = background_exprs(Asymptotic::Hyperboloid, n)
                .iter()
                .map(|e| e.to_string())
                .collect();
            let mut s = spec(
                name,
                n,
                Asymptotic::Hyperboloid,
                f64::INFINITY,
                vec![],
                g,
                Some(upper(n, |_, _| "0".into())),
                Family::Hyperbolic,
            );
            if name == "hyperbolic-uhs" {
                s = s.to_upper_half_space()?;
            }
            s
        }
        "ads-schwarzschild-hyperboloid" => {
            // (1 + r^2 - 2m r^(2-n))^-1 - (1 + r^2)^-1, written without cancellation
            let f = format!("2*m/({rk}*(1 + r^2)*(1 + r^2 - 2*m/{rk}))", rk = rpow(k));
            let h = upper(n, |i, j| format!("{f}*x{}*x{}/r^2", i + 1, j + 1));
            let g = upper(n, |i, j| {
                let base = format!("x{}*x{}/(1 + r^2)", i + 1, j + 1);
                let hij = format!("{f}*x{}*x{}/r^2", i + 1, j + 1);
                if i == j {
                    format!("1 - {base} + {hij}")
                } else {
                    format!("-{base} + {hij}")
                }
            });
            spec(
                name,
                n,
                Asymptotic::Hyperboloid,
                n as f64,
                p(&[("m", 1.0)]),
                g,
                Some(h),
                Family::AdsSchwarzschild,
            )
        }
        "conformal-custom" => {
            let u = format!("(1 + a/{} + b*x1/{})", rpow(k), rpow(n));
            let e = conformal_exponent(n);
            spec(
                name,
                n,
                Asymptotic::Flat,
                k as f64,
                p(&[("a", 1.0), ("b", 0.5)]),
                upper(n, |i, j| if i == j { format!("{u}^{e}") } else { "0".into() }),
                None,
                Family::Conformal,
            )
        }
        "perturbed-flat" => {
            let s = upper(n, |i, j| {
                let xx = format!("x{}*x{}/r^2", i + 1, j + 1);
                if i == j {
                    format!("1 + {xx}")
                } else {
                    xx
                }
            });
            return perturbed_flat(n, &s, overrides);
        }
        other => {
            return Err(Error::Invalid(format!(
                "unknown metric `{other}` (builtins: {})",
                NAMES.join(", ")
            )))
        }
    };
    // overrides replace defaults in the spec itself
    let resolved = s.resolve_params(overrides)?;
    for (k, v) in s.params.iter_mut() {
        *v = resolved[k];
    }
    Ok(s)
}

/// `g = u^(4/(n-2)) delta` for a user conformal factor `u`.
pub fn conformal(n: usize, factor: &str, params: Vec<(String, f64)>) -> Result<MetricSpec> {
    if !(3..=crate::expr::MAX_DIM).contains(&n) {
        return Err(Error::Dimension(format!("conformal metrics need 3 <= n <= 6, got {n}")));
    }
    let names: Vec<String> = params.iter().map(|(k, _)| k.clone()).collect();
    Expr::parse_with_params(factor, n, &names)?;
    let e = conformal_exponent(n);
    let sources = upper(n, |i, j| if i == j { format!("({factor})^{e}") } else { "0".into() });
    let components = sources
        .iter()
        .map(|s| Expr::parse_with_params(s, n, &names))
        .collect::<Result<Vec<_>>>()?;
    Ok(MetricSpec {
        name: "conformal".into(),
        dim: n,
        asymptotic: Asymptotic::Flat,
        decay: (n - 2) as f64,
        params,
        components,
        sources,
        perturbation: None,
        chart: Chart::Native,
        family: Family::Conformal,
    })
}

/// `g = delta + eps S(x) |x|^(-p)` for an upper-triangle expression matrix `S`.
/// Parameters `eps` (default 0.1) and `p` (default `n - 2`, or `1` when
/// `n = 2`) may be overridden; the declared decay is the value of `p`.
pub fn perturbed_flat(n: usize, s: &[String], overrides: &Params) -> Result<MetricSpec> {
    if s.len() != n * (n + 1) / 2 {
        return Err(Error::Dimension(format!(
            "perturbation matrix needs {} upper-triangle entries, got {}",
            n * (n + 1) / 2,
            s.len()
        )));
    }
    let default_p = if n > 2 { (n - 2) as f64 } else { 1.0 };
    let mut params = vec![("eps".to_string(), 0.1), ("p".to_string(), default_p)];
    for (k, v) in overrides {
        match params.iter_mut().find(|(n, _)| n == k) {
            Some(slot) => slot.1 = *v,
            None => {
                return Err(Error::Invalid(format!(
                    "metric `perturbed-flat` has no parameter `{k}` (known: eps, p)"
                )))
            }
        }
    }
    let decay = params[1].1;
    let names: Vec<String> = params.iter().map(|(k, _)| k.clone()).collect();
    let h: Vec<String> = s.iter().map(|e| format!("eps*({e})/r^p")).collect();
    let mut idx = 0;
    let g = upper(n, |i, j| {
        let out = if i == j {
            format!("1 + {}", h[idx])
        } else {
            h[idx].clone()
        };
        idx += 1;
        out
    });
    let parse = |v: &[String]| {
        v.iter()
            .map(|e| Expr::parse_with_params(e, n, &names))
            .collect::<Result<Vec<_>>>()
    };
    Ok(MetricSpec {
        name: "perturbed-flat".into(),
        dim: n,
        asymptotic: Asymptotic::Flat,
        decay,
        params,
        components: parse(&g)?,
        perturbation: Some(parse(&h)?),
        sources: g,
        chart: Chart::Native,
        family: Family::PerturbedFlat,
    })
}

/// The isometry from upper half space coordinates `y` to hyperboloid
/// coordinates `z`: `z_1 = (|y|^2 - 1)/(2 y_1)`, `z_a = y_a / y_1`.
pub fn uhs_map(n: usize) -> Result<Vec<Expr>> {
    let sq: Vec<String> = (1..=n).map(|i| format!("x{i}^2")).collect();
    let mut out = vec![Expr::parse(&format!("({} - 1)/(2*x1)", sq.join(" + ")), n)?];
    for a in 2..=n {
        out.push(Expr::parse(&format!("x{a}/x1"), n)?);
    }
    Ok(out)
}

impl MetricSpec {
    /// The same hyperboloid-model metric evaluated in upper half space
    /// coordinates.
    pub fn to_upper_half_space(&self) -> Result<MetricSpec> {
        match (self.asymptotic, self.chart) {
            (Asymptotic::Hyperboloid, Chart::Native) => {
                let mut s = self.clone();
                s.chart = Chart::HyperboloidToUpperHalfSpace;
                s.asymptotic = Asymptotic::UpperHalfSpace;
                if s.name.ends_with("-hyperboloid") {
                    s.name = s.name.trim_end_matches("-hyperboloid").to_string() + "-uhs";
                }
                Ok(s)
            }
            (_, Chart::HyperboloidToUpperHalfSpace) | (Asymptotic::UpperHalfSpace, _) => Ok(self.clone()),
            _ => Err(Error::Metric(format!(
                "metric `{}` is not asymptotically hyperbolic",
                self.name
            ))),
        }
    }
}
