//! Line-oriented metric definition files.
//!
//! ```text
//! # isotropic Schwarzschild
//! dim = 3
//! type = AF
//! decay = 1
//! param m = 1
//! g[1][1] = (1 + m/(2*r))^4
//! g[1][2] = 0
//! ...
//! ```

use std::path::Path;

use crate::error::{Error, Result};
use crate::expr::Expr;

use super::{validate_decay, Asymptotic, Chart, Family, MetricSpec};

fn file_error(path: &str, line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::File {
        path: path.to_string(),
        line,
        column,
        message: message.into(),
    }
}

/// Loads and validates a metric file.
pub fn load_metric_file(path: impl AsRef<Path>) -> Result<MetricSpec> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "metric".into());
    parse_metric_file(&text, &path.display().to_string(), &name)
}

/// Parses metric file text; `path` is used in error messages only.
pub fn parse_metric_file(text: &str, path: &str, name: &str) -> Result<MetricSpec> {
    let mut dim: Option<usize> = None;
    let mut asymptotic: Option<Asymptotic> = None;
    let mut decay: Option<(f64, usize)> = None;
    let mut params: Vec<(String, f64)> = Vec::new();
    // (i, j, source, line, column of source)
    let mut comps: Vec<(usize, usize, String, usize, usize)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim_start();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let indent = raw.len() - trimmed.len();
        let Some(eq) = trimmed.find('=') else {
            return Err(file_error(path, line, indent + 1, "expected `key = value`"));
        };
        let key = trimmed[..eq].trim();
        let value_raw = &trimmed[eq + 1..];
        let value = value_raw.trim();
        let value_col = indent + eq + 1 + (value_raw.len() - value_raw.trim_start().len()) + 1;
        if value.is_empty() {
            return Err(file_error(path, line, value_col, format!("missing value for `{key}`")));
        }
        if key == "dim" {
            let n: usize = value
                .parse()
                .map_err(|_| file_error(path, line, value_col, format!("invalid dimension `{value}`")))?;
            if !(2..=crate::expr::MAX_DIM).contains(&n) {
                return Err(file_error(
                    path,
                    line,
                    value_col,
                    format!("dimension must be between 2 and {}", crate::expr::MAX_DIM),
                ));
            }
            dim = Some(n);
        } else if key == "type" {
            asymptotic = Some(Asymptotic::from_label(value).ok_or_else(|| {
                file_error(
                    path,
                    line,
                    value_col,
                    format!("unknown type `{value}` (expected AF, AH-hyperboloid or AH-uhs)"),
                )
            })?);
        } else if key == "decay" {
            let v: f64 = value
                .parse()
                .map_err(|_| file_error(path, line, value_col, format!("invalid decay rate `{value}`")))?;
            decay = Some((v, line));
        } else if let Some(pname) = key.strip_prefix("param ") {
            let pname = pname.trim();
            let valid = !pname.is_empty()
                && pname.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
                && pname.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
            if !valid {
                return Err(file_error(path, line, indent + 1, format!("invalid parameter name in `{key}`")));
            }
            let v: f64 = value.parse().map_err(|_| {
                file_error(path, line, value_col, format!("invalid default `{value}` for `{pname}`"))
            })?;
            if params.iter().any(|(n, _)| n == pname) {
                return Err(file_error(path, line, indent + 1, format!("parameter `{pname}` declared twice")));
            }
            params.push((pname.to_string(), v));
        } else if let Some((i, j)) = component_indices(key) {
            if i > j {
                return Err(file_error(
                    path,
                    line,
                    indent + 1,
                    format!("asymmetric specification: give g[{j}][{i}] instead of g[{i}][{j}] (i <= j)"),
                ));
            }
            comps.push((i, j, value.to_string(), line, value_col));
        } else {
            return Err(file_error(path, line, indent + 1, format!("unknown key `{key}`")));
        }
    }

    let n = dim.ok_or_else(|| file_error(path, 1, 1, "missing `dim`"))?;
    let asymptotic = asymptotic.ok_or_else(|| file_error(path, 1, 1, "missing `type`"))?;
    let (decay, decay_line) = decay.ok_or_else(|| file_error(path, 1, 1, "missing `decay`"))?;
    validate_decay(asymptotic, n, decay).map_err(|e| {
        let msg = match e {
            Error::Metric(m) => m,
            other => other.to_string(),
        };
        file_error(path, decay_line, 1, msg)
    })?;

    let names: Vec<String> = params.iter().map(|(k, _)| k.clone()).collect();
    let mut slots: Vec<Option<(Expr, String)>> = vec![None; n * (n + 1) / 2];
    for (i, j, src, line, col) in comps {
        if i == 0 || j == 0 || j > n {
            return Err(Error::Dimension(format!(
                "{path}:{line}: component g[{i}][{j}] outside 1..={n}"
            )));
        }
        let k = crate::geometry::packed(i - 1, j - 1, n);
        if slots[k].is_some() {
            return Err(file_error(path, line, 1, format!("g[{i}][{j}] given twice")));
        }
        let e = Expr::parse_with_params(&src, n, &names).map_err(|e| {
            let off = match &e {
                Error::Syntax { offset, .. } | Error::UnknownIdentifier { offset, .. } => *offset,
                _ => 0,
            };
            file_error(path, line, col + off, e.to_string())
        })?;
        slots[k] = Some((e, src));
    }
    let mut missing = Vec::new();
    for i in 0..n {
        for j in i..n {
            if slots[crate::geometry::packed(i, j, n)].is_none() {
                missing.push(format!("g[{}][{}]", i + 1, j + 1));
            }
        }
    }
    if !missing.is_empty() {
        return Err(Error::Metric(format!("{path}: missing components {}", missing.join(", "))));
    }
    let (components, sources): (Vec<Expr>, Vec<String>) = slots.into_iter().flatten().unzip();
    Ok(MetricSpec {
        name: name.to_string(),
        dim: n,
        asymptotic,
        decay,
        params,
        components,
        sources,
        perturbation: None,
        chart: Chart::Native,
        family: Family::Custom,
    })
}

fn component_indices(key: &str) -> Option<(usize, usize)> {
    let rest = key.strip_prefix("g[")?;
    let (i, rest) = rest.split_once("][")?;
    let j = rest.strip_suffix(']')?;
    Some((i.trim().parse().ok()?, j.trim().parse().ok()?))
}

/// Canonical file rendering; expression text is emitted as written.
pub(crate) fn serialize(spec: &MetricSpec) -> String {
    let mut out = String::new();
    out.push_str(&format!("# {}\n", spec.name));
    out.push_str(&format!("dim = {}\n", spec.dim));
    // a metric transported to upper half space is stored in its authored chart
    let label = match spec.chart {
        Chart::HyperboloidToUpperHalfSpace => Asymptotic::Hyperboloid.label(),
        Chart::Native => spec.asymptotic.label(),
    };
    out.push_str(&format!("type = {label}\n"));
    out.push_str(&format!("decay = {}\n", fmt_real(spec.decay)));
    for (k, v) in &spec.params {
        out.push_str(&format!("param {k} = {}\n", fmt_real(*v)));
    }
    let n = spec.dim;
    let mut idx = 0;
    for i in 0..n {
        for j in i..n {
            out.push_str(&format!("g[{}][{}] = {}\n", i + 1, j + 1, spec.sources[idx]));
            idx += 1;
        }
    }
    out
}

fn fmt_real(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:?}")
    }
}
