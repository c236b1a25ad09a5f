//! CSV, JSON and SVG output of a study.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

use super::{Format, Study};

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// One row per evaluated element: index, scale, face_term, edge_term,
/// total, quad_err. Sphere evaluators report their flux as the face term.
pub fn study_csv(study: &Study) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(["index", "scale", "face_term", "edge_term", "total", "quad_err"]).map_err(io)?;
    for (i, r) in study.reports.iter().enumerate() {
        w.write_record([
            i.to_string(),
            r.geometry.scale.to_string(),
            opt(r.terms.face.or(r.terms.flux)),
            opt(r.terms.edge),
            r.total.to_string(),
            r.errors.total.to_string(),
        ])
        .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

pub fn study_json(study: &Study) -> String {
    serde_json::to_string_pretty(study).expect("studies serialize") + "\n"
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: [f64; 4] = [70.0, 20.0, 30.0, 50.0]; // left, right, top, bottom
const COLORS: [&str; 2] = ["#1f77b4", "#d62728"];

/// Log-log plot of `|total - limit|` and `|edge contribution|` against
/// scale, one polyline per series with positive values.
pub fn study_svg(study: &Study) -> String {
    let k = study.reports.len();
    let scales: Vec<f64> = study.reports.iter().map(|r| r.geometry.scale).collect();
    let limit = study.extrapolation.as_ref().map_or_else(|| study.totals().last().copied().unwrap_or(0.0), |e| e.limit);
    let distance: Vec<f64> = study.totals().iter().map(|t| (t - limit).abs()).collect();
    let edge: Vec<f64> = study.edge_contributions().iter().map(|e| e.abs()).collect();
    let series: Vec<(&str, Vec<(f64, f64)>)> = [("|total - limit|", distance), ("|edge contribution|", edge)]
        .into_iter()
        .map(|(name, ys)| {
            let pts: Vec<(f64, f64)> = scales
                .iter()
                .zip(&ys)
                .filter(|(x, y)| **x > 0.0 && **y > 0.0 && y.is_finite())
                .map(|(x, y)| (x.log10(), y.log10()))
                .collect();
            (name, pts)
        })
        .filter(|(_, pts)| !pts.is_empty())
        .collect();

    let all = series.iter().flat_map(|(_, p)| p.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for (x, y) in all {
        x0 = x0.min(*x);
        x1 = x1.max(*x);
        y0 = y0.min(*y);
        y1 = y1.max(*y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    // whole decades around the data
    let (x0, x1) = (x0.floor(), x1.ceil().max(x0.floor() + 1.0));
    let (y0, y1) = (y0.floor(), y1.ceil().max(y0.floor() + 1.0));
    let pw = WIDTH - MARGIN[0] - MARGIN[1];
    let ph = HEIGHT - MARGIN[2] - MARGIN[3];
    let px = |x: f64| MARGIN[0] + (x - x0) / (x1 - x0) * pw;
    let py = |y: f64| MARGIN[2] + (y1 - y) / (y1 - y0) * ph;

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#).unwrap();
    writeln!(
        s,
        r#"<text x="{:.2}" y="18" font-family="sans-serif" font-size="13" text-anchor="middle">{} on {}, {} elements</text>"#,
        WIDTH / 2.0,
        study.evaluator,
        study.metric,
        k
    )
    .unwrap();
    writeln!(
        s,
        r##"<rect x="{:.2}" y="{:.2}" width="{pw:.2}" height="{ph:.2}" fill="none" stroke="#333"/>"##,
        MARGIN[0], MARGIN[2]
    )
    .unwrap();
    for d in (x0 as i32)..=(x1 as i32) {
        let x = px(d as f64);
        writeln!(
            s,
            r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#ddd"/><text x="{x:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="middle">1e{d}</text>"##,
            MARGIN[2],
            MARGIN[2] + ph,
            MARGIN[2] + ph + 16.0
        )
        .unwrap();
    }
    for d in (y0 as i32)..=(y1 as i32) {
        let y = py(d as f64);
        writeln!(
            s,
            r##"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/><text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="end">1e{d}</text>"##,
            MARGIN[0],
            MARGIN[0] + pw,
            MARGIN[0] - 6.0,
            y + 4.0
        )
        .unwrap();
    }
    writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="middle">scale</text>"#,
        MARGIN[0] + pw / 2.0,
        HEIGHT - 10.0
    )
    .unwrap();
    for (i, (name, pts)) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let coords: Vec<String> = pts.iter().map(|(x, y)| format!("{:.2},{:.2}", px(*x), py(*y))).collect();
        writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            coords.join(" ")
        )
        .unwrap();
        for (x, y) in pts {
            writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, px(*x), py(*y)).unwrap();
        }
        let ly = MARGIN[2] + 16.0 + 16.0 * i as f64;
        let lx = MARGIN[0] + pw - 150.0;
        writeln!(
            s,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11">{name}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    s
}

/// Writes the study in one format.
pub fn emit(study: &Study, format: Format, path: &Path) -> Result<()> {
    let text = match format {
        Format::Csv => study_csv(study)?,
        Format::Json => study_json(study),
        Format::Svg => study_svg(study),
    };
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Writes `study.csv`, `study.json` and `convergence.svg` (as selected)
/// into `dir`, creating it if needed, and returns the paths written.
pub fn emit_all(study: &Study, dir: &Path, formats: &[Format]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let mut out = Vec::new();
    for &f in formats {
        let name = match f {
            Format::Csv => "study.csv",
            Format::Json => "study.json",
            Format::Svg => "convergence.svg",
        };
        let path = dir.join(name);
        emit(study, f, &path)?;
        out.push(path);
    }
    Ok(out)
}
