//! Study configuration files, in the `key = value` line format of metric
//! files.
//!
//! ```text
//! metric = schwarzschild-isotropic
//! n = 3
//! param m = 1
//! evaluator = poly-mass
//! sequence = boxes
//! scales = 16*2^0..3
//! quad.rtol = 1e-8
//! output.dir = run1
//! ```

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::expr::Params;
use crate::metrics::{builtin, load_metric_file, MetricSpec};
use crate::polytope::{load_prototype, parse_sigma, prototype, Polytope, SequencePlan};
use crate::quadrature::QuadPlan;

use crate::evaluators::AUDIT_ANGLE_BOUND;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvaluatorKind {
    Adm,
    PolyMass,
    SliceMass,
    AhMass,
    Prism,
}

impl EvaluatorKind {
    pub const ALL: [EvaluatorKind; 5] = [
        EvaluatorKind::Adm,
        EvaluatorKind::PolyMass,
        EvaluatorKind::SliceMass,
        EvaluatorKind::AhMass,
        EvaluatorKind::Prism,
    ];

    pub fn label(self) -> &'static str {
        match self {
            EvaluatorKind::Adm => "adm",
            EvaluatorKind::PolyMass => "poly-mass",
            EvaluatorKind::SliceMass => "slice-mass",
            EvaluatorKind::AhMass => "ah-mass",
            EvaluatorKind::Prism => "prism",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.label() == s)
    }

    /// The sequence used when the config names none.
    pub fn default_sequence(self) -> SequenceKind {
        match self {
            EvaluatorKind::Adm | EvaluatorKind::AhMass => SequenceKind::Spheres,
            EvaluatorKind::PolyMass | EvaluatorKind::SliceMass => SequenceKind::Boxes,
            EvaluatorKind::Prism => SequenceKind::Prisms,
        }
    }

    fn accepts(self, s: SequenceKind) -> bool {
        match self {
            EvaluatorKind::Adm | EvaluatorKind::AhMass => s == SequenceKind::Spheres,
            EvaluatorKind::PolyMass => matches!(s, SequenceKind::Boxes | SequenceKind::Prototype),
            EvaluatorKind::SliceMass => s == SequenceKind::Boxes,
            EvaluatorKind::Prism => s == SequenceKind::Prisms,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SequenceKind {
    /// Coordinate spheres of radius `r`.
    Spheres,
    /// Cubes `[-L, L]^n`.
    Boxes,
    /// A prototype polyhedron scaled by `r`.
    Prototype,
    /// Upper half space prisms at depth `L`.
    Prisms,
}

impl SequenceKind {
    pub fn label(self) -> &'static str {
        match self {
            SequenceKind::Spheres => "spheres",
            SequenceKind::Boxes => "boxes",
            SequenceKind::Prototype => "prototype",
            SequenceKind::Prisms => "prisms",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        [SequenceKind::Spheres, SequenceKind::Boxes, SequenceKind::Prototype, SequenceKind::Prisms]
            .into_iter()
            .find(|k| k.label() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl Format {
    pub fn label(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Svg => "svg",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        [Format::Csv, Format::Json, Format::Svg].into_iter().find(|f| f.label() == s)
    }
}

/// Where the metric comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum MetricRef {
    Builtin(String),
    File(PathBuf),
}

/// Everything needed to run a study.
#[derive(Debug, Clone, PartialEq)]
pub struct StudySpec {
    pub metric: MetricRef,
    /// Required for builtin metrics; must match the file for metric files.
    pub n: Option<usize>,
    pub params: Params,
    pub evaluator: EvaluatorKind,
    pub sequence: SequenceKind,
    pub scales: Vec<f64>,
    /// Builtin prototype name or prototype file, for prototype sequences.
    pub prototype: Option<String>,
    /// Bottom width `sigma(L)` of prisms.
    pub sigma: String,
    /// Coefficients of the static potential in `t, z_1, ..., z_n`.
    pub potential: Option<Vec<f64>>,
    /// Angle bound `c` of the sequence conditions.
    pub angle_bound: f64,
    pub quad: QuadPlan,
    pub output_dir: Option<PathBuf>,
    pub formats: Vec<Format>,
}

impl StudySpec {
    pub fn new(metric: MetricRef, evaluator: EvaluatorKind) -> Self {
        StudySpec {
            metric,
            n: None,
            params: Params::new(),
            evaluator,
            sequence: evaluator.default_sequence(),
            scales: Vec::new(),
            prototype: None,
            sigma: "exp(L/2)".into(),
            potential: None,
            angle_bound: AUDIT_ANGLE_BOUND,
            quad: QuadPlan::default(),
            output_dir: None,
            formats: vec![Format::Csv, Format::Json, Format::Svg],
        }
    }

    /// The metric definition, before parameter overrides.
    pub fn metric_spec(&self) -> Result<MetricSpec> {
        let spec = match &self.metric {
            MetricRef::Builtin(name) => {
                let n = self
                    .n
                    .ok_or_else(|| Error::Invalid(format!("builtin metric `{name}` needs a dimension n")))?;
                builtin(name, n, &Params::new())?
            }
            MetricRef::File(path) => load_metric_file(path)?,
        };
        if let Some(n) = self.n {
            if n != spec.dim {
                return Err(Error::Dimension(format!("n = {n} but metric `{}` is {}-dimensional", spec.name, spec.dim)));
            }
        }
        Ok(spec)
    }

    /// Checks cross-key consistency that the parser cannot see line by line.
    pub fn validate(&self) -> Result<()> {
        if !self.evaluator.accepts(self.sequence) {
            return Err(Error::Invalid(format!(
                "evaluator `{}` cannot run on a `{}` sequence",
                self.evaluator.label(),
                self.sequence.label()
            )));
        }
        if self.scales.is_empty() {
            return Err(Error::Invalid("a study needs at least one scale".into()));
        }
        if self.scales.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
            return Err(Error::Invalid(format!("scales must be positive, got {:?}", self.scales)));
        }
        if self.scales.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Invalid("scales must be strictly increasing".into()));
        }
        if self.sequence == SequenceKind::Prototype && self.prototype.is_none() {
            return Err(Error::Invalid("a prototype sequence needs `prototype =`".into()));
        }
        if !(self.angle_bound > 0.0) {
            return Err(Error::Invalid(format!("angle bound must be positive, got {}", self.angle_bound)));
        }
        self.quad.validate()
    }

    /// The polyhedron sequence, for every kind but spheres.
    pub fn sequence_plan(&self, n: usize) -> Result<Option<SequencePlan>> {
        Ok(match self.sequence {
            SequenceKind::Spheres => None,
            SequenceKind::Boxes => Some(SequencePlan {
                kind: crate::polytope::SequenceKind::Box { n },
                scales: self.scales.clone(),
            }),
            SequenceKind::Prototype => {
                let p = self.load_prototype()?;
                if p.dim != n {
                    return Err(Error::Dimension(format!("prototype is {}-dimensional, metric {n}-dimensional", p.dim)));
                }
                Some(SequencePlan {
                    kind: crate::polytope::SequenceKind::Prototype(std::sync::Arc::new(p)),
                    scales: self.scales.clone(),
                })
            }
            SequenceKind::Prisms => Some(SequencePlan::ah_prisms(n, self.scales.clone(), parse_sigma(&self.sigma)?)),
        })
    }

    fn load_prototype(&self) -> Result<Polytope> {
        let name = self.prototype.as_deref().unwrap_or_default();
        if crate::polytope::prototype_names().contains(&name) {
            prototype(name)
        } else {
            load_prototype(name)
        }
    }

    /// Renders the spec in the config format; parsing the result gives the
    /// same spec.
    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        match &self.metric {
            MetricRef::Builtin(name) => writeln!(s, "metric = {name}").unwrap(),
            MetricRef::File(path) => writeln!(s, "metric_file = {}", path.display()).unwrap(),
        }
        if let Some(n) = self.n {
            writeln!(s, "n = {n}").unwrap();
        }
        for (k, v) in &self.params {
            writeln!(s, "param {k} = {v}").unwrap();
        }
        writeln!(s, "evaluator = {}", self.evaluator.label()).unwrap();
        writeln!(s, "sequence = {}", self.sequence.label()).unwrap();
        let scales: Vec<String> = self.scales.iter().map(|v| v.to_string()).collect();
        writeln!(s, "scales = {}", scales.join(", ")).unwrap();
        if let Some(p) = &self.prototype {
            writeln!(s, "prototype = {p}").unwrap();
        }
        if self.sequence == SequenceKind::Prisms {
            writeln!(s, "sigma = {}", self.sigma).unwrap();
        }
        if let Some(v) = &self.potential {
            let c: Vec<String> = v.iter().map(|x| x.to_string()).collect();
            writeln!(s, "potential = {}", c.join(", ")).unwrap();
        }
        writeln!(s, "angle_bound = {}", self.angle_bound).unwrap();
        let q = &self.quad;
        writeln!(s, "quad.order = {}", q.order).unwrap();
        writeln!(s, "quad.rtol = {}", q.rtol).unwrap();
        writeln!(s, "quad.atol = {}", q.atol).unwrap();
        writeln!(s, "quad.max_levels = {}", q.max_levels).unwrap();
        writeln!(s, "quad.initial_panels = {}", q.initial_panels).unwrap();
        writeln!(s, "quad.workers = {}", q.workers).unwrap();
        if let Some(d) = &self.output_dir {
            writeln!(s, "output.dir = {}", d.display()).unwrap();
        }
        let f: Vec<&str> = self.formats.iter().map(|f| f.label()).collect();
        writeln!(s, "output.formats = {}", f.join(", ")).unwrap();
        s
    }
}

/// Parses `a, b, c` or the geometric range `a*2^i..j`.
pub fn parse_scales(text: &str) -> Result<Vec<f64>> {
    let text = text.trim();
    if let Some((base, range)) = text.split_once("*2^") {
        let base: f64 = base.trim().parse().map_err(|_| Error::Invalid(format!("invalid scale `{base}`")))?;
        let (i, j) = range
            .split_once("..")
            .ok_or_else(|| Error::Invalid(format!("expected `a*2^i..j`, got `{text}`")))?;
        let bad = || Error::Invalid(format!("invalid exponent range in `{text}`"));
        let i: i32 = i.trim().parse().map_err(|_| bad())?;
        let j: i32 = j.trim().parse().map_err(|_| bad())?;
        if j < i {
            return Err(bad());
        }
        return Ok((i..=j).map(|k| base * 2f64.powi(k)).collect());
    }
    let scales = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| Error::Invalid(format!("invalid scale `{t}`"))))
        .collect::<Result<Vec<f64>>>()?;
    if scales.is_empty() {
        return Err(Error::Invalid("no scales given".into()));
    }
    Ok(scales)
}

fn parse_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| Error::Invalid(format!("invalid number `{}`", t.trim()))))
        .collect()
}

/// Keys other than `param NAME`.
pub const KEYS: [&str; 18] = [
    "metric",
    "metric_file",
    "n",
    "evaluator",
    "sequence",
    "scales",
    "prototype",
    "sigma",
    "potential",
    "angle_bound",
    "quad.order",
    "quad.rtol",
    "quad.atol",
    "quad.max_levels",
    "quad.initial_panels",
    "quad.workers",
    "output.dir",
    "output.formats",
];

fn is_known_key(key: &str) -> bool {
    key.starts_with("param ") || KEYS.contains(&key)
}

/// Applies one `key = value` setting. Shared by the file parser and the
/// command line, whose flags mirror the keys.
pub fn apply_setting(spec: &mut StudySpec, key: &str, value: &str) -> Result<()> {
    let num = |v: &str| v.parse::<f64>().map_err(|_| Error::Invalid(format!("`{key}` expects a number, got `{v}`")));
    let int = |v: &str| v.parse::<usize>().map_err(|_| Error::Invalid(format!("`{key}` expects an integer, got `{v}`")));
    if let Some(name) = key.strip_prefix("param ") {
        spec.params.insert(name.trim().to_string(), num(value)?);
        return Ok(());
    }
    match key {
        "metric" => spec.metric = MetricRef::Builtin(value.to_string()),
        "metric_file" => spec.metric = MetricRef::File(PathBuf::from(value)),
        "n" => spec.n = Some(int(value)?),
        "evaluator" => {
            spec.evaluator = EvaluatorKind::from_label(value).ok_or_else(|| {
                let known: Vec<&str> = EvaluatorKind::ALL.iter().map(|k| k.label()).collect();
                Error::Invalid(format!("unknown evaluator `{value}` (known: {})", known.join(", ")))
            })?
        }
        "sequence" => {
            spec.sequence = SequenceKind::from_label(value).ok_or_else(|| {
                Error::Invalid(format!("unknown sequence `{value}` (known: spheres, boxes, prototype, prisms)"))
            })?
        }
        "scales" => spec.scales = parse_scales(value)?,
        "prototype" => spec.prototype = Some(value.to_string()),
        "sigma" => {
            parse_sigma(value)?;
            spec.sigma = value.to_string();
        }
        "potential" => spec.potential = Some(parse_list(value)?),
        "angle_bound" => spec.angle_bound = num(value)?,
        "quad.order" => spec.quad.order = int(value)?,
        "quad.rtol" => spec.quad.rtol = num(value)?,
        "quad.atol" => spec.quad.atol = num(value)?,
        "quad.max_levels" => spec.quad.max_levels = int(value)?,
        "quad.initial_panels" => spec.quad.initial_panels = int(value)?,
        "quad.workers" => spec.quad.workers = int(value)?,
        "output.dir" => spec.output_dir = Some(PathBuf::from(value)),
        "output.formats" => {
            spec.formats = value
                .split(',')
                .map(|f| {
                    Format::from_label(f.trim())
                        .ok_or_else(|| Error::Invalid(format!("unknown format `{}` (known: csv, json, svg)", f.trim())))
                })
                .collect::<Result<_>>()?
        }
        _ => return Err(Error::Invalid(format!("unknown key `{key}`"))),
    }
    Ok(())
}

/// Parses config text; `path` is used in error messages only.
pub fn parse_study_config(text: &str, path: &str) -> Result<StudySpec> {
    let mut spec = StudySpec::new(MetricRef::Builtin(String::new()), EvaluatorKind::PolyMass);
    let mut saw_metric = false;
    let mut saw_evaluator = false;
    let mut saw_sequence = false;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim_start();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let indent = raw.len() - trimmed.len();
        let err = |column: usize, message: String| Error::File {
            path: path.to_string(),
            line,
            column,
            message,
        };
        let Some(eq) = trimmed.find('=') else {
            return Err(err(indent + 1, "expected `key = value`".into()));
        };
        let key = trimmed[..eq].trim();
        let value_raw = &trimmed[eq + 1..];
        let value = value_raw.trim();
        let value_col = indent + eq + 1 + (value_raw.len() - value_raw.trim_start().len()) + 1;
        if value.is_empty() {
            return Err(err(value_col, format!("missing value for `{key}`")));
        }
        if !is_known_key(key) {
            return Err(err(indent + 1, format!("unknown key `{key}`")));
        }
        apply_setting(&mut spec, key, value).map_err(|e| match e {
            Error::Invalid(m) => err(value_col, m),
            other => err(value_col, other.to_string()),
        })?;
        saw_metric |= key == "metric" || key == "metric_file";
        saw_evaluator |= key == "evaluator";
        saw_sequence |= key == "sequence";
    }
    let missing = |what: &str| Error::File {
        path: path.to_string(),
        line: 0,
        column: 0,
        message: format!("missing `{what}`"),
    };
    if !saw_metric {
        return Err(missing("metric"));
    }
    if !saw_evaluator {
        return Err(missing("evaluator"));
    }
    if !saw_sequence {
        spec.sequence = spec.evaluator.default_sequence();
    }
    Ok(spec)
}

pub fn load_study_config(path: impl AsRef<Path>) -> Result<StudySpec> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_study_config(&text, &path.display().to_string())
}
