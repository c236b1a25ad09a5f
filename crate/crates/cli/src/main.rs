//! `polymass`: mass of asymptotically flat and hyperbolic metrics from large
//! spheres and coordinate polyhedra.

mod print;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use polymass::error::Error;
use polymass::evaluators::{
    check_a_functional, check_linearization, check_weighted_linearization, positivity_audit, DEFAULT_EPSILONS,
};
use polymass::expr::{Expr, Params};
use polymass::geometry::TensorField;
use polymass::harness::{
    apply_setting, emit_all, load_study_config, run_study, EvaluatorKind, MetricRef, Study, StudySpec,
};
use polymass::metrics::{builtin_names, MetricSpec};
use polymass::polytope::{Patch, Polytope};
use polymass::quadrature::{Domain, QuadPlan};

#[derive(Parser)]
#[command(name = "polymass", version, about = "ADM and AH mass from spheres, polyhedra and prisms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// ADM mass flux through the coordinate sphere of radius r.
    Adm {
        #[command(flatten)]
        common: Common,
        /// Sphere radius.
        #[arg(long)]
        r: f64,
    },
    /// Mass from face mean curvatures and dihedral-angle deficits of a polyhedron.
    PolyMass {
        #[command(flatten)]
        common: Common,
        /// Half-width of the coordinate box [-L, L]^n.
        #[arg(long = "box-L", conflicts_with_all = ["prototype", "scale"])]
        box_l: Option<f64>,
        /// Builtin prototype name or prototype file.
        #[arg(long, requires = "scale")]
        prototype: Option<String>,
        /// Scale factor applied to the prototype.
        #[arg(long, requires = "prototype")]
        scale: Option<f64>,
    },
    /// Mass from the coordinate slices of the box [-L, L]^n.
    SliceMass {
        #[command(flatten)]
        common: Common,
        /// Half-width of the box.
        #[arg(long = "L")]
        l: f64,
    },
    /// Asymptotically hyperbolic mass functional on the sphere of radius r.
    AhMass {
        #[command(flatten)]
        common: Common,
        /// Sphere radius in hyperboloid coordinates.
        #[arg(long)]
        r: f64,
        /// Static potential coefficients c_0, ..., c_n of t, z_1, ..., z_n.
        #[arg(long)]
        potential: Option<String>,
    },
    /// Mass functional of an upper half space prism.
    Prism {
        #[command(flatten)]
        common: Common,
        /// Height parameter of the prism.
        #[arg(long = "L")]
        l: f64,
        /// Bottom half-width sigma(L), an expression in L.
        #[arg(long)]
        sigma: Option<String>,
    },
    /// Second-order convergence of the linearized face integrand on a box face.
    CheckLinearization {
        #[command(flatten)]
        metric: MetricArgs,
        #[command(flatten)]
        perturbation: TensorArgs,
        /// Half-width of the box whose face is used.
        #[arg(long = "box-L", default_value_t = 1.0)]
        box_l: f64,
        /// Face index of the box.
        #[arg(long, default_value_t = 0)]
        face: usize,
        /// Weight V for the weighted check.
        #[arg(long)]
        weight: Option<String>,
        /// Comma-separated ladder of epsilons.
        #[arg(long)]
        epsilons: Option<String>,
        /// Accepted slope range.
        #[arg(long, default_value_t = 1.8)]
        slope_min: f64,
        #[arg(long, default_value_t = 2.2)]
        slope_max: f64,
        #[command(flatten)]
        quad: QuadArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// The boundary functional for V = 1/y_1 on a hyperplane of upper half space.
    CheckAFunctional {
        #[command(flatten)]
        metric: MetricArgs,
        #[command(flatten)]
        perturbation: TensorArgs,
        /// Point of the hyperplane, comma-separated.
        #[arg(long)]
        origin: String,
        /// Tangent vector of the hyperplane; give n - 1 of them.
        #[arg(long = "tangent", required = true)]
        tangents: Vec<String>,
        /// Half-width of the parameter square.
        #[arg(long, default_value_t = 1.0)]
        half: f64,
        /// Parameter point to sample, comma-separated; repeatable.
        #[arg(long = "sample")]
        samples: Vec<String>,
        /// Largest accepted |A| relative to 1 + max |tr h|.
        #[arg(long, default_value_t = 1e-9)]
        tolerance: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Sign of the polyhedral mass combination along a box or prototype sequence.
    Audit {
        #[command(flatten)]
        metric: MetricArgs,
        /// Scales of the sequence.
        #[arg(long)]
        scales: String,
        /// `boxes` or `prototype`.
        #[arg(long, default_value = "boxes")]
        sequence: String,
        /// Builtin prototype name or prototype file.
        #[arg(long)]
        prototype: Option<String>,
        #[command(flatten)]
        quad: QuadArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Convergence study from a config file, flags, or both.
    Study {
        /// Study config file; flags override its settings.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        metric: MetricArgs,
        #[arg(long)]
        evaluator: Option<String>,
        #[arg(long)]
        sequence: Option<String>,
        /// `a, b, c` or `a*2^i..j`.
        #[arg(long)]
        scales: Option<String>,
        #[arg(long)]
        prototype: Option<String>,
        #[arg(long)]
        sigma: Option<String>,
        #[arg(long)]
        potential: Option<String>,
        /// Angle bound c of the sequence conditions.
        #[arg(long)]
        angle_bound: Option<String>,
        #[command(flatten)]
        quad: QuadArgs,
        /// Comma-separated output formats: csv, json, svg.
        #[arg(long)]
        formats: Option<String>,
        /// Print the study as JSON.
        #[arg(long)]
        json: bool,
        /// Directory for study.csv, study.json and convergence.svg.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print the equivalent config file and exit.
        #[arg(long)]
        dump_config: bool,
    },
    /// Builtin metrics with their parameters and decay rates.
    ListMetrics {
        /// Dimension used to instantiate the metrics.
        #[arg(long, default_value_t = 3)]
        n: usize,
    },
}

#[derive(Args)]
struct MetricArgs {
    /// Builtin metric name (see list-metrics).
    #[arg(long, conflicts_with = "metric_file")]
    metric: Option<String>,
    /// Metric definition file.
    #[arg(long)]
    metric_file: Option<PathBuf>,
    /// Dimension; required for builtin metrics.
    #[arg(long)]
    n: Option<usize>,
    /// Parameter override NAME=VALUE; repeatable.
    #[arg(long = "param", value_name = "NAME=VALUE")]
    params: Vec<String>,
}

#[derive(Args)]
struct QuadArgs {
    /// Gauss points per axis per panel.
    #[arg(long)]
    quad_order: Option<String>,
    #[arg(long)]
    quad_rtol: Option<String>,
    #[arg(long)]
    quad_atol: Option<String>,
    #[arg(long)]
    quad_max_levels: Option<String>,
    #[arg(long)]
    quad_initial_panels: Option<String>,
    /// Worker threads, 0 for all cores.
    #[arg(long, env = "POLYMASS_WORKERS")]
    quad_workers: Option<String>,
}

#[derive(Args)]
struct TensorArgs {
    /// Upper-triangle components h_11; h_12; ...; h_nn, separated by `;`.
    #[arg(long)]
    h: String,
}

#[derive(Args)]
struct OutputArgs {
    /// Print the report as JSON.
    #[arg(long)]
    json: bool,
    /// Also write the JSON report to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Common {
    #[command(flatten)]
    metric: MetricArgs,
    #[command(flatten)]
    quad: QuadArgs,
    #[command(flatten)]
    output: OutputArgs,
    /// Print the equivalent study config and exit.
    #[arg(long)]
    dump_config: bool,
}

/// Why the command stopped: bad input (exit 1) or a failed evaluation or
/// check (exit 2).
enum Failure {
    Usage(String),
    Evaluation(String),
}

type Outcome = std::result::Result<(), Failure>;

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn evaluation(e: impl std::fmt::Display) -> Failure {
    Failure::Evaluation(e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Evaluation(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Adm { common, r } => single(common, EvaluatorKind::Adm, &[("scales", r.to_string())]),
        Command::PolyMass {
            common,
            box_l,
            prototype,
            scale,
        } => {
            let settings = match (box_l, prototype, scale) {
                (Some(l), None, None) => vec![("sequence", "boxes".into()), ("scales", l.to_string())],
                (None, Some(p), Some(s)) => {
                    vec![("sequence", "prototype".into()), ("prototype", p), ("scales", s.to_string())]
                }
                _ => return Err(usage("poly-mass needs --box-L, or --prototype with --scale")),
            };
            single(common, EvaluatorKind::PolyMass, &settings)
        }
        Command::SliceMass { common, l } => single(common, EvaluatorKind::SliceMass, &[("scales", l.to_string())]),
        Command::AhMass { common, r, potential } => {
            let mut settings = vec![("scales", r.to_string())];
            if let Some(p) = potential {
                settings.push(("potential", p));
            }
            single(common, EvaluatorKind::AhMass, &settings)
        }
        Command::Prism { common, l, sigma } => {
            let mut settings = vec![("scales", l.to_string())];
            if let Some(s) = sigma {
                settings.push(("sigma", s));
            }
            single(common, EvaluatorKind::Prism, &settings)
        }
        Command::CheckLinearization {
            metric,
            perturbation,
            box_l,
            face,
            weight,
            epsilons,
            slope_min,
            slope_max,
            quad,
            output,
        } => {
            let (spec, params) = metric_spec(&metric)?;
            let g = spec.field(&params).map_err(usage)?;
            let h = tensor(&perturbation, spec.dim, &params)?;
            let plan = quad_plan(&quad)?;
            let cube = Polytope::cube(spec.dim, box_l).map_err(usage)?;
            let f = cube
                .faces
                .get(face)
                .ok_or_else(|| usage(format!("the box has {} faces, got --face {face}", cube.faces.len())))?;
            let eps = match epsilons {
                Some(e) => numbers(&e)?,
                None => DEFAULT_EPSILONS.to_vec(),
            };
            let report = match weight {
                Some(v) => {
                    let v = Expr::parse(&v, spec.dim).map_err(usage)?;
                    check_weighted_linearization(&g, &h, &v, &params, &f.normal, &f.patch, &eps, &plan)
                }
                None => check_linearization(&g, &h, &f.normal, &f.patch, &eps, &plan),
            }
            .map_err(evaluation)?;
            write_json(&output, &report)?;
            if !output.json {
                print::linearization(&report, slope_min, slope_max);
            }
            verdict(report.passes(slope_min, slope_max), "residual slope outside the accepted range")
        }
        Command::CheckAFunctional {
            metric,
            perturbation,
            origin,
            tangents,
            half,
            samples,
            tolerance,
            output,
        } => {
            let (spec, params) = metric_spec(&metric)?;
            let g = spec.field(&params).map_err(usage)?;
            let h = tensor(&perturbation, spec.dim, &params)?;
            let tangents = tangents.iter().map(|t| numbers(t)).collect::<Result<Vec<_>, _>>()?;
            let k = tangents.len();
            let patch = Patch {
                origin: numbers(&origin)?,
                tangents,
                domain: Domain::cube(k, half),
            };
            let samples = if samples.is_empty() {
                vec![vec![0.0; k]]
            } else {
                samples.iter().map(|s| numbers(s)).collect::<Result<Vec<_>, _>>()?
            };
            let report = check_a_functional(&g, &h, &patch, &samples).map_err(|e| match e {
                Error::Metric(_) | Error::Dimension(_) | Error::Invalid(_) => usage(e),
                e => evaluation(e),
            })?;
            write_json(&output, &report)?;
            if !output.json {
                print::a_functional(&report, tolerance);
            }
            let bound = tolerance * (1.0 + report.max_abs_trace);
            verdict(
                report.max_abs_direct <= bound && report.max_abs_umbilic <= bound,
                "the functional does not vanish",
            )
        }
        Command::Audit {
            metric,
            scales,
            sequence,
            prototype,
            quad,
            output,
        } => {
            let mut s = StudySpec::new(MetricRef::Builtin(String::new()), EvaluatorKind::PolyMass);
            apply_metric(&mut s, &metric)?;
            apply_quad(&mut s, &quad)?;
            set(&mut s, "scales", &scales)?;
            set(&mut s, "sequence", &sequence)?;
            if let Some(p) = prototype {
                set(&mut s, "prototype", &p)?;
            }
            s.validate().map_err(usage)?;
            let spec = s.metric_spec().map_err(usage)?;
            let g = spec.field(&s.params).map_err(usage)?;
            let seq = s.sequence_plan(spec.dim).map_err(usage)?.expect("boxes or prototypes");
            let report = positivity_audit(&g, &seq, &s.quad).map_err(evaluation)?;
            write_json(&output, &report)?;
            if !output.json {
                print::audit(&report);
            }
            verdict(report.all_nonnegative(), "negative mass combination beyond quadrature error")
        }
        Command::Study {
            config,
            metric,
            evaluator,
            sequence,
            scales,
            prototype,
            sigma,
            potential,
            angle_bound,
            quad,
            formats,
            json,
            out,
            dump_config,
        } => {
            let mut s = match &config {
                Some(path) => load_study_config(path).map_err(usage)?,
                None => {
                    let evaluator = evaluator
                        .as_deref()
                        .ok_or_else(|| usage("study needs --config or --evaluator"))?;
                    let kind = EvaluatorKind::from_label(evaluator)
                        .ok_or_else(|| usage(format!("unknown evaluator `{evaluator}`")))?;
                    StudySpec::new(MetricRef::Builtin(String::new()), kind)
                }
            };
            if config.is_none() && metric.metric.is_none() && metric.metric_file.is_none() {
                return Err(usage("study needs --config, --metric or --metric-file"));
            }
            apply_metric(&mut s, &metric)?;
            if let Some(e) = &evaluator {
                let old = s.evaluator;
                set(&mut s, "evaluator", e)?;
                if sequence.is_none() && s.evaluator != old {
                    s.sequence = s.evaluator.default_sequence();
                }
            }
            for (key, value) in [
                ("sequence", sequence),
                ("scales", scales),
                ("prototype", prototype),
                ("sigma", sigma),
                ("potential", potential),
                ("angle_bound", angle_bound),
                ("output.formats", formats),
            ] {
                if let Some(v) = value {
                    set(&mut s, key, &v)?;
                }
            }
            apply_quad(&mut s, &quad)?;
            if let Some(o) = &out {
                s.output_dir = Some(o.clone());
            }
            if dump_config {
                print!("{}", s.to_config_string());
                return Ok(());
            }
            let study = run_study(&s).map_err(usage)?;
            if let Some(dir) = &s.output_dir {
                let written = emit_all(&study, dir, &s.formats).map_err(evaluation)?;
                for p in written {
                    eprintln!("wrote {}", p.display());
                }
            }
            if json {
                println!("{}", serde_json::to_string_pretty(&study).expect("studies serialize"));
            } else {
                print::study(&study);
            }
            finished(&study)
        }
        Command::ListMetrics { n } => {
            print::metrics(n, builtin_names());
            Ok(())
        }
    }
}

/// Runs one evaluator as a one-element study.
fn single(common: Common, kind: EvaluatorKind, settings: &[(&str, String)]) -> Outcome {
    let mut s = StudySpec::new(MetricRef::Builtin(String::new()), kind);
    if common.metric.metric.is_none() && common.metric.metric_file.is_none() {
        return Err(usage("--metric or --metric-file is required"));
    }
    apply_metric(&mut s, &common.metric)?;
    apply_quad(&mut s, &common.quad)?;
    for (k, v) in settings {
        set(&mut s, k, v)?;
    }
    if common.dump_config {
        print!("{}", s.to_config_string());
        return Ok(());
    }
    let study = run_study(&s).map_err(usage)?;
    for w in &study.warnings {
        eprintln!("warning: {w}");
    }
    if let Some(f) = &study.failure {
        return Err(evaluation(f));
    }
    let report = &study.reports[0];
    write_json(&common.output, report)?;
    if !common.output.json {
        print::report(report);
    }
    Ok(())
}

fn finished(study: &Study) -> Outcome {
    for w in &study.warnings {
        eprintln!("warning: {w}");
    }
    match &study.failure {
        Some(f) => Err(evaluation(f)),
        None => Ok(()),
    }
}

fn verdict(ok: bool, message: &str) -> Outcome {
    if ok {
        Ok(())
    } else {
        Err(evaluation(message))
    }
}

fn set(s: &mut StudySpec, key: &str, value: &str) -> Outcome {
    apply_setting(s, key, value).map_err(|e| usage(format!("--{}: {e}", key.replace(['.', '_'], "-"))))
}

fn apply_metric(s: &mut StudySpec, m: &MetricArgs) -> Outcome {
    if let Some(name) = &m.metric {
        set(s, "metric", name)?;
    }
    if let Some(path) = &m.metric_file {
        set(s, "metric_file", &path.display().to_string())?;
    }
    if let Some(n) = m.n {
        set(s, "n", &n.to_string())?;
    }
    for p in &m.params {
        let (name, value) = p
            .split_once('=')
            .ok_or_else(|| usage(format!("--param expects NAME=VALUE, got `{p}`")))?;
        set(s, &format!("param {}", name.trim()), value.trim())?;
    }
    Ok(())
}

fn apply_quad(s: &mut StudySpec, q: &QuadArgs) -> Outcome {
    for (key, value) in [
        ("quad.order", &q.quad_order),
        ("quad.rtol", &q.quad_rtol),
        ("quad.atol", &q.quad_atol),
        ("quad.max_levels", &q.quad_max_levels),
        ("quad.initial_panels", &q.quad_initial_panels),
        ("quad.workers", &q.quad_workers),
    ] {
        if let Some(v) = value {
            set(s, key, v)?;
        }
    }
    Ok(())
}

fn quad_plan(q: &QuadArgs) -> Result<QuadPlan, Failure> {
    let mut s = StudySpec::new(MetricRef::Builtin(String::new()), EvaluatorKind::PolyMass);
    apply_quad(&mut s, q)?;
    s.quad.validate().map_err(usage)?;
    Ok(s.quad)
}

/// The metric definition and its resolved parameters.
fn metric_spec(m: &MetricArgs) -> Result<(MetricSpec, Params), Failure> {
    let mut s = StudySpec::new(MetricRef::Builtin(String::new()), EvaluatorKind::PolyMass);
    if m.metric.is_none() && m.metric_file.is_none() {
        return Err(usage("--metric or --metric-file is required"));
    }
    apply_metric(&mut s, m)?;
    let spec = s.metric_spec().map_err(usage)?;
    let params = spec.resolve_params(&s.params).map_err(usage)?;
    Ok((spec, params))
}

fn tensor(t: &TensorArgs, n: usize, params: &Params) -> Result<TensorField, Failure> {
    let parts: Vec<&str> = t.h.split(';').map(str::trim).collect();
    if parts.len() != n * (n + 1) / 2 {
        return Err(usage(format!("--h needs {} components for n = {n}, got {}", n * (n + 1) / 2, parts.len())));
    }
    let exprs = parts
        .iter()
        .map(|p| Expr::parse(p, n))
        .collect::<polymass::error::Result<Vec<_>>>()
        .map_err(usage)?;
    TensorField::from_exprs(n, exprs, params).map_err(usage)
}

fn numbers(text: &str) -> Result<Vec<f64>, Failure> {
    text.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| usage(format!("invalid number `{}`", t.trim()))))
        .collect()
}

fn write_json<T: serde::Serialize>(output: &OutputArgs, value: &T) -> Outcome {
    let text = serde_json::to_string_pretty(value).expect("reports serialize");
    if output.json {
        println!("{text}");
    }
    if let Some(path) = &output.out {
        write_file(path, &(text + "\n"))?;
    }
    Ok(())
}

fn write_file(path: &Path, text: &str) -> Outcome {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| evaluation(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, text).map_err(|e| evaluation(format!("{}: {e}", path.display())))
}
