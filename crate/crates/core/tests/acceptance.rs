#![allow(clippy::needless_range_loop)]

//! Acceptance suite. Each test prints one `criterion NN PASS|FAIL` line and
//! then asserts it; run with `--nocapture` to see the lines.

use polymass::evaluators::{
    adm_mass, ah_mass, ah_mass_vector, check_linearization, check_weighted_linearization, poly_mass,
    positivity_audit, slice_mass_3d, slice_mass_nd, slice_value_nd, StaticPotential, DEFAULT_EPSILONS,
};
use polymass::expr::{Expr, Params};
use polymass::geometry::{dihedral_angle, MetricField, TensorField};
use polymass::harness::{run_study, study_csv, study_json, EvaluatorKind, MetricRef, SequenceKind, Study, StudySpec};
use polymass::metrics::builtin;
use polymass::polytope::{prototype, Patch, Polytope, SequencePlan};
use polymass::quadrature::{Domain, QuadPlan};
use rand::{Rng, SeedableRng};

fn verdict(id: u32, name: &str, pass: bool, detail: String) {
    println!("criterion {id:02} {} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {id} ({name}) failed: {detail}");
}

fn params(pairs: &[(&str, f64)]) -> Params {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn field(name: &str, n: usize, p: &[(&str, f64)]) -> MetricField {
    builtin(name, n, &params(p)).unwrap().field(&Params::new()).unwrap()
}

fn study(metric: &str, n: usize, m: Option<f64>, evaluator: EvaluatorKind, scales: Vec<f64>) -> StudySpec {
    let mut s = StudySpec::new(MetricRef::Builtin(metric.into()), evaluator);
    s.n = Some(n);
    if let Some(m) = m {
        s.params.insert("m".into(), m);
    }
    s.scales = scales;
    s
}

fn dyadic(base: f64, count: i32) -> Vec<f64> {
    (0..count).map(|j| base * 2f64.powi(j)).collect()
}

#[test]
fn criterion_01_adm_baseline() {
    let g = field("schwarzschild-isotropic", 3, &[("m", 1.0)]);
    let plan = QuadPlan::default();
    let mut ok = true;
    let mut detail = Vec::new();
    for (r, tol) in [(1e3, 1e-3), (1e4, 1e-4)] {
        let total = adm_mass(&g, r, &plan).unwrap().total;
        // the sphere flux of psi^4 delta is exactly m psi(r)^3
        let oracle = (1.0 + 0.5 / r).powi(3);
        let rel = (total - 1.0).abs();
        ok &= rel <= tol;
        detail.push(format!(
            "r={r}: {total:.9} (|rel err| {rel:.2e} vs {tol:.0e}; closed-form flux {oracle:.9})"
        ));
    }
    verdict(1, "ADM flux of isotropic Schwarzschild", ok, detail.join("; "));
}

#[test]
fn criterion_02_cube_formula() {
    let s = run_study(&study("schwarzschild-isotropic", 3, Some(1.0), EvaluatorKind::PolyMass, dyadic(16.0, 4))).unwrap();
    let e = s.extrapolation.as_ref().unwrap();
    let max_edge = s.reports.iter().map(|r| r.terms.edge.unwrap().abs()).fold(0.0, f64::max);
    let ok = s.is_complete() && (0.99..=1.01).contains(&e.limit) && max_edge < 1e-8;
    verdict(
        2,
        "box mass of isotropic Schwarzschild",
        ok,
        format!("limit {:.6} +/- {:.1e}, max |edge| {max_edge:.1e}", e.limit, e.uncertainty),
    );
}

#[test]
fn criterion_03_coordinate_dependence() {
    let s = run_study(&study("schwarzschild-areal-rect", 3, Some(1.0), EvaluatorKind::PolyMass, dyadic(16.0, 4))).unwrap();
    let e = s.extrapolation.as_ref().unwrap();
    let f = s.face_only.as_ref().unwrap();
    let edge_128 = s.reports[3].terms.edge.unwrap();
    let ok = s.is_complete()
        && (0.98..=1.02).contains(&e.limit)
        && edge_128.abs() > 1e-4
        && (f.limit - 1.0).abs() > 3.0 * f.uncertainty.max(e.uncertainty);
    verdict(
        3,
        "areal Schwarzschild needs the angle deficit",
        ok,
        format!(
            "limit {:.6} +/- {:.1e}, edge at L=128 {edge_128:.3e}, face-only limit {:.4} +/- {:.1e}",
            e.limit, e.uncertainty, f.limit, f.uncertainty
        ),
    );
}

#[test]
fn criterion_04_slicing_3d() {
    let g = field("schwarzschild-isotropic", 3, &[("m", 1.0)]);
    let total = slice_mass_3d(&g, 128.0, &QuadPlan::default()).unwrap().total;
    verdict(
        4,
        "3-d slicing of isotropic Schwarzschild",
        (total - 1.0).abs() <= 0.03,
        format!("L=128: {total:.6}"),
    );
}

#[test]
fn criterion_05_slicing_4d() {
    let g = field("schwarzschild-isotropic", 4, &[("m", 1.0)]);
    let plan = QuadPlan {
        workers: 0,
        ..QuadPlan::default()
    };
    let sliced = slice_mass_nd(&g, 64.0, &plan).unwrap();
    let adm = adm_mass(&g, 1e3, &plan).unwrap().total;
    let mut ok = (sliced.total - adm).abs() <= 0.05 * adm.abs();
    // each slice value against poly_mass on the induced metric built from expressions
    let mut worst: f64 = 0.0;
    for k in 0..4 {
        let a = slice_value_nd(&g, k, 0.0, 64.0, &plan).unwrap();
        let induced = g.induced_on_hyperplane(k, 0.0).unwrap();
        let b = poly_mass(&induced, &Polytope::cube(3, 64.0).unwrap(), &plan).unwrap();
        let tol = a.errors.total + b.errors.total + 1e-10 * b.total.abs();
        worst = worst.max((a.total - b.total).abs() / tol);
        ok &= (a.total - b.total).abs() <= tol;
    }
    verdict(
        5,
        "4-d slicing of isotropic Schwarzschild",
        ok,
        format!(
            "L=64: {:.6}, adm(r=1000) {adm:.6}, worst per-slice mismatch {worst:.2} of tolerance",
            sliced.total
        ),
    );
}

#[test]
fn criterion_06_general_polyhedra() {
    let proto = prototype("triangular-prism").unwrap();
    let min_sin = proto.min_sin_angle();
    let mut spec = study("schwarzschild-isotropic", 3, Some(1.0), EvaluatorKind::PolyMass, dyadic(32.0, 4));
    spec.sequence = SequenceKind::Prototype;
    spec.prototype = Some("triangular-prism".into());
    let s = run_study(&spec).unwrap();
    let e = s.extrapolation.as_ref().unwrap();
    let ok = s.is_complete() && (0.98..=1.02).contains(&e.limit) && (min_sin - 0.75f64.sqrt()).abs() < 1e-12;
    verdict(
        6,
        "scaled triangular prism",
        ok,
        format!("limit {:.6} +/- {:.1e}, min |sin angle| {min_sin:.6}", e.limit, e.uncertainty),
    );
}

/// A random quadratic tensor, small enough that `g + 0.1 h` stays definite.
fn random_tensor(rng: &mut impl Rng) -> TensorField {
    let mut exprs = Vec::new();
    for _ in 0..6 {
        let mut terms = vec![format!("{:.4}", rng.gen_range(-1.0..1.0))];
        for i in 1..=3 {
            terms.push(format!("{:.4}*x{i}", rng.gen_range(-0.3..0.3)));
            terms.push(format!("{:.4}*x{i}^2", rng.gen_range(-0.05..0.05)));
        }
        exprs.push(Expr::parse(&terms.join(" + "), 3).unwrap());
    }
    TensorField::from_exprs(3, exprs, &Params::new()).unwrap()
}

fn unit(rng: &mut impl Rng) -> [f64; 3] {
    loop {
        let v: [f64; 3] = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if (0.1..=1.0).contains(&n) {
            return v.map(|x| x / n);
        }
    }
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// A random planar square of half-width 0.5 at distance 3 from the origin,
/// with its unit normal.
fn random_plane(rng: &mut impl Rng) -> (Patch, Vec<f64>) {
    let normal = unit(rng);
    let t1 = loop {
        let t = cross(normal, unit(rng));
        let l = (t[0] * t[0] + t[1] * t[1] + t[2] * t[2]).sqrt();
        if l > 0.1 {
            break t.map(|x| x / l);
        }
    };
    let t2 = cross(normal, t1);
    let origin = unit(rng).map(|x| 3.0 * x);
    let patch = Patch {
        origin: origin.to_vec(),
        tangents: vec![t1.to_vec(), t2.to_vec()],
        domain: Domain::cube(2, 0.5),
    };
    (patch, normal.to_vec())
}

#[test]
fn criterion_07_linearization() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(2024);
    let plan = QuadPlan::default();
    let backgrounds = [MetricField::euclidean(3), field("schwarzschild-isotropic", 3, &[("m", 1.0)])];
    let v = Expr::parse("1 + 0.1*x1^2 - 0.05*x2", 3).unwrap();
    let mut ok = true;
    let mut slopes = Vec::new();
    for i in 0..5 {
        let bg = &backgrounds[i % 2];
        let h = random_tensor(&mut rng);
        let (patch, normal) = random_plane(&mut rng);
        let plain = check_linearization(bg, &h, &normal, &patch, &DEFAULT_EPSILONS, &plan).unwrap();
        let weighted =
            check_weighted_linearization(bg, &h, &v, &Params::new(), &normal, &patch, &DEFAULT_EPSILONS, &plan).unwrap();
        ok &= plain.passes(1.8, 2.2) && weighted.passes(1.8, 2.2) && !plain.exact && !weighted.exact;
        slopes.push(format!(
            "{:.3}/{:.3}",
            plain.slope.unwrap_or(f64::NAN),
            weighted.slope.unwrap_or(f64::NAN)
        ));
    }
    verdict(
        7,
        "second-order linearization residuals",
        ok,
        format!("slopes (plain/weighted) {}", slopes.join(", ")),
    );
}

#[test]
fn criterion_08_ah_functional() {
    let plan = QuadPlan::default();
    let flat = field("hyperbolic-hyperboloid", 3, &[]);
    let zero = ah_mass_vector(&flat, 50.0, &plan).unwrap();
    let max_zero = zero.p.iter().map(|p| p.abs()).fold(0.0, f64::max);

    let g = field("ads-schwarzschild-hyperboloid", 3, &[("m", 1.0)]);
    let near = ah_mass_vector(&g, 1e2, &plan).unwrap();
    let far = ah_mass_vector(&g, 1e3, &plan).unwrap();
    let max_pi = far.p[1..].iter().chain(&near.p[1..]).map(|p| p.abs()).fold(0.0, f64::max);
    let cauchy = (near.p[0] - far.p[0]).abs() / far.p[0].abs();

    let c = [0.7, -1.3, 0.4, 2.1];
    let combined = ah_mass(&g, &StaticPotential::new(c.to_vec()), 1e2, &plan).unwrap();
    let expected: f64 =
        c.iter().zip(&near.p).map(|(a, p)| a * p).sum::<f64>() / ah_mass(&g, &StaticPotential::basis(3, 0), 1e2, &plan).unwrap().normalization;
    let linear = (combined.total - expected).abs() / expected.abs().max(1.0);

    let ok = max_zero < 1e-10 && max_pi < 1e-6 && cauchy < 0.01 && linear < 1e-8;
    verdict(
        8,
        "hyperbolic mass functional",
        ok,
        format!(
            "h=0 max {max_zero:.1e}, max |p_i| {max_pi:.1e}, p0 {:.6} -> {:.6} (rel {cauchy:.1e}), linearity {linear:.1e}",
            near.p[0], far.p[0]
        ),
    );
}

#[test]
fn criterion_09_ah_prism() {
    let plan = QuadPlan::default();
    let g = field("ads-schwarzschild-hyperboloid", 3, &[("m", 1.0)]);
    let v = ah_mass_vector(&g, 1e3, &plan).unwrap();
    let target = v.p[0] - v.p[1];

    let s = run_study(&study("ads-schwarzschild-hyperboloid", 3, Some(1.0), EvaluatorKind::Prism, vec![2.0, 3.0, 4.0])).unwrap();
    let e = s.extrapolation.as_ref().unwrap();
    let edge_slope = s.decay_slopes.get("edge").copied().unwrap_or(f64::NAN);
    let side_slope = s.decay_slopes.get("face_non_bottom").copied().unwrap_or(f64::NAN);
    let last = s.reports.last().unwrap();
    let bottom = last.terms.extra["bottom_only"];
    let bottom_rel = (bottom - last.total).abs() / last.total.abs();
    let limit_rel = (e.limit - target).abs() / target.abs();
    let ok = s.is_complete() && limit_rel <= 0.02 && edge_slope < 0.0 && side_slope < 0.0 && bottom_rel <= 0.02;
    verdict(
        9,
        "upper half space prisms",
        ok,
        format!(
            "limit {:.5} vs p0 - p1 {target:.5} (rel {limit_rel:.1e}), slopes edge {edge_slope:.2} side {side_slope:.2}, bottom-only rel {bottom_rel:.1e}",
            e.limit
        ),
    );
}

#[test]
fn criterion_10_positivity_audit() {
    let plan = QuadPlan::default();
    let seq = SequencePlan::boxes(3, 16.0, 4);
    let pos = positivity_audit(&field("schwarzschild-isotropic", 3, &[("m", 1.0)]), &seq, &plan).unwrap();
    let neg = positivity_audit(&field("schwarzschild-isotropic", 3, &[("m", -1.0)]), &seq, &plan).unwrap();
    let ok = pos.all_nonnegative() && neg.flagged == seq.scales && neg.elements.iter().all(|e| e.combination < 0.0);
    let min_pos = pos.elements.iter().map(|e| e.combination).fold(f64::INFINITY, f64::min);
    verdict(
        10,
        "sign of the box combination",
        ok,
        format!("m=1 min combination {min_pos:.4}, m=-1 flagged {:?}", neg.flagged),
    );
}

fn outputs(spec: &StudySpec, workers: usize) -> (String, String) {
    let mut s = spec.clone();
    s.quad.workers = workers;
    let study: Study = run_study(&s).unwrap();
    (study_csv(&study).unwrap(), study_json(&study))
}

#[test]
fn criterion_11_determinism() {
    let mut boxes = study("schwarzschild-areal-rect", 3, Some(1.0), EvaluatorKind::PolyMass, dyadic(8.0, 3));
    boxes.quad.rtol = 1e-11;
    let spheres = study("ads-schwarzschild-hyperboloid", 3, Some(1.0), EvaluatorKind::AhMass, vec![10.0, 20.0, 40.0]);
    let slices = study("schwarzschild-isotropic", 3, Some(1.0), EvaluatorKind::SliceMass, vec![8.0, 16.0, 32.0]);
    let mut ok = true;
    for spec in [&boxes, &spheres, &slices] {
        let reference = outputs(spec, 1);
        for w in [4, 8] {
            ok &= outputs(spec, w) == reference;
        }
    }
    verdict(11, "byte-identical output across 1, 4 and 8 workers", ok, "boxes, spheres and slices".into());
}

#[test]
fn criterion_12_engine_properties() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(12);

    // conformal factors leave dihedral angles unchanged
    let mut angle_err: f64 = 0.0;
    for _ in 0..50 {
        let (a, b) = (rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
        let phi = format!("exp(2*({a}*sin(x1) + {b}*x2*x3))");
        let exprs = (0..3)
            .flat_map(|i| (i..3).map(move |j| (i, j)))
            .map(|(i, j)| Expr::parse(if i == j { &phi } else { "0" }, 3).unwrap())
            .collect();
        let g = MetricField::plain(TensorField::from_exprs(3, exprs, &Params::new()).unwrap());
        let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let (n1, n2) = (unit(&mut rng), unit(&mut rng));
        let m = g.at(&x).unwrap();
        let e = MetricField::euclidean(3).at(&x).unwrap();
        let d = dihedral_angle(&m, &n1, &n2, false).unwrap() - dihedral_angle(&e, &n1, &n2, false).unwrap();
        angle_err = angle_err.max(d.abs());
    }

    // hyperbolic space has R = -n(n - 1)
    let mut curvature_err: f64 = 0.0;
    for n in [3usize, 4, 5] {
        let g = field("hyperbolic-hyperboloid", n, &[]);
        for _ in 0..20 {
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let r = g.scalar_curvature(&x).unwrap();
            curvature_err = curvature_err.max((r + (n * (n - 1)) as f64).abs());
        }
    }

    // Christoffel symbols against central differences of the metric
    let mut christoffel_err: f64 = 0.0;
    for g in [field("schwarzschild-isotropic", 3, &[("m", 1.0)]), field("ads-schwarzschild-hyperboloid", 3, &[("m", 1.0)])] {
        for _ in 0..5 {
            let x: Vec<f64> = unit(&mut rng).iter().map(|v| v * rng.gen_range(2.0..4.0)).collect();
            let m = g.at(&x).unwrap();
            let step = 1e-5;
            let dg: Vec<Vec<Vec<f64>>> = (0..3)
                .map(|k| {
                    let (mut xp, mut xm) = (x.clone(), x.clone());
                    xp[k] += step;
                    xm[k] -= step;
                    let (gp, gm) = (g.at(&xp).unwrap().g, g.at(&xm).unwrap().g);
                    (0..3).map(|i| (0..3).map(|j| (gp[i][j] - gm[i][j]) / (2.0 * step)).collect()).collect()
                })
                .collect();
            for i in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        let fd: f64 = (0..3)
                            .map(|q| 0.5 * m.ginv[i][q] * (dg[k][q][l] + dg[l][q][k] - dg[q][k][l]))
                            .sum();
                        christoffel_err = christoffel_err.max((m.gamma[i][k][l] - fd).abs());
                    }
                }
            }
        }
    }

    let ok = angle_err <= 1e-12 && curvature_err <= 1e-7 && christoffel_err <= 1e-8;
    verdict(
        12,
        "engine properties",
        ok,
        format!("dihedral {angle_err:.1e}, hyperbolic R {curvature_err:.1e}, Christoffel vs FD {christoffel_err:.1e}"),
    );
}
