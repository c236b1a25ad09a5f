use polymass::expr::Params;
use polymass::metrics::{
    builtin, builtin_names, conformal, load_metric_file, parse_metric_file, perturbed_flat, Asymptotic,
};
use polymass::Error;

fn none() -> Params {
    Params::new()
}

fn with(k: &str, v: f64) -> Params {
    [(k.to_string(), v)].into_iter().collect()
}

#[test]
fn isotropic_schwarzschild_component() {
    let g = builtin("schwarzschild-isotropic", 3, &with("m", 1.0)).unwrap().field(&none()).unwrap();
    let m = g.at(&[10.0, 0.0, 0.0]).unwrap();
    // (1 + 1/20)^4
    assert!((m.g[0][0] - 1.21550625).abs() < 1e-14);
    assert_eq!(m.g[0][1], 0.0);
}

#[test]
fn euclidean_is_the_identity() {
    let g = builtin("euclidean", 4, &none()).unwrap().field(&none()).unwrap();
    let m = g.at(&[0.1, 2.0, -3.0, 4.0]).unwrap();
    for i in 0..4 {
        for j in 0..4 {
            assert_eq!(m.g[i][j], if i == j { 1.0 } else { 0.0 });
            assert!(m.dg.iter().all(|d| d.iter().flatten().all(|v| *v == 0.0)));
        }
    }
}

#[test]
fn every_builtin_compiles_and_evaluates() {
    for n in 3..=5 {
        for name in builtin_names() {
            let spec = builtin(name, n, &none()).unwrap();
            let g = spec.field(&none()).unwrap();
            let mut x = vec![0.3; n];
            x[0] = 5.0;
            g.at(&x).unwrap_or_else(|e| panic!("{name} n={n}: {e}"));
        }
    }
}

#[test]
fn ads_with_zero_mass_is_hyperbolic_space() {
    let ads = builtin("ads-schwarzschild-hyperboloid", 3, &with("m", 0.0)).unwrap().field(&none()).unwrap();
    let hyp = builtin("hyperbolic-hyperboloid", 3, &none()).unwrap().field(&none()).unwrap();
    let x = [1.5, -0.7, 2.2];
    let (a, b) = (ads.at(&x).unwrap(), hyp.at(&x).unwrap());
    for i in 0..3 {
        for j in 0..3 {
            assert!((a.g[i][j] - b.g[i][j]).abs() < 1e-15);
        }
    }
    for v in ads.perturbation_at(&x).unwrap() {
        assert_eq!(v.value(), 0.0);
    }
}

#[test]
fn ads_perturbation_matches_full_metric() {
    let spec = builtin("ads-schwarzschild-hyperboloid", 3, &none()).unwrap();
    let g = spec.field(&none()).unwrap();
    let x = [2.0, 1.0, -0.5];
    let r2: f64 = x.iter().map(|v| v * v).sum();
    let r = r2.sqrt();
    // radial component of g is 1/(1 + r^2 - 2m/r)
    let m = g.at(&x).unwrap();
    let u: Vec<f64> = x.iter().map(|v| v / r).collect();
    let grr = m.inner(&u, &u);
    assert!((grr - 1.0 / (1.0 + r2 - 2.0 / r)).abs() < 1e-14);
}

#[test]
fn ads_perturbation_has_no_cancellation_far_out() {
    let g = builtin("ads-schwarzschild-hyperboloid", 3, &none()).unwrap().field(&none()).unwrap();
    let r = 1e5;
    let h = g.perturbation_at(&[r, 0.0, 0.0]).unwrap();
    // h_11 = 2m / (r (1 + r^2)(1 + r^2 - 2m/r))
    let want = 2.0 / (r * (1.0 + r * r) * (1.0 + r * r - 2.0 / r));
    assert!((h[0].value() / want - 1.0).abs() < 1e-12);
}

#[test]
fn uhs_metric_agrees_with_hyperboloid_through_the_isometry() {
    let hyp = builtin("ads-schwarzschild-hyperboloid", 3, &none()).unwrap();
    let uhs = hyp.to_upper_half_space().unwrap();
    assert_eq!(uhs.name, "ads-schwarzschild-uhs");
    assert_eq!(uhs.asymptotic, Asymptotic::UpperHalfSpace);
    let gy = uhs.field(&none()).unwrap();
    let gz = hyp.field(&none()).unwrap();
    let y = [0.2, 0.7, -0.4];
    let yy: f64 = y.iter().map(|v| v * v).sum();
    let z = [(yy - 1.0) / (2.0 * y[0]), y[1] / y[0], y[2] / y[0]];
    // scalar curvature is a pointwise invariant
    let (ry, rz) = (gy.scalar_curvature(&y).unwrap(), gz.scalar_curvature(&z).unwrap());
    assert!((ry - rz).abs() < 1e-6 * rz.abs().max(1.0), "{ry} vs {rz}");
}

#[test]
fn parameter_overrides() {
    let s = builtin("schwarzschild-isotropic", 3, &with("m", 3.0)).unwrap();
    assert_eq!(s.params, vec![("m".to_string(), 3.0)]);
    assert!(matches!(
        builtin("schwarzschild-isotropic", 3, &with("q", 1.0)),
        Err(Error::Invalid(_))
    ));
    assert!(matches!(builtin("no-such-metric", 3, &none()), Err(Error::Invalid(_))));
}

#[test]
fn singular_regions_are_reported() {
    let s = builtin("schwarzschild-areal-rect", 3, &none()).unwrap();
    assert!((s.inner_radius(&with("m", 1.0)) - 2.0).abs() < 1e-12);
    assert!(matches!(s.check_region(&with("m", 1.0), 1.5), Err(Error::ParameterDomain(_))));
    s.check_region(&with("m", 1.0), 3.0).unwrap();
    let iso = builtin("schwarzschild-isotropic", 3, &with("m", -1.0)).unwrap();
    assert!(matches!(iso.check_region(&with("m", -1.0), 0.4), Err(Error::ParameterDomain(_))));
    let ads = builtin("ads-schwarzschild-hyperboloid", 3, &none()).unwrap();
    let r0 = ads.inner_radius(&with("m", 1.0));
    assert!((1.0 + r0 * r0 - 2.0 / r0).abs() < 1e-9);
}

#[test]
fn conformal_and_perturbed_constructors() {
    let c = conformal(3, "1 + a/r", vec![("a".into(), 2.0)]).unwrap();
    let g = c.field(&none()).unwrap();
    let m = g.at(&[4.0, 0.0, 0.0]).unwrap();
    assert!((m.g[1][1] - 1.5f64.powi(4)).abs() < 1e-14);

    let s: Vec<String> = ["1", "0", "0", "1", "0", "1"].iter().map(|s| s.to_string()).collect();
    let p = perturbed_flat(3, &s, &with("eps", 0.5)).unwrap();
    let g = p.field(&none()).unwrap();
    let m = g.at(&[2.0, 0.0, 0.0]).unwrap();
    assert!((m.g[2][2] - 1.25).abs() < 1e-14);
    // p must exceed (n-2)/2
    let bad = builtin("perturbed-flat", 3, &with("p", 0.4)).unwrap();
    let err = bad.field(&none()).unwrap_err();
    assert!(err.to_string().contains("p > (n-2)/2"), "{err}");
}

#[test]
fn metric_file_round_trip() {
    let text = "# test\ndim = 3\ntype = AF\ndecay = 1\nparam m = 1\n\
        g[1][1] = (1 + m/(2*r))^4\ng[1][2] = 0\ng[1][3] = 0\n\
        g[2][2] = (1 + m/(2*r))^4\ng[2][3] = 0\ng[3][3] = (1 + m/(2*r))^4\n";
    let spec = parse_metric_file(text, "test.metric", "test").unwrap();
    assert_eq!(spec.params, vec![("m".to_string(), 1.0)]);
    let again = parse_metric_file(&spec.to_file_string(), "x", "test").unwrap();
    assert_eq!(spec, again);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("iso.metric");
    std::fs::write(&path, text).unwrap();
    let loaded = load_metric_file(&path).unwrap();
    assert_eq!(loaded.name, "iso");
    let g = loaded.field(&none()).unwrap();
    assert!((g.at(&[10.0, 0.0, 0.0]).unwrap().g[0][0] - 1.21550625).abs() < 1e-14);

    for name in builtin_names() {
        let s = builtin(name, 3, &none()).unwrap();
        let back = parse_metric_file(&s.to_file_string(), "b", &s.name).unwrap();
        assert_eq!(back.sources, s.sources, "{name}");
        assert_eq!(back.params, s.params, "{name}");
    }
}

#[test]
fn metric_file_errors() {
    let head = "dim = 3\ntype = AF\n";
    let comps = "g[1][1] = 1\ng[1][2] = 0\ng[1][3] = 0\ng[2][2] = 1\ng[2][3] = 0\ng[3][3] = 1\n";

    let err = parse_metric_file(&format!("{head}decay = 0.4\n{comps}"), "f", "f").unwrap_err();
    assert!(err.to_string().contains("decay rate violates p > (n-2)/2"), "{err}");
    assert!(matches!(err, Error::File { line: 3, .. }));

    let missing = comps.replace("g[2][3] = 0\n", "");
    let err = parse_metric_file(&format!("{head}decay = 1\n{missing}"), "f", "f").unwrap_err();
    assert!(err.to_string().contains("missing components g[2][3]"), "{err}");

    let err = parse_metric_file(&format!("{head}decay = 1\n{comps}g[2][1] = 0\n"), "f", "f").unwrap_err();
    assert!(err.to_string().contains("asymmetric"), "{err}");

    let bad = comps.replace("g[2][2] = 1", "g[2][2] = 1 + foo");
    let err = parse_metric_file(&format!("{head}decay = 1\n{bad}"), "f", "f").unwrap_err();
    match err {
        Error::File { line, column, .. } => {
            assert_eq!(line, 7);
            assert_eq!(column, 15);
        }
        other => panic!("{other}"),
    }

    let err = parse_metric_file("dim = 3\ntype = AH-hyperboloid\ndecay = 1.2\n", "f", "f").unwrap_err();
    assert!(err.to_string().contains("q > n/2"), "{err}");
}

/// Slope of `log |h|` against `log r` along a ray, between `r = 1e3` and `1e4`.
fn decay_slope(spec_name: &str, n: usize, dir: &[f64], hyperbolic: bool) -> f64 {
    let g = builtin(spec_name, n, &none()).unwrap().field(&none()).unwrap();
    let size = |r: f64| {
        let x: Vec<f64> = dir.iter().map(|d| d * r).collect();
        let h = g.perturbation_at(&x).unwrap();
        let bg = g.background_at(&x).unwrap();
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let (a, b) = if hyperbolic { (bg.ginv[i][k], bg.ginv[j][l]) } else {
                            (if i == k { 1.0 } else { 0.0 }, if j == l { 1.0 } else { 0.0 })
                        };
                        s += a * b * h[i * n + j].value() * h[k * n + l].value();
                    }
                }
            }
        }
        s.sqrt()
    };
    (size(1e4).ln() - size(1e3).ln()) / 10f64.ln()
}

#[test]
fn perturbations_decay_at_the_declared_rate() {
    let dir = [0.6, 0.0, 0.8];
    for name in ["schwarzschild-isotropic", "schwarzschild-areal-rect", "perturbed-flat"] {
        let s = decay_slope(name, 3, &dir, false);
        assert!((s + 1.0).abs() < 2e-3, "{name}: slope {s}");
    }
    let s = decay_slope("ads-schwarzschild-hyperboloid", 3, &dir, true);
    assert!((s + 3.0).abs() < 2e-3, "ads slope {s}");
    let s = decay_slope("ads-schwarzschild-hyperboloid", 4, &[0.5, 0.5, 0.5, 0.5], true);
    assert!((s + 4.0).abs() < 2e-3, "ads n=4 slope {s}");
}
