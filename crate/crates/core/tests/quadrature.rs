use std::f64::consts::PI;

use polymass::expr::{Expr, Params};
use polymass::geometry::{volume_element, MetricField, TensorField};
use polymass::polytope::Polytope;
use polymass::quadrature::{integrate, integrate_sphere, Domain, QuadPlan};
use proptest::prelude::*;

fn plan() -> QuadPlan {
    QuadPlan::default()
}

#[test]
fn unit_integrand_over_a_box_face() {
    let l = 3.0;
    let cube = Polytope::cube(3, l).unwrap();
    let f = &cube.faces[0];
    let r = integrate(&f.patch.domain, 1, &plan(), |_, out| {
        out[0] = 1.0;
        Ok(())
    })
    .unwrap();
    assert!((r.value[0] - 4.0 * l * l).abs() < 1e-12);
    assert!(r.converged);
}

#[test]
fn conformal_face_area_matches_trapezoid_oracle() {
    // e^{2 phi} delta, area element on the face x1 = 1 of box(3, 1) is e^{2 phi}
    let phi = "0.3*sin(x2) + 0.2*x3^2 + 0.1*x1*x2";
    let mut exprs = Vec::new();
    for i in 0..3 {
        for j in i..3 {
            let src = if i == j { format!("exp(2*({phi}))") } else { "0".into() };
            exprs.push(Expr::parse(&src, 3).unwrap());
        }
    }
    let g = MetricField::plain(TensorField::from_exprs(3, exprs, &Params::new()).unwrap());
    let cube = Polytope::cube(3, 1.0).unwrap();
    let face = &cube.faces[1];
    assert_eq!(face.normal, vec![1.0, 0.0, 0.0]);
    let r = integrate(&face.patch.domain, 1, &plan(), |u, out| {
        let x = face.patch.point(u);
        out[0] = volume_element(&g.at(&x).unwrap(), &face.patch.tangents)?;
        Ok(())
    })
    .unwrap();
    // composite trapezoid with Richardson on a fine grid
    let trap = |m: usize| {
        let h = 2.0 / m as f64;
        let mut s = 0.0;
        for a in 0..=m {
            for b in 0..=m {
                let (y, z) = (-1.0 + a as f64 * h, -1.0 + b as f64 * h);
                let w = if a == 0 || a == m { 0.5 } else { 1.0 } * if b == 0 || b == m { 0.5 } else { 1.0 };
                let p = 0.3 * y.sin() + 0.2 * z * z + 0.1 * y;
                s += w * (2.0 * p).exp();
            }
        }
        s * h * h
    };
    let oracle = (4.0 * trap(800) - trap(400)) / 3.0;
    assert!((r.value[0] - oracle).abs() < 1e-8, "{} vs {oracle}", r.value[0]);
}

#[test]
fn polynomial_over_an_edge_is_exact() {
    let cube = Polytope::cube(3, 1.0).unwrap();
    // edges of box(3,1) along x1 are the ones whose free axis is 0
    let e = cube.edges.iter().find(|e| e.patch.tangents[0][0] == 1.0).unwrap();
    for order in 2..=8 {
        let p = QuadPlan { order, max_levels: 1, ..plan() };
        let r = integrate(&e.patch.domain, 1, &p, |u, out| {
            out[0] = e.patch.point(u)[0].powi(2);
            Ok(())
        })
        .unwrap();
        assert!((r.value[0] - 2.0 / 3.0).abs() < 1e-15, "order {order}");
    }
}

#[test]
fn sphere_area_and_moments() {
    for r in [1.0, 10.0, 1e3] {
        let res = integrate_sphere(3, r, 3, &plan(), |x, nu, out| {
            out[0] = 1.0;
            out[1] = nu[0];
            out[2] = x[0] * x[0] / (r * r);
            Ok(())
        })
        .unwrap();
        let area = 4.0 * PI * r * r;
        assert!((res.value[0] / area - 1.0).abs() < 1e-10);
        assert!(res.value[1].abs() < 1e-10 * area);
        assert!((res.value[2] / (area / 3.0) - 1.0).abs() < 1e-10);
    }
    for n in 2..=6 {
        // global refinement in n - 1 chart dimensions: keep high n cheap
        let p = if n <= 4 { plan() } else { QuadPlan { order: 12, max_levels: 0, ..plan() } };
        let res = integrate_sphere(n, 1.0, 1, &p, |_, _, out| {
            out[0] = 1.0;
            Ok(())
        })
        .unwrap();
        let tol = if n <= 4 { 1e-10 } else { 1e-6 };
        assert!((res.value[0] / polymass::sphere_area(n) - 1.0).abs() < tol, "n={n}");
    }
}

#[test]
fn sphere_area_constants() {
    assert!((polymass::sphere_area(2) - 2.0 * PI).abs() < 1e-15);
    assert!((polymass::sphere_area(3) - 4.0 * PI).abs() < 1e-14);
    assert!((polymass::sphere_area(4) - 2.0 * PI * PI).abs() < 1e-14);
    assert!((polymass::sphere_area(5) - 8.0 * PI * PI / 3.0).abs() < 1e-13);
}

#[test]
fn polygon_duffy_integration() {
    // x^2 + y over the unit square as a polygon
    let sq = Domain::polygon(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap();
    let r = integrate(&sq, 1, &plan(), |u, out| {
        out[0] = u[0] * u[0] + u[1];
        Ok(())
    })
    .unwrap();
    assert!((r.value[0] - (1.0 / 3.0 + 0.5)).abs() < 1e-14);
    // smooth non-polynomial over a non-convex polygon, against a box split
    let l = Domain::polygon(vec![[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [1.0, 1.0], [1.0, 2.0], [0.0, 2.0]]).unwrap();
    let f = |u: &[f64], out: &mut [f64]| {
        out[0] = (u[0] - 0.3 * u[1]).cos();
        Ok(())
    };
    let a = integrate(&l, 1, &plan(), f).unwrap().value[0];
    let b1 = integrate(&Domain::boxed(vec![0.0, 0.0], vec![2.0, 1.0]), 1, &plan(), f).unwrap().value[0];
    let b2 = integrate(&Domain::boxed(vec![0.0, 1.0], vec![1.0, 2.0]), 1, &plan(), f).unwrap().value[0];
    assert!((a - b1 - b2).abs() < 1e-12);
}

#[test]
fn logarithmic_axis() {
    let d = Domain::boxed(vec![1e-3], vec![1e3]).with_log_axis(0);
    let r = integrate(&d, 1, &plan(), |u, out| {
        out[0] = 1.0 / (u[0] * u[0]);
        Ok(())
    })
    .unwrap();
    assert!((r.value[0] / (1e3 - 1e-3) - 1.0).abs() < 1e-10);
}

#[test]
fn non_convergence_is_flagged_not_fatal() {
    let d = Domain::boxed(vec![0.0], vec![1.0]);
    let p = QuadPlan { order: 2, max_levels: 2, rtol: 1e-14, ..plan() };
    let r = integrate(&d, 1, &p, |u, out| {
        out[0] = (50.0 * u[0]).sin();
        Ok(())
    })
    .unwrap();
    assert!(!r.converged);
    assert!(r.error[0] > 0.0);
}

#[test]
fn nan_integrand_is_an_error() {
    let d = Domain::boxed(vec![0.0], vec![1.0]);
    let err = integrate(&d, 1, &plan(), |_, out| {
        out[0] = f64::NAN;
        Ok(())
    })
    .unwrap_err();
    assert!(matches!(err, polymass::Error::NonFinite(_)));
}

#[test]
fn error_estimate_shrinks_with_refinement() {
    let d = Domain::boxed(vec![0.0, 0.0], vec![4.0, 4.0]);
    let f = |u: &[f64], out: &mut [f64]| {
        out[0] = 1.0 / (1.0 + u[0] * u[0] + u[1] * u[1]);
        Ok(())
    };
    let mut last = f64::INFINITY;
    // past the pre-asymptotic first level the estimate falls like h^(2 order)
    for levels in 2..=4 {
        let p = QuadPlan { order: 4, max_levels: levels, rtol: 1e-16, atol: 0.0, ..plan() };
        let e = integrate(&d, 1, &p, f).unwrap().error[0];
        assert!(e * 16.0 <= last, "level {levels}: {e} vs {last}");
        last = e;
    }
}

#[test]
fn worker_count_does_not_change_bits() {
    let d = Domain::boxed(vec![-2.0, -2.0], vec![3.0, 2.0]);
    let f = |u: &[f64], out: &mut [f64]| {
        out[0] = (u[0] * u[1]).sin() / (1.0 + u[0] * u[0]);
        out[1] = (u[0] + 0.1 * u[1]).exp();
        Ok(())
    };
    let base = integrate(&d, 2, &QuadPlan { workers: 1, ..plan() }, f).unwrap();
    for w in [2, 4, 8, 0] {
        let r = integrate(&d, 2, &QuadPlan { workers: w, ..plan() }, f).unwrap();
        assert_eq!(r.value[0].to_bits(), base.value[0].to_bits());
        assert_eq!(r.value[1].to_bits(), base.value[1].to_bits());
        assert_eq!(r.error, base.error);
    }
}

proptest! {
    #[test]
    fn gauss_is_exact_for_polynomials(order in 1usize..=12, coeffs in proptest::collection::vec(-2.0f64..2.0, 24)) {
        // degree 2 order - 1 in each variable
        let deg = 2 * order - 1;
        let c = &coeffs[..(deg + 1).min(24)];
        let d = Domain::boxed(vec![-1.0, 0.5], vec![1.5, 2.0]);
        let p = QuadPlan { order, max_levels: 1, ..QuadPlan::default() };
        let r = integrate(&d, 1, &p, |u, out| {
            let px: f64 = c.iter().enumerate().map(|(k, a)| a * u[0].powi(k as i32)).sum();
            let py = u[1].powi(deg as i32);
            out[0] = px * py;
            Ok(())
        }).unwrap();
        let ix: f64 = c.iter().enumerate().map(|(k, a)| a * (1.5f64.powi(k as i32 + 1) - (-1.0f64).powi(k as i32 + 1)) / (k as f64 + 1.0)).sum();
        let iy = (2.0f64.powi(deg as i32 + 1) - 0.5f64.powi(deg as i32 + 1)) / (deg as f64 + 1.0);
        let exact = ix * iy;
        prop_assert!((r.value[0] - exact).abs() <= 1e-12 * exact.abs().max(1.0), "{} vs {}", r.value[0], exact);
    }
}
