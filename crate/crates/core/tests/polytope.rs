use std::f64::consts::{FRAC_PI_2, PI};

use polymass::polytope::{
    ah_prism_condition, check_sequence_conditions, parse_prototype, parse_sigma, prototype, prototype_names,
    FaceTag, Polytope, SequenceKind, SequencePlan,
};
use polymass::quadrature::QuadPlan;
use proptest::prelude::*;

#[test]
fn box_combinatorics() {
    let c = Polytope::cube(3, 1.0).unwrap();
    assert_eq!((c.faces.len(), c.edges.len()), (6, 12));
    let c4 = Polytope::cube(4, 2.0).unwrap();
    assert_eq!((c4.faces.len(), c4.edges.len()), (8, 24));
    for n in 2..=6 {
        let b = Polytope::cube(n, 1.5).unwrap();
        assert_eq!(b.faces.len(), 2 * n);
        assert_eq!(b.edges.len(), 2 * n * (n - 1));
        assert!(b.edges.iter().all(|e| e.angle == FRAC_PI_2));
        b.check_incidence().unwrap();
        // each face of an n-box meets 2(n-1) edges
        assert!(b.faces.iter().all(|f| f.edges.len() == 2 * (n - 1)));
    }
}

#[test]
fn closed_boundary_has_zero_flux() {
    let plan = QuadPlan::default();
    for p in [
        Polytope::cube(3, 1.0).unwrap(),
        prototype("tetrahedron").unwrap(),
        prototype("triangular-prism").unwrap(),
        prototype("wedge").unwrap(),
    ] {
        for field in [[1.0, 0.0, 0.0], [0.3, -0.7, 2.0]] {
            assert!(p.constant_flux(&field, &plan).unwrap().abs() < 1e-12, "{}", p.label);
        }
    }
}

#[test]
fn prototypes_enclose_the_origin() {
    for name in prototype_names() {
        let p = prototype(name).unwrap();
        assert!(p.encloses_origin(), "{name}");
        p.check_incidence().unwrap();
        assert!(p.edges.iter().all(|e| !e.reflex), "{name}");
    }
}

#[test]
fn prototype_angles() {
    let prism = prototype("triangular-prism").unwrap();
    assert_eq!(prism.faces.len(), 5);
    assert_eq!(prism.edges.len(), 9);
    let mut sixty = 0;
    for e in &prism.edges {
        if (e.angle - PI / 3.0).abs() < 1e-12 {
            sixty += 1;
        } else {
            assert!((e.angle - FRAC_PI_2).abs() < 1e-12);
        }
    }
    assert_eq!(sixty, 3);
    assert!((prism.min_sin_angle() - 3f64.sqrt() / 2.0).abs() < 1e-12);

    let tet = prototype("tetrahedron").unwrap();
    for e in &tet.edges {
        assert!((e.angle - (1.0f64 / 3.0).acos()).abs() < 1e-12);
    }
    let wedge = prototype("wedge").unwrap();
    assert!((wedge.min_sin_angle() - 0.017452406).abs() < 1e-8);
}

#[test]
fn scaling_preserves_angles_and_is_homogeneous() {
    let p = prototype("triangular-prism").unwrap();
    let q = p.scaled(2.0).unwrap();
    let r = p.scaled(4.0).unwrap();
    for (a, b) in p.edges.iter().zip(&q.edges) {
        assert_eq!(a.angle, b.angle);
    }
    assert!((r.face_measure() / q.face_measure() - 4.0).abs() < 1e-12);
    assert!((r.edge_measure() / q.edge_measure() - 2.0).abs() < 1e-12);
    assert!((q.inner_radius() - 2.0 * p.inner_radius()).abs() < 1e-12);
    // a scaled unit cube is the cube of that half-width
    let c = prototype("cube").unwrap().scaled(8.0).unwrap();
    let b = Polytope::cube(3, 8.0).unwrap();
    assert_eq!(c.faces.len(), b.faces.len());
    for (f, g) in c.faces.iter().zip(&b.faces) {
        assert_eq!(f.normal, g.normal);
        assert_eq!(f.patch.origin, g.patch.origin);
        assert_eq!(f.patch.domain, g.patch.domain);
    }
}

#[test]
fn scaling_requires_an_enclosed_origin() {
    let off = Polytope::rectangular(&[1.0, 1.0, 1.0], &[2.0, 2.0, 2.0]).unwrap();
    assert!(off.scaled(2.0).is_err());
}

#[test]
fn sequence_conditions() {
    let boxes = SequencePlan::boxes(3, 1.0, 5);
    let rep = check_sequence_conditions(&boxes, 1.0).unwrap();
    assert!(rep.all_pass(), "{:?}", rep.failures);

    let wedge = SequencePlan::prototypes(prototype("wedge").unwrap(), 1.0, 3);
    let rep = check_sequence_conditions(&wedge, 0.01).unwrap();
    assert!(rep.d && rep.all_pass());
    assert!((rep.elements[0].min_sin_angle - 0.01745).abs() < 1e-5);
    let rep = check_sequence_conditions(&wedge, 0.02).unwrap();
    assert!(!rep.d);
    assert_eq!(rep.failures.len(), 1);

    let fixed = SequencePlan {
        kind: SequenceKind::Box { n: 3 },
        scales: vec![4.0; 4],
    };
    let rep = check_sequence_conditions(&fixed, 1.0).unwrap();
    assert!(!rep.a);
    assert!(rep.failures[0].starts_with("a)"));
}

#[test]
fn ah_prism_shape_and_condition() {
    let one = parse_sigma("1").unwrap();
    let p = Polytope::ah_prism(3, 1.0, &one).unwrap();
    assert_eq!(p.faces.len(), 6);
    let bottom = p.faces.iter().find(|f| f.tag == FaceTag::BottomHorosphere).unwrap();
    assert_eq!(bottom.patch.origin[0], (-1.0f64).exp());
    assert_eq!(bottom.normal, vec![-1.0, 0.0, 0.0]);
    assert_eq!(p.faces.iter().filter(|f| f.tag == FaceTag::Vertical).count(), 4);
    assert!(p.edges.iter().all(|e| e.angle == FRAC_PI_2));

    let grow = parse_sigma("exp(L/2)").unwrap();
    assert!(ah_prism_condition(3, 3.0, &grow).unwrap().satisfied);
    assert!(ah_prism_condition(3, 3.0, &one).unwrap().satisfied);
    // q just above n/2: a growing sigma rescues the condition
    let fast = parse_sigma("exp(L)").unwrap();
    let c = ah_prism_condition(3, 1.6, &fast).unwrap();
    // (1 - 3.2) L + 0.4 L = -1.8 L
    assert!(c.satisfied);
    let slow = ah_prism_condition(3, 1.6, &one).unwrap();
    // with sigma fixed the log ratio is +0.4 L
    assert!(!slow.satisfied);
}

#[test]
fn prototype_file_format() {
    let text = "# unit tetrahedron\nvertices\n 1  1  1\n 1 -1 -1\n-1  1 -1\n-1 -1  1\n\
                face 1 2 3\nface 1 4 2\nface 1 3 4\nface 2 4 3\n";
    let p = parse_prototype(text, "tet.poly").unwrap();
    assert_eq!((p.faces.len(), p.edges.len()), (4, 6));
    assert!(p.encloses_origin());

    let inward = text.replace("face 1 2 3", "face 1 3 2");
    assert!(parse_prototype(&inward, "x").is_err());
    let open = "vertices\n1 1 1\n1 -1 -1\n-1 1 -1\n-1 -1 1\nface 1 2 3\nface 1 4 2\nface 1 3 4\n";
    assert!(parse_prototype(open, "x").is_err());
    let bad = text.replace("face 2 4 3", "face 2 4 x");
    match parse_prototype(&bad, "x").unwrap_err() {
        polymass::Error::File { line, .. } => assert_eq!(line, 10),
        other => panic!("{other}"),
    }
}

#[test]
fn non_convex_prototype_has_reflex_edges() {
    // an L-shaped prism: the inner vertical edge is reflex
    let text = "vertices\n\
        -1 -1 -1\n 2 -1 -1\n 2 0.5 -1\n 0.5 0.5 -1\n 0.5 2 -1\n -1 2 -1\n\
        -1 -1 1\n 2 -1 1\n 2 0.5 1\n 0.5 0.5 1\n 0.5 2 1\n -1 2 1\n\
        face 1 6 5 4 3 2\nface 7 8 9 10 11 12\n\
        face 1 2 8 7\nface 2 3 9 8\nface 3 4 10 9\nface 4 5 11 10\nface 5 6 12 11\nface 6 1 7 12\n";
    let p = parse_prototype(text, "ell").unwrap();
    let reflex: Vec<_> = p.edges.iter().filter(|e| e.reflex).collect();
    assert_eq!(reflex.len(), 1);
    assert!((reflex[0].angle - 1.5 * PI).abs() < 1e-12);
    assert!(p.encloses_origin());
    assert!(p.constant_flux(&[1.0, 2.0, 3.0], &QuadPlan::default()).unwrap().abs() < 1e-12);
}

proptest! {
    #[test]
    fn edge_adjacency_is_symmetric(n in 2usize..=6, l in 0.1f64..100.0) {
        let b = Polytope::cube(n, l).unwrap();
        for (i, e) in b.edges.iter().enumerate() {
            for &f in &e.faces {
                prop_assert!(b.faces[f].edges.contains(&i));
            }
        }
    }

    #[test]
    fn scaling_homogeneity(r in 0.1f64..50.0, s in 0.1f64..50.0, which in 0usize..5) {
        let p = prototype(prototype_names()[which]).unwrap();
        let a = p.scaled(r).unwrap();
        let b = p.scaled(r * s).unwrap();
        prop_assert!((b.face_measure() / a.face_measure() / (s * s) - 1.0).abs() < 1e-12);
        prop_assert!((b.edge_measure() / a.edge_measure() / s - 1.0).abs() < 1e-12);
    }
}
