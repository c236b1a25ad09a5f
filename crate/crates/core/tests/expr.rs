use polymass::expr::{BinOp, Expr, Func, Node, Params};
use proptest::prelude::*;

/// A polynomial in three variables as `(coefficient, exponents)` terms.
type Poly = Vec<(f64, [u32; 3])>;

fn source(p: &Poly) -> String {
    let terms: Vec<String> = p
        .iter()
        .map(|(c, e)| format!("{c}*x1^{}*x2^{}*x3^{}", e[0], e[1], e[2]))
        .collect();
    terms.join(" + ")
}

/// Test-only differentiator: exact monomial calculus in f64.
struct PolyJet {
    value: f64,
    grad: [f64; 3],
    hess: [[f64; 3]; 3],
    /// Sum of absolute term sizes, for relative tolerances.
    scale: f64,
}

fn monomial_derivative(e: [u32; 3], x: &[f64; 3], di: &[usize]) -> f64 {
    let mut e = e;
    let mut factor = 1.0;
    for &i in di {
        if e[i] == 0 {
            return 0.0;
        }
        factor *= e[i] as f64;
        e[i] -= 1;
    }
    factor * (0..3).map(|i| x[i].powi(e[i] as i32)).product::<f64>()
}

fn differentiate(p: &Poly, x: &[f64; 3]) -> PolyJet {
    let mut j = PolyJet {
        value: 0.0,
        grad: [0.0; 3],
        hess: [[0.0; 3]; 3],
        scale: 0.0,
    };
    for (c, e) in p {
        j.value += c * monomial_derivative(*e, x, &[]);
        j.scale += (c * monomial_derivative(*e, x, &[])).abs();
        for a in 0..3 {
            let d = c * monomial_derivative(*e, x, &[a]);
            j.grad[a] += d;
            j.scale += d.abs();
            for b in 0..3 {
                let dd = c * monomial_derivative(*e, x, &[a, b]);
                j.hess[a][b] += dd;
                j.scale += dd.abs();
            }
        }
    }
    j
}

fn poly() -> impl Strategy<Value = Poly> {
    let term = (-3.0f64..3.0, 0u32..=4, 0u32..=4, 0u32..=4).prop_filter_map("degree at most 4", |(c, a, b, d)| {
        (a + b + d <= 4).then_some((c, [a, b, d]))
    });
    prop::collection::vec(term, 1..8)
}

fn point() -> impl Strategy<Value = [f64; 3]> {
    [-2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0]
}

fn leaf() -> impl Strategy<Value = Node> {
    prop_oneof![
        (0u32..1000, 0u32..4).prop_map(|(m, k)| Node::Num(m as f64 / 10f64.powi(k as i32))),
        (0usize..3).prop_map(Node::Var),
        Just(Node::Radius),
        Just(Node::Pi),
        prop::sample::select(vec!["a", "b", "m", "q_2"]).prop_map(|s| Node::Param(s.to_string())),
    ]
}

fn tree() -> impl Strategy<Value = Node> {
    leaf().prop_recursive(5, 48, 3, |inner| {
        let op = prop::sample::select(vec![BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div, BinOp::Pow]);
        let unary = prop::sample::select(vec![
            Func::Sqrt,
            Func::Exp,
            Func::Log,
            Func::Sin,
            Func::Cos,
            Func::Tan,
            Func::Atan,
            Func::Abs,
        ]);
        prop_oneof![
            inner.clone().prop_map(|a| Node::Neg(Box::new(a))),
            (op, inner.clone(), inner.clone()).prop_map(|(o, a, b)| Node::Bin(o, Box::new(a), Box::new(b))),
            (unary, inner.clone()).prop_map(|(f, a)| Node::Call(f, vec![a])),
            (inner.clone(), inner).prop_map(|(a, b)| Node::Call(Func::Pow, vec![a, b])),
        ]
    })
}

proptest! {
    #[test]
    fn polynomial_jets_match_monomial_calculus(p in poly(), x in point()) {
        let e = Expr::parse(&source(&p), 3).unwrap();
        let j = e.eval_jet2(&x, &Params::new()).unwrap();
        let o = differentiate(&p, &x);
        let tol = 1e-12 * (1.0 + o.scale);
        prop_assert!((j.value() - o.value).abs() <= tol);
        for a in 0..3 {
            prop_assert!((j.d(a) - o.grad[a]).abs() <= tol, "d{a}: {} vs {}", j.d(a), o.grad[a]);
            for b in 0..3 {
                prop_assert!((j.dd(a, b) - o.hess[a][b]).abs() <= tol, "d{a}d{b}: {} vs {}", j.dd(a, b), o.hess[a][b]);
            }
        }
    }

    #[test]
    fn jets_are_linear(p in poly(), q in poly(), a in -3.0f64..3.0, x in point()) {
        let pars = Params::new();
        let e1 = Expr::parse(&source(&p), 3).unwrap();
        let e2 = Expr::parse(&source(&q), 3).unwrap();
        let combo = Expr::parse(&format!("{a}*({}) + ({})", source(&p), source(&q)), 3).unwrap();
        let (j1, j2, jc) = (
            e1.eval_jet2(&x, &pars).unwrap(),
            e2.eval_jet2(&x, &pars).unwrap(),
            combo.eval_jet2(&x, &pars).unwrap(),
        );
        let scale = differentiate(&p, &x).scale * a.abs() + differentiate(&q, &x).scale + 1.0;
        let close = |u: f64, v: f64| (u - v).abs() <= 1e-14 * scale;
        prop_assert!(close(jc.value(), a * j1.value() + j2.value()));
        for i in 0..3 {
            prop_assert!(close(jc.d(i), a * j1.d(i) + j2.d(i)));
            for k in 0..3 {
                prop_assert!(close(jc.dd(i, k), a * j1.dd(i, k) + j2.dd(i, k)));
            }
        }
    }

    #[test]
    fn print_parse_round_trip(root in tree()) {
        let e = Expr::from_node(root, 3);
        let printed = e.to_string();
        let again = Expr::parse(&printed, 3).unwrap();
        prop_assert_eq!(&e, &again, "printed as {}", printed);
    }

    #[test]
    fn hessian_is_symmetric(root in tree(), x in point()) {
        let pars: Params = [("a", 0.3), ("b", -1.2), ("m", 2.0), ("q_2", 0.7)]
            .iter()
            .map(|(k, v)| (k.to_string(), *v))
            .collect();
        // points outside the domain of the random tree are simply skipped
        if let Ok(j) = Expr::from_node(root, 3).eval_jet2(&x, &pars) {
            for a in 0..3 {
                for b in 0..3 {
                    prop_assert_eq!(j.dd(a, b).to_bits(), j.dd(b, a).to_bits());
                }
            }
        }
    }

    #[test]
    fn evaluation_is_pure(p in poly(), x in point()) {
        let e = Expr::parse(&format!("sqrt(1 + r^2)*({})", source(&p)), 3).unwrap();
        let pars = Params::new();
        let first = e.eval_jet2(&x, &pars).unwrap();
        let bits = |j: &polymass::expr::Jet2| {
            let mut v = vec![j.value().to_bits()];
            v.extend(j.grad().iter().map(|g| g.to_bits()));
            v.extend(j.hessian().iter().flatten().map(|h| h.to_bits()));
            v
        };
        let expected = bits(&first);
        let threads: Vec<_> = (0..4)
            .map(|_| {
                let e = e.clone();
                std::thread::spawn(move || e.eval_jet2(&x, &Params::new()).unwrap())
            })
            .collect();
        for t in threads {
            prop_assert_eq!(bits(&t.join().unwrap()), expected.clone());
        }
    }
}
