//! Scalar expressions of coordinates.
//!
//! Expressions are parsed once into an immutable tree ([`Expr`]) and compiled
//! into a postfix [`Tape`] with parameters bound by name. Tapes evaluate on
//! [`Jet2`] values, so every evaluation yields exact first and second
//! derivatives. Evaluating with caller-supplied variable jets composes the
//! expression with another map, which is how pullbacks and hyperplane
//! restrictions are implemented.

mod jet;
mod parse;
mod tape;

use std::collections::BTreeMap;
use std::fmt;

pub use jet::{Jet2, MAX_DIM};
pub use tape::Tape;

use crate::error::{Error, Result};
use parse::{ParamPolicy, Parser};

/// Named parameter values, late-bound at compile time.
pub type Params = BTreeMap<String, f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sqrt,
    Exp,
    Log,
    Sin,
    Cos,
    Tan,
    Atan,
    Abs,
    Pow,
}

impl Func {
    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sqrt" => Func::Sqrt,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "atan" => Func::Atan,
            "abs" => Func::Abs,
            "pow" => Func::Pow,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sqrt => "sqrt",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Atan => "atan",
            Func::Abs => "abs",
            Func::Pow => "pow",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Pow => 2,
            _ => 1,
        }
    }
}

/// Expression tree node. Variables are 0-based internally.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Num(f64),
    Var(usize),
    /// Euclidean coordinate radius `sqrt(x1^2 + ... + xn^2)`.
    Radius,
    Pi,
    Param(String),
    Neg(Box<Node>),
    Bin(BinOp, Box<Node>, Box<Node>),
    Call(Func, Vec<Node>),
}

/// A parsed expression in `dim` coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    root: Node,
    dim: usize,
}

impl Expr {
    /// Parses `source`; bare identifiers become late-bound parameters.
    pub fn parse(source: &str, dim: usize) -> Result<Expr> {
        check_dim(dim)?;
        let root = Parser::new(source, dim, ParamPolicy::Open)?.parse()?;
        Ok(Expr { root, dim })
    }

    /// Parses `source`, rejecting identifiers outside `params`.
    pub fn parse_with_params(source: &str, dim: usize, params: &[String]) -> Result<Expr> {
        check_dim(dim)?;
        let root = Parser::new(source, dim, ParamPolicy::Declared(params))?.parse()?;
        Ok(Expr { root, dim })
    }

    pub fn from_node(root: Node, dim: usize) -> Expr {
        Expr { root, dim }
    }

    pub fn constant(v: f64, dim: usize) -> Expr {
        Expr {
            root: Node::Num(v),
            dim,
        }
    }

    pub fn var(index: usize, dim: usize) -> Expr {
        Expr {
            root: Node::Var(index),
            dim,
        }
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.root, Node::Num(v) if v == 0.0)
    }

    /// Parameter names referenced by the expression, sorted and deduplicated.
    pub fn params(&self) -> Vec<String> {
        let mut out = Vec::new();
        collect_params(&self.root, &mut out);
        out.sort();
        out.dedup();
        out
    }

    pub fn compile(&self, params: &Params) -> Result<Tape> {
        Tape::compile(self, params)
    }

    /// Value, gradient and Hessian at `point`.
    pub fn eval_jet2(&self, point: &[f64], params: &Params) -> Result<Jet2> {
        if point.len() != self.dim {
            return Err(Error::Invalid(format!(
                "point has {} coordinates, expression expects {}",
                point.len(),
                self.dim
            )));
        }
        let tape = self.compile(params)?;
        tape.eval_at(point)
    }

    /// Replaces every coordinate `x_i` by `vars[i]`, producing an expression
    /// in `new_dim` coordinates. The radius symbol is expanded first so it
    /// keeps meaning the radius of the original coordinates.
    pub fn substitute(&self, vars: &[Node], new_dim: usize) -> Expr {
        assert_eq!(vars.len(), self.dim, "substitution arity");
        Expr {
            root: substitute(&self.root, vars, self.dim),
            dim: new_dim,
        }
    }

    /// Symbolic partial derivative with respect to coordinate `var` (0-based).
    pub fn derivative(&self, var: usize) -> Expr {
        Expr {
            root: derivative(&self.root, var),
            dim: self.dim,
        }
    }

    pub fn add(&self, other: &Expr) -> Expr {
        Expr {
            root: add(self.root.clone(), other.root.clone()),
            dim: self.dim,
        }
    }

    pub fn sub(&self, other: &Expr) -> Expr {
        Expr {
            root: sub(self.root.clone(), other.root.clone()),
            dim: self.dim,
        }
    }

    pub fn mul(&self, other: &Expr) -> Expr {
        Expr {
            root: mul(self.root.clone(), other.root.clone()),
            dim: self.dim,
        }
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 || dim > MAX_DIM {
        return Err(Error::Dimension(format!(
            "expressions support 1..={MAX_DIM} coordinates, got {dim}"
        )));
    }
    Ok(())
}

fn collect_params(n: &Node, out: &mut Vec<String>) {
    match n {
        Node::Param(p) => out.push(p.clone()),
        Node::Neg(a) => collect_params(a, out),
        Node::Bin(_, a, b) => {
            collect_params(a, out);
            collect_params(b, out);
        }
        Node::Call(_, args) => args.iter().for_each(|a| collect_params(a, out)),
        _ => {}
    }
}

pub(crate) fn radius_node(dim: usize) -> Node {
    let mut sum = None;
    for i in 0..dim {
        let sq = Node::Bin(
            BinOp::Pow,
            Box::new(Node::Var(i)),
            Box::new(Node::Num(2.0)),
        );
        sum = Some(match sum {
            None => sq,
            Some(acc) => Node::Bin(BinOp::Add, Box::new(acc), Box::new(sq)),
        });
    }
    Node::Call(Func::Sqrt, vec![sum.unwrap_or(Node::Num(0.0))])
}

fn substitute(n: &Node, vars: &[Node], dim: usize) -> Node {
    match n {
        Node::Var(i) => vars[*i].clone(),
        Node::Radius => substitute(&radius_node(dim), vars, dim),
        Node::Neg(a) => Node::Neg(Box::new(substitute(a, vars, dim))),
        Node::Bin(op, a, b) => Node::Bin(
            *op,
            Box::new(substitute(a, vars, dim)),
            Box::new(substitute(b, vars, dim)),
        ),
        Node::Call(f, args) => {
            Node::Call(*f, args.iter().map(|a| substitute(a, vars, dim)).collect())
        }
        other => other.clone(),
    }
}

// Smart constructors. These only fold the identities 0 and 1 so that
// derivative trees stay small; no other rewriting happens.

fn num(v: f64) -> Node {
    Node::Num(v)
}

fn is_num(n: &Node, v: f64) -> bool {
    matches!(n, Node::Num(x) if *x == v)
}

fn add(a: Node, b: Node) -> Node {
    if is_num(&a, 0.0) {
        return b;
    }
    if is_num(&b, 0.0) {
        return a;
    }
    Node::Bin(BinOp::Add, Box::new(a), Box::new(b))
}

fn sub(a: Node, b: Node) -> Node {
    if is_num(&b, 0.0) {
        return a;
    }
    if is_num(&a, 0.0) {
        return neg(b);
    }
    Node::Bin(BinOp::Sub, Box::new(a), Box::new(b))
}

fn mul(a: Node, b: Node) -> Node {
    if is_num(&a, 0.0) || is_num(&b, 0.0) {
        return num(0.0);
    }
    if is_num(&a, 1.0) {
        return b;
    }
    if is_num(&b, 1.0) {
        return a;
    }
    Node::Bin(BinOp::Mul, Box::new(a), Box::new(b))
}

fn div(a: Node, b: Node) -> Node {
    if is_num(&a, 0.0) {
        return num(0.0);
    }
    if is_num(&b, 1.0) {
        return a;
    }
    Node::Bin(BinOp::Div, Box::new(a), Box::new(b))
}

fn neg(a: Node) -> Node {
    if is_num(&a, 0.0) {
        return a;
    }
    Node::Neg(Box::new(a))
}

fn pow(a: Node, b: Node) -> Node {
    if is_num(&b, 1.0) {
        return a;
    }
    Node::Bin(BinOp::Pow, Box::new(a), Box::new(b))
}

fn call(f: Func, a: Node) -> Node {
    Node::Call(f, vec![a])
}

fn depends_on(n: &Node, var: usize) -> bool {
    match n {
        Node::Var(i) => *i == var,
        Node::Radius => true,
        Node::Neg(a) => depends_on(a, var),
        Node::Bin(_, a, b) => depends_on(a, var) || depends_on(b, var),
        Node::Call(_, args) => args.iter().any(|a| depends_on(a, var)),
        _ => false,
    }
}

fn derivative(n: &Node, var: usize) -> Node {
    if !depends_on(n, var) {
        return num(0.0);
    }
    let d = |m: &Node| derivative(m, var);
    match n {
        Node::Var(_) => num(1.0),
        Node::Radius => div(Node::Var(var), Node::Radius),
        Node::Neg(a) => neg(d(a)),
        Node::Bin(op, a, b) => {
            let (a, b) = (a.as_ref(), b.as_ref());
            match op {
                BinOp::Add => add(d(a), d(b)),
                BinOp::Sub => sub(d(a), d(b)),
                BinOp::Mul => add(mul(d(a), b.clone()), mul(a.clone(), d(b))),
                BinOp::Div => div(
                    sub(mul(d(a), b.clone()), mul(a.clone(), d(b))),
                    pow(b.clone(), num(2.0)),
                ),
                BinOp::Pow => power_derivative(a, b, d(a), d(b)),
            }
        }
        Node::Call(f, args) => {
            let a = &args[0];
            let da = d(a);
            match f {
                Func::Sqrt => div(da, mul(num(2.0), call(Func::Sqrt, a.clone()))),
                Func::Exp => mul(call(Func::Exp, a.clone()), da),
                Func::Log => div(da, a.clone()),
                Func::Sin => mul(call(Func::Cos, a.clone()), da),
                Func::Cos => neg(mul(call(Func::Sin, a.clone()), da)),
                Func::Tan => mul(
                    add(num(1.0), pow(call(Func::Tan, a.clone()), num(2.0))),
                    da,
                ),
                Func::Atan => div(da, add(num(1.0), pow(a.clone(), num(2.0)))),
                Func::Abs => mul(div(a.clone(), call(Func::Abs, a.clone())), da),
                Func::Pow => {
                    let b = &args[1];
                    power_derivative(a, b, da, d(b))
                }
            }
        }
        _ => num(0.0),
    }
}

fn power_derivative(a: &Node, b: &Node, da: Node, db: Node) -> Node {
    if is_num(&db, 0.0) {
        // d(a^b) = b a^(b-1) a'
        let reduced = match b {
            Node::Num(k) => pow(a.clone(), num(k - 1.0)),
            _ => pow(a.clone(), sub(b.clone(), num(1.0))),
        };
        return mul(mul(b.clone(), reduced), da);
    }
    // d(a^b) = a^b (b' log a + b a'/a)
    let ab = pow(a.clone(), b.clone());
    mul(
        ab,
        add(
            mul(db, call(Func::Log, a.clone())),
            div(mul(b.clone(), da), a.clone()),
        ),
    )
}

const PREC_ADD: u8 = 1;
const PREC_MUL: u8 = 2;
const PREC_NEG: u8 = 3;
const PREC_POW: u8 = 4;
const PREC_ATOM: u8 = 5;

fn precedence(n: &Node) -> u8 {
    match n {
        Node::Bin(BinOp::Add | BinOp::Sub, ..) => PREC_ADD,
        Node::Bin(BinOp::Mul | BinOp::Div, ..) => PREC_MUL,
        Node::Neg(_) => PREC_NEG,
        Node::Bin(BinOp::Pow, ..) => PREC_POW,
        Node::Num(v) if *v < 0.0 || v.is_sign_negative() => PREC_ADD,
        _ => PREC_ATOM,
    }
}

fn write_node(f: &mut fmt::Formatter<'_>, n: &Node, min: u8) -> fmt::Result {
    if precedence(n) < min {
        f.write_str("(")?;
        write_node(f, n, 0)?;
        return f.write_str(")");
    }
    match n {
        Node::Num(v) => write!(f, "{v}"),
        Node::Var(i) => write!(f, "x{}", i + 1),
        Node::Radius => f.write_str("r"),
        Node::Pi => f.write_str("pi"),
        Node::Param(p) => f.write_str(p),
        Node::Neg(a) => {
            f.write_str("-")?;
            write_node(f, a, PREC_POW)
        }
        Node::Bin(op, a, b) => {
            let (sym, lmin, rmin) = match op {
                BinOp::Add => (" + ", PREC_ADD, PREC_MUL),
                BinOp::Sub => (" - ", PREC_ADD, PREC_MUL),
                BinOp::Mul => ("*", PREC_MUL, PREC_NEG),
                BinOp::Div => ("/", PREC_MUL, PREC_NEG),
                BinOp::Pow => ("^", PREC_ATOM, PREC_NEG),
            };
            write_node(f, a, lmin)?;
            f.write_str(sym)?;
            write_node(f, b, rmin)
        }
        Node::Call(func, args) => {
            write!(f, "{}(", func.name())?;
            for (k, a) in args.iter().enumerate() {
                if k > 0 {
                    f.write_str(", ")?;
                }
                write_node(f, a, 0)?;
            }
            f.write_str(")")
        }
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_node(f, self, 0)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_node(f, &self.root, 0)
    }
}

/// S-expression rendering, handy for asserting tree shape in tests.
pub fn sexpr(n: &Node) -> String {
    match n {
        Node::Num(v) => format!("{v}"),
        Node::Var(i) => format!("x{}", i + 1),
        Node::Radius => "r".into(),
        Node::Pi => "pi".into(),
        Node::Param(p) => p.clone(),
        Node::Neg(a) => format!("(neg {})", sexpr(a)),
        Node::Bin(op, a, b) => {
            let s = match op {
                BinOp::Add => "+",
                BinOp::Sub => "-",
                BinOp::Mul => "*",
                BinOp::Div => "/",
                BinOp::Pow => "^",
            };
            format!("({s} {} {})", sexpr(a), sexpr(b))
        }
        Node::Call(func, args) => {
            let inner: Vec<String> = args.iter().map(sexpr).collect();
            format!("({} {})", func.name(), inner.join(" "))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(pairs: &[(&str, f64)]) -> Params {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn parses_with_standard_precedence() {
        let e = Expr::parse("1 + m/(2*r)", 3).unwrap();
        assert_eq!(sexpr(e.root()), "(+ 1 (/ m (* 2 r)))");
        let e = Expr::parse("x1^2 - -x2", 3).unwrap();
        assert_eq!(sexpr(e.root()), "(- (^ x1 2) (neg x2))");
        let e = Expr::parse("-x^2^3", 3).unwrap();
        assert_eq!(sexpr(e.root()), "(neg (^ x1 (^ 2 3)))");
        let e = Expr::parse("2^-x", 2).unwrap();
        assert_eq!(sexpr(e.root()), "(^ 2 (neg x1))");
    }

    #[test]
    fn rejects_unknown_function_and_bad_arity() {
        assert!(matches!(
            Expr::parse("foo(x1)", 3),
            Err(Error::UnknownIdentifier { ref name, offset: 0 }) if name == "foo"
        ));
        assert!(matches!(
            Expr::parse("pow(x1)", 3),
            Err(Error::Arity { expected: 2, found: 1, .. })
        ));
        assert!(matches!(
            Expr::parse("x4 + 1", 3),
            Err(Error::VariableIndex { index: 4, dim: 3 })
        ));
        assert!(matches!(
            Expr::parse("z", 2),
            Err(Error::VariableIndex { index: 3, dim: 2 })
        ));
    }

    #[test]
    fn syntax_errors_carry_byte_offsets() {
        match Expr::parse("1 + * 2", 2) {
            Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 4),
            other => panic!("{other:?}"),
        }
        match Expr::parse("(x1 + 2", 2) {
            Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 7),
            other => panic!("{other:?}"),
        }
        assert!(matches!(Expr::parse("", 2), Err(Error::Syntax { .. })));
        match Expr::parse("x1 $ 2", 2) {
            Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn declared_parameters_are_enforced() {
        let names = vec!["m".to_string()];
        assert!(Expr::parse_with_params("1 + m/r", 3, &names).is_ok());
        assert!(matches!(
            Expr::parse_with_params("1 + q/r", 3, &names),
            Err(Error::UnknownIdentifier { .. })
        ));
    }

    #[test]
    fn aliases_only_up_to_four_dimensions() {
        let e = Expr::parse("x*y*z*w", 4).unwrap();
        assert_eq!(sexpr(e.root()), "(* (* (* x1 x2) x3) x4)");
        // in five dimensions `w` is an ordinary parameter name
        let e = Expr::parse("w", 5).unwrap();
        assert_eq!(e.params(), vec!["w".to_string()]);
    }

    #[test]
    fn bilinear_jet() {
        let e = Expr::parse("x1*x2", 2).unwrap();
        let j = e.eval_jet2(&[3.0, 5.0], &Params::new()).unwrap();
        assert_eq!(j.value(), 15.0);
        assert_eq!(j.grad(), &[5.0, 3.0]);
        assert_eq!(j.dd(0, 1), 1.0);
        assert_eq!(j.dd(1, 0), 1.0);
    }

    #[test]
    fn radius_jet_on_axis() {
        let e = Expr::parse("r", 3).unwrap();
        let j = e.eval_jet2(&[1.0, 0.0, 0.0], &Params::new()).unwrap();
        assert_eq!(j.value(), 1.0);
        assert_eq!(j.grad(), &[1.0, 0.0, 0.0]);
        // Hessian of |x| is (I - x x^T)/|x|
        assert_eq!(j.dd(0, 0), 0.0);
        assert_eq!(j.dd(1, 1), 1.0);
    }

    #[test]
    fn exp_matches_central_differences() {
        let e = Expr::parse("exp(x1)", 1).unwrap();
        let p = Params::new();
        let j = e.eval_jet2(&[0.7], &p).unwrap();
        let f = |x: f64| e.eval_jet2(&[x], &p).unwrap().value();
        let h = 1e-5;
        let d1 = (f(0.7 + h) - f(0.7 - h)) / (2.0 * h);
        let d2 = (f(0.7 + h) - 2.0 * f(0.7) + f(0.7 - h)) / (h * h);
        assert_eq!(j.d(0), j.value());
        assert_eq!(j.dd(0, 0), j.value());
        assert!((d1 - j.d(0)).abs() / j.d(0) < 1e-9);
        // the second difference loses about half the digits of the first
        assert!((d2 - j.dd(0, 0)).abs() / j.dd(0, 0) < 1e-5);
    }

    #[test]
    fn domain_errors_name_the_subexpression() {
        let e = Expr::parse("1 + sqrt(x1 - 2)", 1).unwrap();
        match e.eval_jet2(&[1.0], &Params::new()) {
            Err(Error::Domain { expr, .. }) => assert_eq!(expr, "sqrt(x1 - 2)"),
            other => panic!("{other:?}"),
        }
        let e = Expr::parse("log(x1)", 1).unwrap();
        assert!(matches!(
            e.eval_jet2(&[0.0], &Params::new()),
            Err(Error::Domain { .. })
        ));
        let e = Expr::parse("x1^0.5", 1).unwrap();
        assert!(matches!(
            e.eval_jet2(&[-1.0], &Params::new()),
            Err(Error::Domain { .. })
        ));
        let e = Expr::parse("1/(x1 - 1)", 1).unwrap();
        assert!(matches!(
            e.eval_jet2(&[1.0], &Params::new()),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn integer_powers_accept_nonpositive_bases() {
        let e = Expr::parse("x1^3 + x1^(-2)*0 + x2^2", 2).unwrap();
        let j = e.eval_jet2(&[-2.0, 0.0], &Params::new()).unwrap();
        assert_eq!(j.value(), -8.0);
        assert_eq!(j.d(0), 12.0);
        assert_eq!(j.dd(1, 1), 2.0);
    }

    #[test]
    fn parameters_are_late_bound() {
        let e = Expr::parse("(1 + m/(2*r))^4", 3).unwrap();
        let at = [10.0, 0.0, 0.0];
        let a = e.eval_jet2(&at, &params(&[("m", 1.0)])).unwrap().value();
        let b = e.eval_jet2(&at, &params(&[("m", 2.0)])).unwrap().value();
        assert_eq!(a, 1.21550625);
        assert!((b - 1.1f64.powi(4)).abs() < 1e-15);
        assert!(matches!(
            e.eval_jet2(&at, &Params::new()),
            Err(Error::UnboundParameter(ref p)) if p == "m"
        ));
    }

    #[test]
    fn printing_round_trips_structure() {
        for src in [
            "1 + m/(2*r)",
            "x1^2 - -x2",
            "a - (b - c)",
            "(a*b)^c",
            "a^b^c",
            "-(a*b)",
            "-(-x1)",
            "pow(x1, 2)*sin(x2)/(1 + x3)",
            "2^-x1",
            "a/(b*c)",
            "-x1^2",
            "1.5e-3*pi",
        ] {
            let e = Expr::parse(src, 3).unwrap();
            let printed = e.to_string();
            let again = Expr::parse(&printed, 3).unwrap();
            assert_eq!(e, again, "{src} -> {printed}");
        }
    }

    #[test]
    fn symbolic_derivative_agrees_with_jets() {
        let p = params(&[("m", 0.7)]);
        let e = Expr::parse("(1 + m/(2*r))^4*atan(x2/x1) + exp(-x3)*sqrt(r)", 3).unwrap();
        let x = [1.3, -0.4, 2.1];
        let j = e.eval_jet2(&x, &p).unwrap();
        for k in 0..3 {
            let dk = e.derivative(k).eval_jet2(&x, &p).unwrap();
            assert!((dk.value() - j.d(k)).abs() < 1e-13 * (1.0 + j.d(k).abs()));
            for l in 0..3 {
                assert!((dk.d(l) - j.dd(k, l)).abs() < 1e-12 * (1.0 + j.dd(k, l).abs()));
            }
        }
    }

    #[test]
    fn substitution_expands_the_radius() {
        let e = Expr::parse("r^2 + x3", 3).unwrap();
        // restrict to x3 = 2, keeping (x1, x2)
        let s = e.substitute(&[Node::Var(0), Node::Var(1), Node::Num(2.0)], 2);
        let v = s.eval_jet2(&[1.0, 1.0], &Params::new()).unwrap();
        assert!((v.value() - 8.0).abs() < 1e-14);
        assert!((v.d(0) - 2.0).abs() < 1e-14);
    }
}
