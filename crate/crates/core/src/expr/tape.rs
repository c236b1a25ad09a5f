use std::sync::Arc;

use super::{BinOp, Expr, Func, Jet2, Node, Params};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
enum Op {
    Const(f64),
    Var(usize),
    Radius,
    Neg,
    Add,
    Sub,
    Mul,
    Div(usize),
    Pow(usize),
    Call(Func, usize),
}

/// Postfix program for one expression with parameters bound to values.
///
/// Evaluation is pure; a tape can be shared between threads.
#[derive(Debug, Clone)]
pub struct Tape {
    dim: usize,
    ops: Vec<Op>,
    // printed subexpressions for operations that can leave their domain
    labels: Vec<Arc<str>>,
}

impl Tape {
    pub fn compile(expr: &Expr, params: &Params) -> Result<Tape> {
        let mut tape = Tape {
            dim: expr.dim(),
            ops: Vec::new(),
            labels: Vec::new(),
        };
        tape.emit(expr.root(), params)?;
        Ok(tape)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn label(&mut self, n: &Node) -> usize {
        self.labels.push(Arc::from(n.to_string()));
        self.labels.len() - 1
    }

    fn emit(&mut self, n: &Node, params: &Params) -> Result<()> {
        match n {
            Node::Num(v) => self.ops.push(Op::Const(*v)),
            Node::Pi => self.ops.push(Op::Const(std::f64::consts::PI)),
            Node::Var(i) => self.ops.push(Op::Var(*i)),
            Node::Radius => self.ops.push(Op::Radius),
            Node::Param(p) => {
                let v = params
                    .get(p)
                    .ok_or_else(|| Error::UnboundParameter(p.clone()))?;
                self.ops.push(Op::Const(*v));
            }
            Node::Neg(a) => {
                self.emit(a, params)?;
                self.ops.push(Op::Neg);
            }
            Node::Bin(op, a, b) => {
                self.emit(a, params)?;
                self.emit(b, params)?;
                let op = match op {
                    BinOp::Add => Op::Add,
                    BinOp::Sub => Op::Sub,
                    BinOp::Mul => Op::Mul,
                    BinOp::Div => Op::Div(self.label(n)),
                    BinOp::Pow => Op::Pow(self.label(n)),
                };
                self.ops.push(op);
            }
            Node::Call(f, args) => {
                for a in args {
                    self.emit(a, params)?;
                }
                let l = self.label(n);
                self.ops.push(match f {
                    Func::Pow => Op::Pow(l),
                    _ => Op::Call(*f, l),
                });
            }
        }
        Ok(())
    }

    /// Evaluates with each coordinate seeded as an independent variable.
    pub fn eval_at(&self, point: &[f64]) -> Result<Jet2> {
        let n = self.dim;
        let vars: Vec<Jet2> = (0..n).map(|i| Jet2::variable(n, i, point[i])).collect();
        self.eval(&vars, &mut Vec::with_capacity(16))
    }

    /// Evaluates with caller-supplied jets for the coordinates. The result
    /// is a jet in whatever variables those jets are expressed in.
    pub fn eval(&self, vars: &[Jet2], stack: &mut Vec<Jet2>) -> Result<Jet2> {
        debug_assert_eq!(vars.len(), self.dim);
        let jd = vars.first().map(|v| v.dim()).unwrap_or(0);
        stack.clear();
        for op in &self.ops {
            let out = match op {
                Op::Const(v) => Jet2::constant(jd, *v),
                Op::Var(i) => vars[*i],
                Op::Radius => {
                    let mut s = Jet2::constant(jd, 0.0);
                    for v in vars {
                        s = s + *v * *v;
                    }
                    if s.value() <= 0.0 {
                        return Err(Error::Domain {
                            expr: "r".into(),
                            reason: "radius is zero".into(),
                        });
                    }
                    s.sqrt()
                }
                Op::Neg => {
                    let a = stack.pop().expect("tape underflow");
                    -a
                }
                Op::Add | Op::Sub | Op::Mul | Op::Div(_) | Op::Pow(_) => {
                    let b = stack.pop().expect("tape underflow");
                    let a = stack.pop().expect("tape underflow");
                    match op {
                        Op::Add => a + b,
                        Op::Sub => a - b,
                        Op::Mul => a * b,
                        Op::Div(l) => {
                            if b.value() == 0.0 {
                                return Err(self.domain(*l, "division by zero"));
                            }
                            a / b
                        }
                        Op::Pow(l) => self.pow(a, b, *l)?,
                        _ => unreachable!(),
                    }
                }
                Op::Call(f, l) => {
                    let a = stack.pop().expect("tape underflow");
                    let v = a.value();
                    match f {
                        Func::Sqrt => {
                            if v < 0.0 {
                                return Err(self.domain(*l, "square root of a negative number"));
                            }
                            a.sqrt()
                        }
                        Func::Log => {
                            if v <= 0.0 {
                                return Err(self.domain(*l, "logarithm of a nonpositive number"));
                            }
                            a.ln()
                        }
                        Func::Exp => a.exp(),
                        Func::Sin => a.sin(),
                        Func::Cos => a.cos(),
                        Func::Tan => a.tan(),
                        Func::Atan => a.atan(),
                        Func::Abs => a.abs(),
                        Func::Pow => unreachable!("pow is compiled to Op::Pow"),
                    }
                }
            };
            stack.push(out);
        }
        Ok(stack.pop().expect("empty tape"))
    }

    fn pow(&self, a: Jet2, b: Jet2, label: usize) -> Result<Jet2> {
        let k = b.value();
        if b.is_constant() && k.fract() == 0.0 && k.abs() <= 1024.0 {
            if a.value() == 0.0 && k < 0.0 {
                return Err(self.domain(label, "zero raised to a negative power"));
            }
            return Ok(a.powi(k as i32));
        }
        if a.value() <= 0.0 {
            return Err(self.domain(label, "non-integer power of a nonpositive base"));
        }
        if b.is_constant() {
            let v = a.value();
            let f0 = v.powf(k);
            return Ok(a.chain(f0, k * f0 / v, k * (k - 1.0) * f0 / (v * v)));
        }
        Ok((b * a.ln()).exp())
    }

    fn domain(&self, label: usize, reason: &str) -> Error {
        Error::Domain {
            expr: self.labels[label].to_string(),
            reason: reason.into(),
        }
    }
}
