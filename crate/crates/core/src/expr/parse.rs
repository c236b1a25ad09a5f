//! Recursive-descent parser for coordinate expressions.
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := ['-'] power
//! power  := atom ['^' factor]
//! atom   := number | ident | ident '(' expr (',' expr)* ')' | '(' expr ')'
//! ```

use super::{BinOp, Func, Node};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    Comma,
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(src: &'a str) -> Result<Vec<(Tok, usize)>> {
        let mut lx = Lexer { src, pos: 0 };
        let mut out = Vec::new();
        loop {
            let (tok, at) = lx.next()?;
            let end = tok == Tok::End;
            out.push((tok, at));
            if end {
                return Ok(out);
            }
        }
    }

    fn next(&mut self) -> Result<(Tok, usize)> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(&c) = bytes.get(self.pos) else {
            return Ok((Tok::End, start));
        };
        let tok = match c {
            b'0'..=b'9' | b'.' => return self.number(),
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                while self.pos < bytes.len()
                    && (bytes[self.pos].is_ascii_alphanumeric() || bytes[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                return Ok((Tok::Ident(self.src[start..self.pos].to_string()), start));
            }
            b'+' | b'-' | b'*' | b'/' | b'^' => Tok::Op(c as char),
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b',' => Tok::Comma,
            _ => {
                let ch = self.src[start..].chars().next().unwrap_or('?');
                return Err(Error::Syntax {
                    offset: start,
                    message: format!("unexpected character `{ch}`"),
                });
            }
        };
        self.pos += 1;
        Ok((tok, start))
    }

    fn number(&mut self) -> Result<(Tok, usize)> {
        let bytes = self.src.as_bytes();
        let start = self.pos;
        let digits = |p: &mut usize| {
            let s = *p;
            while *p < bytes.len() && bytes[*p].is_ascii_digit() {
                *p += 1;
            }
            *p - s
        };
        let mut n = digits(&mut self.pos);
        if self.pos < bytes.len() && bytes[self.pos] == b'.' {
            self.pos += 1;
            n += digits(&mut self.pos);
        }
        if n == 0 {
            return Err(Error::Syntax {
                offset: start,
                message: "malformed number".into(),
            });
        }
        if self.pos < bytes.len() && (bytes[self.pos] == b'e' || bytes[self.pos] == b'E') {
            let mut p = self.pos + 1;
            if p < bytes.len() && (bytes[p] == b'+' || bytes[p] == b'-') {
                p += 1;
            }
            if digits(&mut p) > 0 {
                self.pos = p;
            }
        }
        let text = &self.src[start..self.pos];
        let v: f64 = text.parse().map_err(|_| Error::Syntax {
            offset: start,
            message: format!("malformed number `{text}`"),
        })?;
        Ok((Tok::Num(v), start))
    }
}

/// How bare identifiers that are neither coordinates nor builtins are treated.
pub(crate) enum ParamPolicy<'p> {
    /// Any identifier becomes a late-bound parameter.
    Open,
    /// Only the listed names are accepted.
    Declared(&'p [String]),
}

pub(crate) struct Parser<'p> {
    toks: Vec<(Tok, usize)>,
    at: usize,
    dim: usize,
    policy: ParamPolicy<'p>,
}

impl<'p> Parser<'p> {
    pub(crate) fn new(src: &str, dim: usize, policy: ParamPolicy<'p>) -> Result<Self> {
        Ok(Parser {
            toks: Lexer::tokens(src)?,
            at: 0,
            dim,
            policy,
        })
    }

    pub(crate) fn parse(mut self) -> Result<Node> {
        if self.peek() == &Tok::End {
            return Err(Error::Syntax {
                offset: 0,
                message: "empty expression".into(),
            });
        }
        let node = self.expr()?;
        match self.peek() {
            Tok::End => Ok(node),
            other => Err(Error::Syntax {
                offset: self.offset(),
                message: format!("unexpected {}", describe(other)),
            }),
        }
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn offset(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<()> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(Error::Syntax {
                offset: self.offset(),
                message: format!("expected {}, found {}", describe(&want), describe(self.peek())),
            })
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Op('+') => BinOp::Add,
                Tok::Op('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Tok::Op('*') => BinOp::Mul,
                Tok::Op('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.factor()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn factor(&mut self) -> Result<Node> {
        if *self.peek() == Tok::Op('-') {
            self.bump();
            let inner = self.power()?;
            return Ok(Node::Neg(Box::new(inner)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.atom()?;
        if *self.peek() == Tok::Op('^') {
            self.bump();
            let exp = self.factor()?;
            return Ok(Node::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node> {
        let (tok, at) = self.bump();
        match tok {
            Tok::Num(v) => Ok(Node::Num(v)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if *self.peek() == Tok::LParen {
                    self.bump();
                    let mut args = vec![self.expr()?];
                    while *self.peek() == Tok::Comma {
                        self.bump();
                        args.push(self.expr()?);
                    }
                    self.expect(Tok::RParen)?;
                    let func = Func::from_name(&name).ok_or(Error::UnknownIdentifier {
                        name: name.clone(),
                        offset: at,
                    })?;
                    if args.len() != func.arity() {
                        return Err(Error::Arity {
                            name,
                            expected: func.arity(),
                            found: args.len(),
                        });
                    }
                    return Ok(Node::Call(func, args));
                }
                self.identifier(name, at)
            }
            other => Err(Error::Syntax {
                offset: at,
                message: format!("unexpected {}", describe(&other)),
            }),
        }
    }

    fn identifier(&self, name: String, at: usize) -> Result<Node> {
        if name == "pi" {
            return Ok(Node::Pi);
        }
        if name == "r" {
            return Ok(Node::Radius);
        }
        if let Some(index) = coordinate_index(&name, self.dim) {
            if index == 0 || index > self.dim {
                return Err(Error::VariableIndex {
                    index,
                    dim: self.dim,
                });
            }
            return Ok(Node::Var(index - 1));
        }
        if Func::from_name(&name).is_some() {
            return Err(Error::Syntax {
                offset: at,
                message: format!("function `{name}` used without arguments"),
            });
        }
        match &self.policy {
            ParamPolicy::Open => Ok(Node::Param(name)),
            ParamPolicy::Declared(names) if names.contains(&name) => {
                Ok(Node::Param(name))
            }
            ParamPolicy::Declared(_) => Err(Error::UnknownIdentifier { name, offset: at }),
        }
    }
}

/// 1-based coordinate index named by `x<k>` or by an alias `x, y, z, w`
/// (aliases only when the dimension is at most 4).
fn coordinate_index(name: &str, dim: usize) -> Option<usize> {
    if let Some(rest) = name.strip_prefix('x') {
        if !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()) {
            return rest.parse().ok();
        }
    }
    if dim <= 4 {
        let alias = match name {
            "x" => 1,
            "y" => 2,
            "z" => 3,
            "w" => 4,
            _ => return None,
        };
        return Some(alias);
    }
    None
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(v) => format!("number `{v}`"),
        Tok::Ident(s) => format!("identifier `{s}`"),
        Tok::Op(c) => format!("`{c}`"),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::Comma => "`,`".into(),
        Tok::End => "end of input".into(),
    }
}
