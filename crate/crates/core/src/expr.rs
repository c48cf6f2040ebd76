//! Small arithmetic expression language for load functions.
//!
//! Grammar: numbers, the variables `t x1 x2 y1 y2 y3 z`, the constant `pi`,
//! `+ - * / ^`, parentheses and the functions `sin`, `cos`, `exp`.

use std::fmt;

use crate::error::{Error, Result};

/// Variables in evaluation order.
pub const VARIABLES: [&str; 7] = ["t", "x1", "x2", "y1", "y2", "y3", "z"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    T = 0,
    X1 = 1,
    X2 = 2,
    Y1 = 3,
    Y2 = 4,
    Y3 = 5,
    Z = 6,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    Var(usize),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

/// Parsed expression; keeps its source text for echoing.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    source: String,
    root: Node,
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

impl Expr {
    pub fn parse(source: &str) -> Result<Self> {
        let mut p = Parser { src: source.as_bytes(), pos: 0 };
        let root = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(Expr { source: source.trim().to_string(), root })
    }

    pub fn zero() -> Self {
        Expr { source: "0".into(), root: Node::Num(0.0) }
    }

    pub fn constant(v: f64) -> Self {
        Expr { source: format!("{v:?}"), root: Node::Num(v) }
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Evaluates with variables in the order of [`VARIABLES`].
    pub fn eval(&self, vars: &[f64; 7]) -> f64 {
        eval(&self.root, vars)
    }

    pub fn uses(&self, v: Var) -> bool {
        uses(&self.root, v as usize)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.root, Node::Num(x) if x == 0.0)
    }

    /// Symbolic partial derivative.
    pub fn derivative(&self, v: Var) -> Expr {
        let root = deriv(&self.root, v as usize);
        Expr { source: format!("d/d{}({})", VARIABLES[v as usize], self.source), root }
    }
}

fn eval(n: &Node, v: &[f64; 7]) -> f64 {
    match n {
        Node::Num(x) => *x,
        Node::Var(i) => v[*i],
        Node::Neg(a) => -eval(a, v),
        Node::Add(a, b) => eval(a, v) + eval(b, v),
        Node::Sub(a, b) => eval(a, v) - eval(b, v),
        Node::Mul(a, b) => eval(a, v) * eval(b, v),
        Node::Div(a, b) => eval(a, v) / eval(b, v),
        Node::Pow(a, b) => {
            let base = eval(a, v);
            match b.as_ref() {
                Node::Num(e) if e.fract() == 0.0 && e.abs() < 64.0 => base.powi(*e as i32),
                _ => base.powf(eval(b, v)),
            }
        }
        Node::Call(f, a) => {
            let x = eval(a, v);
            match f {
                Func::Sin => x.sin(),
                Func::Cos => x.cos(),
                Func::Exp => x.exp(),
            }
        }
    }
}

fn uses(n: &Node, var: usize) -> bool {
    match n {
        Node::Num(_) => false,
        Node::Var(i) => *i == var,
        Node::Neg(a) | Node::Call(_, a) => uses(a, var),
        Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) | Node::Pow(a, b) => {
            uses(a, var) || uses(b, var)
        }
    }
}

fn num(x: f64) -> Box<Node> {
    Box::new(Node::Num(x))
}

fn b(n: Node) -> Box<Node> {
    Box::new(n)
}

fn deriv(n: &Node, var: usize) -> Node {
    if !uses(n, var) {
        return Node::Num(0.0);
    }
    match n {
        Node::Num(_) => Node::Num(0.0),
        Node::Var(i) => Node::Num(if *i == var { 1.0 } else { 0.0 }),
        Node::Neg(a) => Node::Neg(b(deriv(a, var))),
        Node::Add(x, y) => Node::Add(b(deriv(x, var)), b(deriv(y, var))),
        Node::Sub(x, y) => Node::Sub(b(deriv(x, var)), b(deriv(y, var))),
        Node::Mul(x, y) => Node::Add(
            b(Node::Mul(b(deriv(x, var)), y.clone())),
            b(Node::Mul(x.clone(), b(deriv(y, var)))),
        ),
        Node::Div(x, y) => Node::Div(
            b(Node::Sub(
                b(Node::Mul(b(deriv(x, var)), y.clone())),
                b(Node::Mul(x.clone(), b(deriv(y, var)))),
            )),
            b(Node::Mul(y.clone(), y.clone())),
        ),
        // Exponents are constant (enforced by the parser): d(x^c) = c x^(c-1) x'.
        Node::Pow(x, y) => Node::Mul(
            b(Node::Mul(y.clone(), b(Node::Pow(x.clone(), b(Node::Sub(y.clone(), num(1.0))))))),
            b(deriv(x, var)),
        ),
        Node::Call(f, a) => {
            let inner = deriv(a, var);
            let outer = match f {
                Func::Sin => Node::Call(Func::Cos, a.clone()),
                Func::Cos => Node::Neg(b(Node::Call(Func::Sin, a.clone()))),
                Func::Exp => Node::Call(Func::Exp, a.clone()),
            };
            Node::Mul(b(outer), b(inner))
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> Error {
        Error::Expression { column: self.pos + 1, message: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        while let Some(c) = self.peek() {
            match c {
                b'+' => {
                    self.pos += 1;
                    lhs = Node::Add(b(lhs), b(self.term()?));
                }
                b'-' => {
                    self.pos += 1;
                    lhs = Node::Sub(b(lhs), b(self.term()?));
                }
                _ => break,
            }
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        while let Some(c) = self.peek() {
            match c {
                b'*' => {
                    self.pos += 1;
                    lhs = Node::Mul(b(lhs), b(self.unary()?));
                }
                b'/' => {
                    self.pos += 1;
                    lhs = Node::Div(b(lhs), b(self.unary()?));
                }
                _ => break,
            }
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(Node::Neg(b(self.unary()?)))
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.primary()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let start = self.pos;
            let exp = self.unary()?;
            if exp_uses_variable(&exp) {
                self.pos = start;
                return Err(self.error("exponents must be constant"));
            }
            return Ok(Node::Pow(b(base), b(exp)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Node> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.error("expected ')'"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
                let func = match name {
                    "sin" => Some(Func::Sin),
                    "cos" => Some(Func::Cos),
                    "exp" => Some(Func::Exp),
                    _ => None,
                };
                if let Some(f) = func {
                    if self.peek() != Some(b'(') {
                        return Err(self.error("expected '(' after function name"));
                    }
                    self.pos += 1;
                    let arg = self.expr()?;
                    if self.peek() != Some(b')') {
                        return Err(self.error("expected ')'"));
                    }
                    self.pos += 1;
                    return Ok(Node::Call(f, b(arg)));
                }
                if name == "pi" {
                    return Ok(Node::Num(std::f64::consts::PI));
                }
                match VARIABLES.iter().position(|v| *v == name) {
                    Some(i) => Ok(Node::Var(i)),
                    None => {
                        self.pos = start;
                        Err(self.error(&format!("unknown identifier '{name}'")))
                    }
                }
            }
            Some(_) => Err(self.error("unexpected character")),
            None => Err(self.error("unexpected end of expression")),
        }
    }

    fn number(&mut self) -> Result<Node> {
        let start = self.pos;
        let s = self.src;
        while self.pos < s.len() && (s[self.pos].is_ascii_digit() || s[self.pos] == b'.') {
            self.pos += 1;
        }
        if self.pos < s.len() && (s[self.pos] == b'e' || s[self.pos] == b'E') {
            let save = self.pos;
            self.pos += 1;
            if self.pos < s.len() && (s[self.pos] == b'+' || s[self.pos] == b'-') {
                self.pos += 1;
            }
            if self.pos < s.len() && s[self.pos].is_ascii_digit() {
                while self.pos < s.len() && s[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            } else {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&s[start..self.pos]).unwrap_or("");
        text.parse::<f64>().map(Node::Num).map_err(|_| {
            self.pos = start;
            self.error("malformed number")
        })
    }
}

fn exp_uses_variable(n: &Node) -> bool {
    (0..VARIABLES.len()).any(|v| uses(n, v))
}
