//! Closed-form scalar functions of `(s, t)` written as text.
//!
//! Family specifications carry their input functions as expressions such as
//! `exp(-t)*sqrt(s^2+1)`. An [`Expr`] evaluates to plain values, to bivariate
//! jets, or to univariate series in `t`, so every generated surface has exact
//! derivatives.
//!
//! Grammar (usual precedence, `^` right-associative and binding tighter than
//! unary minus):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := ('-' | '+') unary | power
//! power   := primary ('^' unary)?
//! primary := number | 's' | 't' | 'pi' | 'e' | func '(' expr ')' | '(' expr ')'
//! func    := sin | cos | tan | exp | ln | log | sqrt | sinh | cosh
//! ```

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::jet::{ScalarJet, Series, Taylor};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Ln,
    Sqrt,
    Sinh,
    Cosh,
}

#[derive(Clone, Debug, PartialEq)]
enum Node {
    Num(f64),
    S,
    T,
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

impl Node {
    fn uses(&self, var: &Node) -> bool {
        match self {
            Node::Num(_) => false,
            Node::S | Node::T => self == var,
            Node::Neg(a) | Node::Call(_, a) => a.uses(var),
            Node::Add(a, b)
            | Node::Sub(a, b)
            | Node::Mul(a, b)
            | Node::Div(a, b)
            | Node::Pow(a, b) => a.uses(var) || b.uses(var),
        }
    }

    fn eval<T: Taylor>(&self, s: &T, t: &T) -> Result<T> {
        Ok(match self {
            Node::Num(v) => s.constant_like(*v),
            Node::S => s.clone(),
            Node::T => t.clone(),
            Node::Neg(a) => -a.eval(s, t)?,
            Node::Add(a, b) => a.eval(s, t)? + b.eval(s, t)?,
            Node::Sub(a, b) => a.eval(s, t)? - b.eval(s, t)?,
            Node::Mul(a, b) => a.eval(s, t)? * b.eval(s, t)?,
            Node::Div(a, b) => a.eval(s, t)?.checked_div(&b.eval(s, t)?)?,
            Node::Pow(a, b) => {
                let base = a.eval(s, t)?;
                if !b.uses(&Node::S) && !b.uses(&Node::T) {
                    let p = b.eval(&0.0_f64, &0.0_f64)?;
                    if p.fract() == 0.0 && p.abs() <= 64.0 {
                        base.powi(p as i32)?
                    } else {
                        base.powf(p)?
                    }
                } else {
                    (b.eval(s, t)? * base.ln()?).exp()
                }
            }
            Node::Call(f, a) => {
                let u = a.eval(s, t)?;
                match f {
                    Func::Sin => u.sin(),
                    Func::Cos => u.cos(),
                    Func::Tan => u.sin().checked_div(&u.cos())?,
                    Func::Exp => u.exp(),
                    Func::Ln => u.ln()?,
                    Func::Sqrt => u.sqrt()?,
                    Func::Sinh => (u.exp() - (-u).exp()) * 0.5,
                    Func::Cosh => (u.exp() + (-u).exp()) * 0.5,
                }
            }
        })
    }
}

/// A parsed scalar expression in the variables `s` and `t`.
#[derive(Clone, Debug)]
pub struct Expr {
    src: String,
    root: Node,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.root == other.root
    }
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr> {
        let mut p = Parser {
            src,
            bytes: src.as_bytes(),
            pos: 0,
        };
        let root = p.expr()?;
        p.skip_ws();
        if p.pos != p.bytes.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(Expr {
            src: src.to_string(),
            root,
        })
    }

    pub fn constant(v: f64) -> Expr {
        Expr {
            src: format!("{v}"),
            root: Node::Num(v),
        }
    }

    pub fn as_str(&self) -> &str {
        &self.src
    }

    pub fn uses_s(&self) -> bool {
        self.root.uses(&Node::S)
    }

    pub fn uses_t(&self) -> bool {
        self.root.uses(&Node::T)
    }

    /// Plain value at `(s, t)`.
    pub fn eval(&self, s: f64, t: f64) -> Result<f64> {
        let v = self.root.eval(&s, &t)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite(format!("{} at ({s}, {t})", self.src)))
        }
    }

    /// Degree-4 jet at `(s, t)`.
    pub fn jet(&self, s: f64, t: f64) -> Result<ScalarJet> {
        let base = (s, t);
        let j = self
            .root
            .eval(&ScalarJet::var_s(base), &ScalarJet::var_t(base))?;
        if j.is_finite() {
            Ok(j)
        } else {
            Err(Error::NonFinite(format!(
                "jet of {} at ({s}, {t})",
                self.src
            )))
        }
    }

    /// Degree-8 series in `t`; the expression must not mention `s`.
    pub fn series(&self, t: f64) -> Result<Series> {
        if self.uses_s() {
            return Err(Error::ForbiddenVariable {
                expr: self.src.clone(),
                allowed: "t",
            });
        }
        let tv = Series::var(t);
        let r = self.root.eval(&tv.constant_like(0.0), &tv)?;
        if r.is_finite() {
            Ok(r)
        } else {
            Err(Error::NonFinite(format!(
                "series of {} at t = {t}",
                self.src
            )))
        }
    }

    /// Degree-8 series in `s`; the expression must not mention `t`.
    pub fn series_in_s(&self, s: f64) -> Result<Series> {
        if self.uses_t() {
            return Err(Error::ForbiddenVariable {
                expr: self.src.clone(),
                allowed: "s",
            });
        }
        let sv = Series::var(s);
        let r = self.root.eval(&sv, &sv.constant_like(0.0))?;
        if r.is_finite() {
            Ok(r)
        } else {
            Err(Error::NonFinite(format!(
                "series of {} at s = {s}",
                self.src
            )))
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.src)
    }
}

impl std::str::FromStr for Expr {
    type Err = Error;
    fn from_str(s: &str) -> Result<Expr> {
        Expr::parse(s)
    }
}

impl Serialize for Expr {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        ser.serialize_str(&self.src)
    }
}

impl<'de> Deserialize<'de> for Expr {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Expr, D::Error> {
        let s = String::deserialize(de)?;
        Expr::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// Plain numbers ride along as degree-0 "jets" so one evaluator serves all targets.
impl Taylor for f64 {
    fn value(&self) -> f64 {
        *self
    }

    fn constant_like(&self, v: f64) -> Self {
        v
    }

    fn degree(&self) -> usize {
        0
    }
}

struct Parser<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> Error {
        Error::Parse {
            expr: self.src.to_string(),
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = Node::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(b'-') {
                lhs = Node::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(b'*') {
                lhs = Node::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat(b'/') {
                lhs = Node::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Node> {
        if self.eat(b'-') {
            Ok(Node::Neg(Box::new(self.unary()?)))
        } else if self.eat(b'+') {
            self.unary()
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.primary()?;
        if self.eat(b'^') {
            Ok(Node::Pow(Box::new(base), Box::new(self.unary()?)))
        } else {
            Ok(base)
        }
    }

    fn primary(&mut self) -> Result<Node> {
        match self.peek() {
            None => Err(self.error("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.error("expected ')'"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_alphanumeric() {
                    self.pos += 1;
                }
                let name = &self.src[start..self.pos];
                let func = match name {
                    "s" => return Ok(Node::S),
                    "t" => return Ok(Node::T),
                    "pi" => return Ok(Node::Num(std::f64::consts::PI)),
                    "e" => return Ok(Node::Num(std::f64::consts::E)),
                    "sin" => Func::Sin,
                    "cos" => Func::Cos,
                    "tan" => Func::Tan,
                    "exp" => Func::Exp,
                    "ln" | "log" => Func::Ln,
                    "sqrt" => Func::Sqrt,
                    "sinh" => Func::Sinh,
                    "cosh" => Func::Cosh,
                    _ => {
                        self.pos = start;
                        return Err(self.error(&format!("unknown identifier {name:?}")));
                    }
                };
                if !self.eat(b'(') {
                    return Err(self.error("expected '(' after function name"));
                }
                let arg = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.error("expected ')'"));
                }
                Ok(Node::Call(func, Box::new(arg)))
            }
            Some(_) => Err(self.error("unexpected character")),
        }
    }

    fn number(&mut self) -> Result<Node> {
        let start = self.pos;
        let b = self.bytes;
        while self.pos < b.len() && (b[self.pos].is_ascii_digit() || b[self.pos] == b'.') {
            self.pos += 1;
        }
        if self.pos < b.len() && (b[self.pos] == b'e' || b[self.pos] == b'E') {
            let mut k = self.pos + 1;
            if k < b.len() && (b[k] == b'+' || b[k] == b'-') {
                k += 1;
            }
            if k < b.len() && b[k].is_ascii_digit() {
                while k < b.len() && b[k].is_ascii_digit() {
                    k += 1;
                }
                self.pos = k;
            }
        }
        self.src[start..self.pos]
            .parse::<f64>()
            .map(Node::Num)
            .map_err(|_| {
                self.pos = start;
                self.error("malformed number")
            })
    }
}
