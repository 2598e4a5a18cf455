//! Small arithmetic expression grammar for metric coefficients.
//!
//! Grammar: `+ - * /`, unary minus, `^` with a numeric exponent, the
//! functions `sin cos exp sqrt`, the constant `pi`, float literals and
//! coordinates `x0, x1, ...` (aliases `x y z w` for the first four).
//!
//! Expressions are immutable trees shared through `Arc`; the conversion
//! operations build derived coefficients by structural composition, with
//! only constant folding applied (no symbolic simplification).

use crate::num::Real;
use crate::{Error, Result};
use std::fmt;
use std::sync::Arc;

pub type Ex = Arc<Expr>;

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Coord(usize),
    Add(Ex, Ex),
    Sub(Ex, Ex),
    Mul(Ex, Ex),
    Div(Ex, Ex),
    Neg(Ex),
    Powi(Ex, i32),
    Powf(Ex, f64),
    Sin(Ex),
    Cos(Ex),
    Exp(Ex),
    Sqrt(Ex),
}

impl Expr {
    pub fn eval<T: Real>(&self, x: &[T]) -> T {
        match self {
            Expr::Const(c) => T::from_f64(*c),
            Expr::Coord(i) => x[*i],
            Expr::Add(a, b) => a.eval(x) + b.eval(x),
            Expr::Sub(a, b) => a.eval(x) - b.eval(x),
            Expr::Mul(a, b) => a.eval(x) * b.eval(x),
            Expr::Div(a, b) => a.eval(x) / b.eval(x),
            Expr::Neg(a) => -a.eval(x),
            Expr::Powi(a, n) => a.eval(x).powi(*n),
            Expr::Powf(a, e) => a.eval(x).powf(*e),
            Expr::Sin(a) => a.eval(x).sin(),
            Expr::Cos(a) => a.eval(x).cos(),
            Expr::Exp(a) => a.eval(x).exp(),
            Expr::Sqrt(a) => a.eval(x).sqrt(),
        }
    }

    /// Largest coordinate index mentioned, if any.
    pub fn max_coord(&self) -> Option<usize> {
        match self {
            Expr::Const(_) => None,
            Expr::Coord(i) => Some(*i),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                match (a.max_coord(), b.max_coord()) {
                    (Some(x), Some(y)) => Some(x.max(y)),
                    (x, y) => x.or(y),
                }
            }
            Expr::Neg(a) | Expr::Powi(a, _) | Expr::Powf(a, _) => a.max_coord(),
            Expr::Sin(a) | Expr::Cos(a) | Expr::Exp(a) | Expr::Sqrt(a) => a.max_coord(),
        }
    }

    pub fn as_const(&self) -> Option<f64> {
        match self {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }
}

// --- constructors with constant folding ------------------------------------

pub fn cst(c: f64) -> Ex {
    Arc::new(Expr::Const(c))
}

pub fn coord(i: usize) -> Ex {
    Arc::new(Expr::Coord(i))
}

pub fn add(a: Ex, b: Ex) -> Ex {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => cst(x + y),
        (Some(0.0), _) => b,
        (_, Some(0.0)) => a,
        _ => Arc::new(Expr::Add(a, b)),
    }
}

pub fn sub(a: Ex, b: Ex) -> Ex {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => cst(x - y),
        (_, Some(0.0)) => a,
        (Some(0.0), _) => neg(b),
        _ => Arc::new(Expr::Sub(a, b)),
    }
}

pub fn mul(a: Ex, b: Ex) -> Ex {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => cst(x * y),
        (Some(0.0), _) | (_, Some(0.0)) => cst(0.0),
        (Some(1.0), _) => b,
        (_, Some(1.0)) => a,
        _ => Arc::new(Expr::Mul(a, b)),
    }
}

pub fn div(a: Ex, b: Ex) -> Ex {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => cst(x / y),
        (Some(0.0), _) => cst(0.0),
        (_, Some(1.0)) => a,
        _ => Arc::new(Expr::Div(a, b)),
    }
}

pub fn neg(a: Ex) -> Ex {
    match &*a {
        Expr::Const(c) => cst(-c),
        Expr::Neg(inner) => inner.clone(),
        _ => Arc::new(Expr::Neg(a)),
    }
}

pub fn powi(a: Ex, n: i32) -> Ex {
    match (a.as_const(), n) {
        (Some(x), _) => cst(x.powi(n)),
        (_, 1) => a,
        _ => Arc::new(Expr::Powi(a, n)),
    }
}

pub fn sqrt(a: Ex) -> Ex {
    match a.as_const() {
        Some(x) => cst(x.sqrt()),
        None => Arc::new(Expr::Sqrt(a)),
    }
}

// --- parser -----------------------------------------------------------------

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    dim: usize,
}

/// Parse a coefficient expression for a chart of dimension `dim`.
pub fn parse(src: &str, dim: usize) -> Result<Ex> {
    let mut p = Parser { src: src.as_bytes(), pos: 0, dim };
    let e = p.expr(0)?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(Error::config(format!(
            "trailing input at byte {} in expression `{}`",
            p.pos, src
        )));
    }
    Ok(e)
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn err(&self, msg: &str) -> Error {
        Error::config(format!("expression parse error at byte {}: {}", self.pos, msg))
    }

    fn expr(&mut self, min_bp: u8) -> Result<Ex> {
        let mut lhs = self.atom()?;
        loop {
            let op = match self.peek() {
                Some(c @ (b'+' | b'-' | b'*' | b'/' | b'^')) => c,
                _ => break,
            };
            let (lbp, rbp) = match op {
                b'+' | b'-' => (1, 2),
                b'*' | b'/' => (3, 4),
                b'^' => (6, 5), // right associative
                _ => unreachable!(),
            };
            if lbp < min_bp {
                break;
            }
            self.pos += 1;
            if op == b'^' {
                // exponent must be a (possibly negated) numeric literal
                let expo = self.exponent_literal()?;
                lhs = if expo.fract() == 0.0 && expo.abs() < 64.0 {
                    powi(lhs, expo as i32)
                } else {
                    Arc::new(Expr::Powf(lhs, expo))
                };
                continue;
            }
            let rhs = self.expr(rbp)?;
            lhs = match op {
                b'+' => add(lhs, rhs),
                b'-' => sub(lhs, rhs),
                b'*' => mul(lhs, rhs),
                b'/' => div(lhs, rhs),
                _ => unreachable!(),
            };
        }
        Ok(lhs)
    }

    fn exponent_literal(&mut self) -> Result<f64> {
        let mut sign = 1.0;
        if self.peek() == Some(b'-') {
            self.pos += 1;
            sign = -1.0;
        }
        match self.peek() {
            Some(c) if c.is_ascii_digit() || c == b'.' => Ok(sign * self.number()?),
            Some(b'(') => {
                self.pos += 1;
                let v = self.exponent_literal()?;
                if self.peek() == Some(b')') {
                    self.pos += 1;
                    Ok(sign * v)
                } else {
                    Err(self.err("expected `)` after exponent"))
                }
            }
            _ => Err(self.err("exponent must be a numeric literal")),
        }
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() {
            let c = self.src[self.pos];
            if c.is_ascii_digit() || c == b'.' {
                self.pos += 1;
            } else if (c == b'e' || c == b'E')
                && self.pos > start
                && self
                    .src
                    .get(self.pos + 1)
                    .is_some_and(|&n| n.is_ascii_digit() || n == b'+' || n == b'-')
            {
                self.pos += 2;
            } else {
                break;
            }
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .ok()
            .and_then(|s| s.parse::<f64>().ok())
            .ok_or_else(|| self.err("bad numeric literal"))
    }

    fn ident(&mut self) -> String {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }

    fn atom(&mut self) -> Result<Ex> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr(0)?;
                if self.peek() == Some(b')') {
                    self.pos += 1;
                    Ok(e)
                } else {
                    Err(self.err("expected `)`"))
                }
            }
            Some(b'-') => {
                self.pos += 1;
                Ok(neg(self.expr(5)?))
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => Ok(cst(self.number()?)),
            Some(c) if c.is_ascii_alphabetic() => {
                let name = self.ident();
                match name.as_str() {
                    "sin" | "cos" | "exp" | "sqrt" => {
                        if self.peek() != Some(b'(') {
                            return Err(self.err("expected `(` after function name"));
                        }
                        self.pos += 1;
                        let arg = self.expr(0)?;
                        if self.peek() != Some(b')') {
                            return Err(self.err("expected `)` after function argument"));
                        }
                        self.pos += 1;
                        Ok(match name.as_str() {
                            "sin" => Arc::new(Expr::Sin(arg)),
                            "cos" => Arc::new(Expr::Cos(arg)),
                            "exp" => Arc::new(Expr::Exp(arg)),
                            _ => sqrt(arg),
                        })
                    }
                    "pi" => Ok(cst(std::f64::consts::PI)),
                    _ => {
                        let idx = match name.as_str() {
                            "x" => Some(0),
                            "y" => Some(1),
                            "z" => Some(2),
                            "w" => Some(3),
                            _ => name
                                .strip_prefix('x')
                                .and_then(|d| d.parse::<usize>().ok()),
                        };
                        match idx {
                            Some(i) if i < self.dim => Ok(coord(i)),
                            Some(i) => Err(self.err(&format!(
                                "coordinate x{i} out of range for dimension {}",
                                self.dim
                            ))),
                            None => Err(self.err(&format!("unknown identifier `{name}`"))),
                        }
                    }
                }
            }
            _ => Err(self.err("expected expression")),
        }
    }
}

// --- display ----------------------------------------------------------------

impl Expr {
    fn prec(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(..) => 3,
            Expr::Powi(..) | Expr::Powf(..) => 4,
            _ => 5,
        }
    }

    fn fmt_child(&self, child: &Expr, f: &mut fmt::Formatter<'_>, tie: bool) -> fmt::Result {
        let need = child.prec() < self.prec() || (tie && child.prec() == self.prec());
        if need {
            write!(f, "({child})")
        } else {
            write!(f, "{child}")
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => {
                if *c < 0.0 {
                    write!(f, "({c})")
                } else {
                    write!(f, "{c}")
                }
            }
            Expr::Coord(i) => write!(f, "x{i}"),
            Expr::Add(a, b) => {
                self.fmt_child(a, f, false)?;
                write!(f, " + ")?;
                self.fmt_child(b, f, false)
            }
            Expr::Sub(a, b) => {
                self.fmt_child(a, f, false)?;
                write!(f, " - ")?;
                self.fmt_child(b, f, true)
            }
            Expr::Mul(a, b) => {
                self.fmt_child(a, f, false)?;
                write!(f, "*")?;
                self.fmt_child(b, f, false)
            }
            Expr::Div(a, b) => {
                self.fmt_child(a, f, false)?;
                write!(f, "/")?;
                self.fmt_child(b, f, true)
            }
            Expr::Neg(a) => {
                write!(f, "-")?;
                self.fmt_child(a, f, true)
            }
            Expr::Powi(a, n) => {
                self.fmt_child(a, f, true)?;
                if *n < 0 {
                    write!(f, "^({n})")
                } else {
                    write!(f, "^{n}")
                }
            }
            Expr::Powf(a, e) => {
                self.fmt_child(a, f, true)?;
                if *e < 0.0 {
                    write!(f, "^({e})")
                } else {
                    write!(f, "^{e}")
                }
            }
            Expr::Sin(a) => write!(f, "sin({a})"),
            Expr::Cos(a) => write!(f, "cos({a})"),
            Expr::Exp(a) => write!(f, "exp({a})"),
            Expr::Sqrt(a) => write!(f, "sqrt({a})"),
        }
    }
}
