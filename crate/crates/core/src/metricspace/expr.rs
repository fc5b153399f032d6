//! Scalar expression trees for metric components.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Sinh,
    Cosh,
    Sqrt,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Coord(usize),
    Param(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn num(v: f64) -> Expr {
        Expr::Num(v)
    }

    pub fn coord(i: usize) -> Expr {
        Expr::Coord(i)
    }

    pub fn param(i: usize) -> Expr {
        Expr::Param(i)
    }

    pub fn powi(self, k: i32) -> Expr {
        Expr::Pow(Box::new(self), k)
    }

    pub fn call(f: Func, arg: Expr) -> Expr {
        Expr::Call(f, Box::new(arg))
    }

    pub fn exp(self) -> Expr {
        Expr::call(Func::Exp, self)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Num(v) if *v == 0.0)
    }

    /// Largest coordinate index referenced, if any.
    pub fn max_coord(&self) -> Option<usize> {
        match self {
            Expr::Num(_) | Expr::Param(_) => None,
            Expr::Coord(i) => Some(*i),
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => a.max_coord(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                match (a.max_coord(), b.max_coord()) {
                    (Some(x), Some(y)) => Some(x.max(y)),
                    (x, y) => x.or(y),
                }
            }
        }
    }

    /// Evaluates the expression with the given coordinate values and
    /// parameter values.
    pub fn eval<T: Real>(&self, coords: &[T], params: &[f64]) -> Result<T> {
        let out = match self {
            Expr::Num(v) => T::constant(*v),
            Expr::Coord(i) => coords
                .get(*i)
                .cloned()
                .ok_or(Error::DimensionMismatch { expected: *i + 1, got: coords.len() })?,
            Expr::Param(i) => T::constant(
                *params
                    .get(*i)
                    .ok_or_else(|| Error::Domain(format!("unbound parameter #{i}")))?,
            ),
            Expr::Neg(a) => -a.eval(coords, params)?,
            Expr::Add(a, b) => a.eval(coords, params)? + b.eval(coords, params)?,
            Expr::Sub(a, b) => a.eval(coords, params)? - b.eval(coords, params)?,
            Expr::Mul(a, b) => a.eval(coords, params)? * b.eval(coords, params)?,
            Expr::Div(a, b) => {
                let den = b.eval(coords, params)?;
                if den.value() == 0.0 {
                    return Err(Error::Domain("division by zero".into()));
                }
                a.eval(coords, params)? * den.recip()
            }
            Expr::Pow(a, k) => {
                let base = a.eval(coords, params)?;
                if *k < 0 && base.value() == 0.0 {
                    return Err(Error::Domain("negative power of zero".into()));
                }
                base.powi(*k)
            }
            Expr::Call(f, a) => {
                let u = a.eval(coords, params)?;
                match f {
                    Func::Exp => u.exp(),
                    Func::Log => {
                        if u.value() <= 0.0 {
                            return Err(Error::Domain(format!("log of {}", u.value())));
                        }
                        u.ln()
                    }
                    Func::Sin => u.sin(),
                    Func::Cos => u.cos(),
                    Func::Sinh => u.sinh(),
                    Func::Cosh => u.cosh(),
                    Func::Sqrt => {
                        if u.value() <= 0.0 {
                            return Err(Error::Domain(format!("sqrt of {}", u.value())));
                        }
                        u.sqrt()
                    }
                }
            }
        };
        if !out.is_finite() {
            return Err(Error::NonFinite("expression value"));
        }
        Ok(out)
    }

    /// Renders the expression in the metric-spec grammar.
    pub fn display<'a>(&'a self, coords: &'a [String], params: &'a [String]) -> ExprDisplay<'a> {
        ExprDisplay { expr: self, coords, params }
    }
}

pub struct ExprDisplay<'a> {
    expr: &'a Expr,
    coords: &'a [String],
    params: &'a [String],
}

impl ExprDisplay<'_> {
    fn sub<'b>(&'b self, e: &'b Expr) -> ExprDisplay<'b> {
        ExprDisplay { expr: e, coords: self.coords, params: self.params }
    }
}

// Fully parenthesised output; the parser does not need to agree on
// precedence for the round trip to be exact.
impl fmt::Display for ExprDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.expr {
            Expr::Num(v) => {
                if *v < 0.0 {
                    write!(f, "(-{:?})", -v)
                } else {
                    write!(f, "{v:?}")
                }
            }
            Expr::Coord(i) => write!(f, "{}", self.coords[*i]),
            Expr::Param(i) => write!(f, "{}", self.params[*i]),
            Expr::Neg(a) => write!(f, "(-{})", self.sub(a)),
            Expr::Add(a, b) => write!(f, "({} + {})", self.sub(a), self.sub(b)),
            Expr::Sub(a, b) => write!(f, "({} - {})", self.sub(a), self.sub(b)),
            Expr::Mul(a, b) => write!(f, "({} * {})", self.sub(a), self.sub(b)),
            Expr::Div(a, b) => write!(f, "({} / {})", self.sub(a), self.sub(b)),
            Expr::Pow(a, k) => {
                if *k < 0 {
                    write!(f, "({}^({k}))", self.sub(a))
                } else {
                    write!(f, "({}^{k})", self.sub(a))
                }
            }
            Expr::Call(func, a) => write!(f, "{}({})", func.name(), self.sub(a)),
        }
    }
}

impl Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::Add(Box::new(self), Box::new(rhs))
    }
}

impl Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::Sub(Box::new(self), Box::new(rhs))
    }
}

impl Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::Mul(Box::new(self), Box::new(rhs))
    }
}

impl Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::Div(Box::new(self), Box::new(rhs))
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}
