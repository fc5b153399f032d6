//! Scalar types that metric expressions can be evaluated over.
//!
//! Expressions are evaluated either over plain `f64` or over [`Taylor2`], a
//! second-order truncated Taylor polynomial in up to [`MAX_DIM`] variables.
//! Evaluating a metric entry over `Taylor2` seeds yields the value, the
//! gradient and the Hessian of that entry in one pass, with no truncation
//! error.

use std::ops::{Add, Mul, Neg, Sub};

/// Largest chart dimension supported by the jet arithmetic.
pub const MAX_DIM: usize = 6;

/// Arithmetic needed by the expression evaluator.
///
/// Domain checks (log of a non-positive number, division by zero, ...) are
/// done by the caller on [`Real::value`]; the methods here assume a valid
/// argument.
pub trait Real:
    Clone + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    fn constant(v: f64) -> Self;
    fn value(&self) -> f64;
    fn recip(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn sinh(self) -> Self;
    fn cosh(self) -> Self;
    fn sqrt(self) -> Self;
    fn powi(self, k: i32) -> Self;
    /// True when every stored component is finite.
    fn is_finite(&self) -> bool;
}

impl Real for f64 {
    fn constant(v: f64) -> Self {
        v
    }
    fn value(&self) -> f64 {
        *self
    }
    fn recip(self) -> Self {
        1.0 / self
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn sinh(self) -> Self {
        f64::sinh(self)
    }
    fn cosh(self) -> Self {
        f64::cosh(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn powi(self, k: i32) -> Self {
        f64::powi(self, k)
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
}

/// Second-order truncated Taylor polynomial.
///
/// Stores `f`, `∂_a f` and `∂_a ∂_b f` at a point. Unused trailing variables
/// (beyond the chart dimension) simply carry zeros.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Taylor2 {
    pub value: f64,
    pub grad: [f64; MAX_DIM],
    pub hess: [[f64; MAX_DIM]; MAX_DIM],
}

impl Taylor2 {
    pub fn constant(value: f64) -> Self {
        Self {
            value,
            grad: [0.0; MAX_DIM],
            hess: [[0.0; MAX_DIM]; MAX_DIM],
        }
    }

    /// The independent variable `x^axis` evaluated at `value`.
    pub fn variable(value: f64, axis: usize) -> Self {
        let mut t = Self::constant(value);
        t.grad[axis] = 1.0;
        t
    }

    /// Applies a scalar function given `(f(u), f'(u), f''(u))`.
    fn chain(self, f0: f64, f1: f64, f2: f64) -> Self {
        let mut out = Self::constant(f0);
        for a in 0..MAX_DIM {
            out.grad[a] = f1 * self.grad[a];
            for b in 0..MAX_DIM {
                out.hess[a][b] = f1 * self.hess[a][b] + f2 * self.grad[a] * self.grad[b];
            }
        }
        out
    }
}

impl Add for Taylor2 {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        self.value += rhs.value;
        for a in 0..MAX_DIM {
            self.grad[a] += rhs.grad[a];
            for b in 0..MAX_DIM {
                self.hess[a][b] += rhs.hess[a][b];
            }
        }
        self
    }
}

impl Sub for Taylor2 {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Neg for Taylor2 {
    type Output = Self;
    fn neg(mut self) -> Self {
        self.value = -self.value;
        for a in 0..MAX_DIM {
            self.grad[a] = -self.grad[a];
            for b in 0..MAX_DIM {
                self.hess[a][b] = -self.hess[a][b];
            }
        }
        self
    }
}

impl Mul for Taylor2 {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut out = Self::constant(self.value * rhs.value);
        for a in 0..MAX_DIM {
            out.grad[a] = self.grad[a] * rhs.value + self.value * rhs.grad[a];
            for b in 0..MAX_DIM {
                out.hess[a][b] = self.hess[a][b] * rhs.value
                    + self.grad[a] * rhs.grad[b]
                    + rhs.grad[a] * self.grad[b]
                    + self.value * rhs.hess[a][b];
            }
        }
        out
    }
}

impl Real for Taylor2 {
    fn constant(v: f64) -> Self {
        Taylor2::constant(v)
    }
    fn value(&self) -> f64 {
        self.value
    }
    fn recip(self) -> Self {
        let u = self.value;
        self.chain(1.0 / u, -1.0 / (u * u), 2.0 / (u * u * u))
    }
    fn exp(self) -> Self {
        let e = self.value.exp();
        self.chain(e, e, e)
    }
    fn ln(self) -> Self {
        let u = self.value;
        self.chain(u.ln(), 1.0 / u, -1.0 / (u * u))
    }
    fn sin(self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.chain(s, c, -s)
    }
    fn cos(self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.chain(c, -s, -c)
    }
    fn sinh(self) -> Self {
        let (s, c) = (self.value.sinh(), self.value.cosh());
        self.chain(s, c, s)
    }
    fn cosh(self) -> Self {
        let (s, c) = (self.value.sinh(), self.value.cosh());
        self.chain(c, s, c)
    }
    fn sqrt(self) -> Self {
        let r = self.value.sqrt();
        self.chain(r, 0.5 / r, -0.25 / (r * r * r))
    }
    fn powi(self, k: i32) -> Self {
        let u = self.value;
        let kf = k as f64;
        let f0 = u.powi(k);
        let f1 = if k == 0 { 0.0 } else { kf * u.powi(k - 1) };
        let f2 = if k == 0 || k == 1 {
            0.0
        } else {
            kf * (kf - 1.0) * u.powi(k - 2)
        };
        self.chain(f0, f1, f2)
    }
    fn is_finite(&self) -> bool {
        self.value.is_finite()
            && self.grad.iter().all(|g| g.is_finite())
            && self.hess.iter().flatten().all(|h| h.is_finite())
    }
}

/// First-order dual number: value and gradient only. Used where the
/// Christoffel symbols are needed at many points (geodesic integration).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual1 {
    pub value: f64,
    pub grad: [f64; MAX_DIM],
}

impl Dual1 {
    pub fn constant(value: f64) -> Self {
        Self { value, grad: [0.0; MAX_DIM] }
    }

    pub fn variable(value: f64, axis: usize) -> Self {
        let mut d = Self::constant(value);
        d.grad[axis] = 1.0;
        d
    }

    fn chain(self, f0: f64, f1: f64) -> Self {
        Self { value: f0, grad: self.grad.map(|g| f1 * g) }
    }
}

impl Add for Dual1 {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        self.value += rhs.value;
        for (a, b) in self.grad.iter_mut().zip(rhs.grad) {
            *a += b;
        }
        self
    }
}

impl Sub for Dual1 {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Neg for Dual1 {
    type Output = Self;
    fn neg(self) -> Self {
        Self { value: -self.value, grad: self.grad.map(|g| -g) }
    }
}

impl Mul for Dual1 {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut grad = [0.0; MAX_DIM];
        for (a, g) in grad.iter_mut().enumerate() {
            *g = self.grad[a] * rhs.value + self.value * rhs.grad[a];
        }
        Self { value: self.value * rhs.value, grad }
    }
}

impl Real for Dual1 {
    fn constant(v: f64) -> Self {
        Dual1::constant(v)
    }
    fn value(&self) -> f64 {
        self.value
    }
    fn recip(self) -> Self {
        let u = self.value;
        self.chain(1.0 / u, -1.0 / (u * u))
    }
    fn exp(self) -> Self {
        let e = self.value.exp();
        self.chain(e, e)
    }
    fn ln(self) -> Self {
        self.chain(self.value.ln(), 1.0 / self.value)
    }
    fn sin(self) -> Self {
        self.chain(self.value.sin(), self.value.cos())
    }
    fn cos(self) -> Self {
        self.chain(self.value.cos(), -self.value.sin())
    }
    fn sinh(self) -> Self {
        self.chain(self.value.sinh(), self.value.cosh())
    }
    fn cosh(self) -> Self {
        self.chain(self.value.cosh(), self.value.sinh())
    }
    fn sqrt(self) -> Self {
        let r = self.value.sqrt();
        self.chain(r, 0.5 / r)
    }
    fn powi(self, k: i32) -> Self {
        let u = self.value;
        let f1 = if k == 0 { 0.0 } else { k as f64 * u.powi(k - 1) };
        self.chain(u.powi(k), f1)
    }
    fn is_finite(&self) -> bool {
        self.value.is_finite() && self.grad.iter().all(|g| g.is_finite())
    }
}
