//! Coordinate charts, metric fields, the built-in metric catalog and the
//! metric-spec file format.

mod catalog;
mod expr;
mod parse;
mod sample;

use std::fmt::Write as _;

use nalgebra::DMatrix;

pub use catalog::{catalog_metric, catalog_metric_in, CatalogEntry};
pub use expr::{Expr, Func};
pub use parse::{parse_expr, parse_metric_spec};
pub use sample::sample_points;

use crate::error::{Error, Result};
use crate::scalar::{Dual1, Real, Taylor2, MAX_DIM};

/// A point of the chart, `(x^1, ..., x^n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartPoint {
    coords: Vec<f64>,
}

impl ChartPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("chart point"));
        }
        Ok(Self { coords })
    }

    pub fn origin(n: usize) -> Self {
        Self { coords: vec![0.0; n] }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

impl From<&[f64]> for ChartPoint {
    fn from(c: &[f64]) -> Self {
        Self { coords: c.to_vec() }
    }
}

pub(crate) fn packed_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i <= j && j < n);
    i * n - i * (i + 1) / 2 + j
}

/// A Riemannian metric `g_{ij}(x)` on a coordinate box.
///
/// Only the upper triangle is stored; lookups of `g_{ji}` return the same
/// expression, so every evaluation is exactly symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricField {
    name: String,
    coord_names: Vec<String>,
    params: Vec<(String, f64)>,
    domain: Vec<(f64, f64)>,
    entries: Vec<Expr>,
}

impl MetricField {
    pub(crate) fn from_parts(
        name: String,
        coord_names: Vec<String>,
        params: Vec<(String, f64)>,
        domain: Vec<(f64, f64)>,
        entries: Vec<Expr>,
    ) -> Self {
        debug_assert_eq!(entries.len(), coord_names.len() * (coord_names.len() + 1) / 2);
        Self { name, coord_names, params, domain, entries }
    }

    /// Builds a field from an entry function `f(i, j)` queried for `i <= j`.
    pub fn from_entries(
        name: impl Into<String>,
        coord_names: Vec<String>,
        params: Vec<(String, f64)>,
        domain: Vec<(f64, f64)>,
        mut f: impl FnMut(usize, usize) -> Expr,
    ) -> Result<Self> {
        let n = coord_names.len();
        if n == 0 || n > MAX_DIM {
            return Err(Error::UnsupportedDimension(n));
        }
        if domain.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: domain.len() });
        }
        let mut entries = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in i..n {
                entries.push(f(i, j));
            }
        }
        Ok(Self::from_parts(name.into(), coord_names, params, domain, entries))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.coord_names.len()
    }

    pub fn coord_names(&self) -> &[String] {
        &self.coord_names
    }

    pub fn params(&self) -> &[(String, f64)] {
        &self.params
    }

    pub fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }

    /// Replaces the domain box.
    pub fn with_domain(mut self, domain: Vec<(f64, f64)>) -> Result<Self> {
        if domain.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: domain.len() });
        }
        self.domain = domain;
        Ok(self)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// The homothetic metric `k·g`.
    pub fn scaled(&self, k: f64) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::Config(format!("scale factor must be positive and finite, got {k}")));
        }
        let mut out = self.clone();
        for e in &mut out.entries {
            *e = Expr::num(k) * e.clone();
        }
        out.name = format!("{}*{k}", self.name);
        Ok(out)
    }

    /// The expression for `g_{ij}` (either index order).
    pub fn entry(&self, i: usize, j: usize) -> &Expr {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        &self.entries[packed_index(self.dim(), a, b)]
    }

    fn param_values(&self) -> Vec<f64> {
        self.params.iter().map(|(_, v)| *v).collect()
    }

    fn check_point_dim(&self, x: usize) -> Result<()> {
        if x != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x });
        }
        Ok(())
    }

    /// Evaluates `g_{ij}` at a point.
    pub fn eval(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.check_point_dim(x.len())?;
        let n = self.dim();
        let p = self.param_values();
        let mut g = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = self.entry(i, j).eval(x, &p)?;
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        Ok(g)
    }

    /// Evaluates the packed upper triangle over an arbitrary scalar type.
    pub fn eval_packed<T: Real>(&self, x: &[T]) -> Result<Vec<T>> {
        self.check_point_dim(x.len())?;
        let p = self.param_values();
        self.entries.iter().map(|e| e.eval(x, &p)).collect()
    }

    /// Evaluates the entries together with their first and second
    /// coordinate derivatives.
    pub fn eval_taylor(&self, x: &[f64]) -> Result<Vec<Taylor2>> {
        let seeds: Vec<Taylor2> = x.iter().enumerate().map(|(a, &v)| Taylor2::variable(v, a)).collect();
        self.eval_packed(&seeds)
    }

    /// Evaluates the packed entries with their first derivatives only.
    pub fn eval_dual(&self, x: &[f64]) -> Result<Vec<Dual1>> {
        let seeds: Vec<Dual1> = x.iter().enumerate().map(|(a, &v)| Dual1::variable(v, a)).collect();
        self.eval_packed(&seeds)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && x.iter().zip(&self.domain).all(|(v, (lo, hi))| v >= lo && v <= hi)
    }

    /// True when the metric is positive definite at `x`.
    pub fn is_positive_definite_at(&self, x: &[f64]) -> bool {
        self.eval(x).map(|g| g.cholesky().is_some()).unwrap_or(false)
    }

    /// Serialises the field back into the metric-spec grammar.
    pub fn to_spec_text(&self) -> String {
        let n = self.dim();
        let pnames: Vec<String> = self.params.iter().map(|(p, _)| p.clone()).collect();
        let mut s = String::new();
        let _ = writeln!(s, "name {}", self.name.replace(char::is_whitespace, "_"));
        let _ = writeln!(s, "dim {n}");
        let _ = writeln!(s, "coords {}", self.coord_names.join(" "));
        for (p, v) in &self.params {
            let _ = writeln!(s, "param {p} = {v:?}");
        }
        for i in 0..n {
            for j in i..n {
                let e = self.entry(i, j);
                if i != j && e.is_zero() {
                    continue;
                }
                let _ = writeln!(s, "g {i} {j} = {}", e.display(&self.coord_names, &pnames));
            }
        }
        for (a, (lo, hi)) in self.domain.iter().enumerate() {
            let _ = writeln!(s, "domain {a} {lo:?} {hi:?}");
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn packed_index_enumerates_upper_triangle() {
        for n in 1..=MAX_DIM {
            let mut k = 0;
            for i in 0..n {
                for j in i..n {
                    assert_eq!(packed_index(n, i, j), k);
                    k += 1;
                }
            }
        }
    }

    #[test]
    fn chart_point_rejects_nan() {
        assert!(ChartPoint::new(vec![0.0, f64::NAN]).is_err());
    }

    #[test]
    fn spec_text_round_trip_on_thurston() {
        let m = catalog_metric("thurston", &[("m", -0.25), ("l", 1.0)]).unwrap();
        let again = parse_metric_spec(&m.to_spec_text()).unwrap();
        assert_eq!(again.domain(), m.domain());
        for x in [[0.1, -0.3, 0.2], [0.5, 0.5, -0.7], [-0.9, 0.2, 0.0]] {
            assert_eq!(m.eval(&x).unwrap(), again.eval(&x).unwrap());
        }
    }
}
