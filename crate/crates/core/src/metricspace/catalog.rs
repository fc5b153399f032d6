//! Built-in metrics: Euclidean space, the conformally flat space-form
//! model, the two-parameter Thurston family and Sol.

use super::expr::Expr;
use super::MetricField;
use crate::error::{Error, Result};
use crate::scalar::MAX_DIM;

/// A catalog entry with its parameters resolved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CatalogEntry {
    Euclidean { dim: usize },
    /// `ds² = {1 + (c/4)Σ(x^j)²}^{-2} Σ(dx^i)²`
    SpaceForm { dim: usize, c: f64 },
    /// `ds² = (dx²+dy²)/D² + [dz + (l/2)(y dx − x dy)/D]²`, `D = 1 + m(x²+y²)`
    Thurston { m: f64, l: f64 },
    /// `ds² = e^{2z}dx² + e^{-2z}dy² + dz²`
    Sol,
}

impl CatalogEntry {
    /// Resolves a catalog name plus named parameters.
    ///
    /// Recognised names: `euclidean` (`dim`, default 3), `space_form`
    /// (`dim` default 3, `c` default 1), `thurston` (`m`, `l`), `sol`,
    /// `product_s2xe1`, `product_h2xe1`.
    pub fn resolve(name: &str, params: &[(&str, f64)]) -> Result<Self> {
        let get = |key: &str| params.iter().find(|(k, _)| *k == key).map(|(_, v)| *v);
        let bad = |reason: &str| Error::InvalidParams { name: name.to_string(), reason: reason.into() };
        let allowed: &[&str] = match name {
            "euclidean" => &["dim"],
            "space_form" => &["dim", "c"],
            "thurston" => &["m", "l"],
            "sol" | "product_s2xe1" | "product_h2xe1" => &[],
            other => return Err(Error::UnknownMetric(other.to_string())),
        };
        if let Some((k, _)) = params.iter().find(|(k, _)| !allowed.contains(k)) {
            return Err(bad(&format!("unexpected parameter `{k}`")));
        }
        if params.iter().any(|(_, v)| !v.is_finite()) {
            return Err(bad("parameters must be finite"));
        }
        let dim = |default: usize| -> Result<usize> {
            let d = get("dim").unwrap_or(default as f64);
            if d.fract() != 0.0 || d < 2.0 || d > MAX_DIM as f64 {
                return Err(bad(&format!("dim must be an integer in 2..={MAX_DIM}")));
            }
            Ok(d as usize)
        };
        Ok(match name {
            "euclidean" => CatalogEntry::Euclidean { dim: dim(3)? },
            "space_form" => CatalogEntry::SpaceForm { dim: dim(3)?, c: get("c").unwrap_or(1.0) },
            "thurston" => CatalogEntry::Thurston {
                m: get("m").ok_or_else(|| bad("missing `m`"))?,
                l: get("l").ok_or_else(|| bad("missing `l`"))?,
            },
            "sol" => CatalogEntry::Sol,
            "product_s2xe1" => CatalogEntry::Thurston { m: 0.25, l: 0.0 },
            _ => CatalogEntry::Thurston { m: -0.25, l: 0.0 },
        })
    }

    /// Default box: the conformal factors stay ≥ ½ on it.
    pub fn default_domain(&self) -> Vec<(f64, f64)> {
        match *self {
            CatalogEntry::Euclidean { dim } => vec![(-1.0, 1.0); dim],
            CatalogEntry::SpaceForm { dim, c } => {
                // 1 + (c/4)·n·a² = ½ at the corners for c < 0
                let a = if c < 0.0 { (2.0 / (dim as f64 * -c)).sqrt().min(1.0) } else { 1.0 };
                vec![(-a, a); dim]
            }
            CatalogEntry::Thurston { m, .. } => {
                // 1 + m·2a² = ½ at the corners for m < 0
                let a = if m < 0.0 { (0.25 / -m).sqrt().min(1.0) } else { 1.0 };
                vec![(-a, a), (-a, a), (-1.0, 1.0)]
            }
            CatalogEntry::Sol => vec![(-1.0, 1.0), (-1.0, 1.0), (-2.0, 2.0)],
        }
    }

    fn name(&self) -> String {
        match *self {
            CatalogEntry::Euclidean { dim } => format!("euclidean({dim})"),
            CatalogEntry::SpaceForm { dim, c } => format!("space_form({dim}, c={c})"),
            CatalogEntry::Thurston { m, l } => format!("thurston(m={m}, l={l})"),
            CatalogEntry::Sol => "sol".into(),
        }
    }

    /// Checks that the conformal factor stays positive on `domain`.
    fn validate_domain(&self, domain: &[(f64, f64)]) -> Result<()> {
        let far = |axes: &[(f64, f64)]| -> f64 {
            axes.iter().map(|(lo, hi)| lo.abs().max(hi.abs()).powi(2)).sum()
        };
        let bad = |reason: String| Error::InvalidParams { name: self.name(), reason };
        if domain.iter().any(|(lo, hi)| !(lo < hi)) {
            return Err(Error::EmptyDomain);
        }
        match *self {
            CatalogEntry::SpaceForm { c, .. } if c < 0.0 => {
                let f = 1.0 + c / 4.0 * far(domain);
                if f <= 0.0 {
                    return Err(bad(format!("1 + (c/4)Σx² = {f} ≤ 0 inside the box")));
                }
            }
            CatalogEntry::Thurston { m, .. } if m < 0.0 => {
                let f = 1.0 + m * far(&domain[..2]);
                if f <= 0.0 {
                    return Err(bad(format!("1 + m(x²+y²) = {f} ≤ 0 inside the box")));
                }
            }
            _ => {}
        }
        Ok(())
    }

    pub fn build(&self, domain: Option<Vec<(f64, f64)>>) -> Result<MetricField> {
        let domain = domain.unwrap_or_else(|| self.default_domain());
        let n = match *self {
            CatalogEntry::Euclidean { dim } | CatalogEntry::SpaceForm { dim, .. } => dim,
            _ => 3,
        };
        if domain.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: domain.len() });
        }
        self.validate_domain(&domain)?;
        let name = self.name();
        let xyz = || vec!["x".to_string(), "y".to_string(), "z".to_string()];
        let one = || Expr::num(1.0);
        let zero = || Expr::num(0.0);
        match *self {
            CatalogEntry::Euclidean { dim } => MetricField::from_entries(
                name,
                coord_names(dim),
                vec![],
                domain,
                |i, j| if i == j { one() } else { zero() },
            ),
            CatalogEntry::SpaceForm { dim, c } => {
                let factor = || {
                    let sum = (1..dim).fold(Expr::coord(0).powi(2), |acc, k| acc + Expr::coord(k).powi(2));
                    (one() + Expr::param(0) / Expr::num(4.0) * sum).powi(-2)
                };
                MetricField::from_entries(
                    name,
                    coord_names(dim),
                    vec![("c".into(), c)],
                    domain,
                    |i, j| if i == j { factor() } else { zero() },
                )
            }
            CatalogEntry::Thurston { m, l } => {
                let (x, y) = (|| Expr::coord(0), || Expr::coord(1));
                let d = || one() + Expr::param(0) * (x().powi(2) + y().powi(2));
                let half_l = || Expr::param(1) / Expr::num(2.0);
                // dz + a dx + b dy with a = (l/2) y / D, b = -(l/2) x / D
                let a = || half_l() * y() / d();
                let b = || -(half_l() * x()) / d();
                MetricField::from_entries(
                    name,
                    xyz(),
                    vec![("m".into(), m), ("l".into(), l)],
                    domain,
                    |i, j| match (i, j) {
                        (0, 0) => d().powi(-2) + a().powi(2),
                        (1, 1) => d().powi(-2) + b().powi(2),
                        (2, 2) => one(),
                        (0, 1) => a() * b(),
                        (0, 2) => a(),
                        (1, 2) => b(),
                        _ => unreachable!(),
                    },
                )
            }
            CatalogEntry::Sol => {
                let z = || Expr::coord(2);
                MetricField::from_entries(name, xyz(), vec![], domain, |i, j| match (i, j) {
                    (0, 0) => (Expr::num(2.0) * z()).exp(),
                    (1, 1) => (-(Expr::num(2.0) * z())).exp(),
                    (2, 2) => one(),
                    _ => zero(),
                })
            }
        }
    }
}

fn coord_names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("x{i}")).collect()
}

/// Looks up a catalog metric with its default domain box.
pub fn catalog_metric(name: &str, params: &[(&str, f64)]) -> Result<MetricField> {
    CatalogEntry::resolve(name, params)?.build(None)
}

/// Looks up a catalog metric on an explicit domain box.
pub fn catalog_metric_in(
    name: &str,
    params: &[(&str, f64)],
    domain: Vec<(f64, f64)>,
) -> Result<MetricField> {
    CatalogEntry::resolve(name, params)?.build(Some(domain))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euclidean_is_identity() {
        let m = catalog_metric("euclidean", &[("dim", 3.0)]).unwrap();
        let g = m.eval(&[0.3, -0.2, 0.9]).unwrap();
        assert_eq!(g, nalgebra::DMatrix::identity(3, 3));
    }

    #[test]
    fn space_form_at_origin_is_identity() {
        let m = catalog_metric("space_form", &[("dim", 2.0), ("c", 1.0)]).unwrap();
        assert_eq!(m.eval(&[0.0, 0.0]).unwrap(), nalgebra::DMatrix::identity(2, 2));
    }

    #[test]
    fn sol_at_unit_height() {
        let m = catalog_metric("sol", &[]).unwrap();
        let g = m.eval(&[0.0, 0.0, 1.0]).unwrap();
        let e2 = 1f64.exp().powi(2);
        assert!((g[(0, 0)] - e2).abs() < 1e-15 * e2);
        assert!((g[(1, 1)] - 1.0 / e2).abs() < 1e-16);
        assert_eq!(g[(2, 2)], 1.0);
        assert_eq!(g[(0, 1)], 0.0);
    }

    #[test]
    fn flat_thurston_is_euclidean() {
        let t = catalog_metric("thurston", &[("m", 0.0), ("l", 0.0)]).unwrap();
        let e = catalog_metric("euclidean", &[("dim", 3.0)]).unwrap();
        for x in [[0.1, 0.2, 0.3], [-0.7, 0.9, -0.1], [0.0, 0.0, 0.0]] {
            assert_eq!(t.eval(&x).unwrap(), e.eval(&x).unwrap());
        }
    }

    #[test]
    fn thurston_line_element() {
        // g(u,u) against the printed ds² with u = (dx, dy, dz)
        let (m, l) = (-0.2, 0.7);
        let t = catalog_metric("thurston", &[("m", m), ("l", l)]).unwrap();
        let (x, y) = (0.3, -0.4);
        let g = t.eval(&[x, y, 0.5]).unwrap();
        let u = nalgebra::DVector::from_vec(vec![0.2, -1.1, 0.6]);
        let d = 1.0 + m * (x * x + y * y);
        let want = (u[0] * u[0] + u[1] * u[1]) / (d * d)
            + (u[2] + l / 2.0 * (y * u[0] - x * u[1]) / d).powi(2);
        let got = (u.transpose() * &g * &u)[(0, 0)];
        assert!((got - want).abs() < 1e-14);
    }

    #[test]
    fn invalid_requests() {
        assert!(matches!(catalog_metric("nil", &[]), Err(Error::UnknownMetric(_))));
        assert!(catalog_metric("thurston", &[("m", 0.0)]).is_err());
        assert!(catalog_metric("thurston", &[("m", f64::NAN), ("l", 0.0)]).is_err());
        assert!(catalog_metric("euclidean", &[("dim", 1.0)]).is_err());
        // hyperbolic conformal factor vanishes at |x|² = 4/|c|
        let err = catalog_metric_in("space_form", &[("dim", 2.0), ("c", -1.0)], vec![(-2.0, 2.0); 2]);
        assert!(matches!(err, Err(Error::InvalidParams { .. })));
        assert!(catalog_metric_in("space_form", &[("dim", 2.0), ("c", -1.0)], vec![(-1.0, 1.0); 2]).is_ok());
    }

    #[test]
    fn products_are_thurston_specialisations() {
        let s = catalog_metric("product_s2xe1", &[]).unwrap();
        let t = catalog_metric("thurston", &[("m", 0.25), ("l", 0.0)]).unwrap();
        assert_eq!(s.eval(&[0.2, 0.1, 0.0]).unwrap(), t.eval(&[0.2, 0.1, 0.0]).unwrap());
    }
}
