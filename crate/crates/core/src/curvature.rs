//! Second-order jets of a metric and the pointwise curvature bundle.
//!
//! Conventions: `R(X,Y)Z = ∇_X∇_Y Z − ∇_Y∇_X Z − ∇_{[X,Y]} Z`,
//! `R(X,Y,Z,W) = g(R(X,Y)Z, W)`, `S(X,Y) = Σ g^{ab} R(e_a, X, Y, e_b)`.
//! With these the round sphere has `R = G` and positive scalar curvature.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::metricspace::{packed_index, ChartPoint, MetricField};
use crate::tensorlab::{
    act_on_02, basis_metric_endomorphism, big_g, kulkarni_nomizu, tensor06_from_operator, Tensor04,
    Tensor06,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiffMode {
    /// Exact derivatives through second-order Taylor arithmetic.
    Jet,
    /// Central differences with two-step Richardson extrapolation.
    FiniteDifference,
}

/// Residual bounds used by the classifier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TolerancePolicy {
    pub name: &'static str,
    /// relative magnitude below which a tensor counts as zero
    pub zero: f64,
    /// fit residual below which two tensors count as proportional
    pub proportional: f64,
    /// eigenvalue merge distance, relative to `1 + max|λ|`
    pub cluster: f64,
    /// allowed deviation from the mean for "constant across points"
    pub constancy: f64,
}

impl TolerancePolicy {
    pub const STRICT: TolerancePolicy =
        TolerancePolicy { name: "strict", zero: 1e-8, proportional: 1e-7, cluster: 1e-6, constancy: 1e-6 };
    pub const FD: TolerancePolicy =
        TolerancePolicy { name: "fd", zero: 1e-4, proportional: 1e-4, cluster: 1e-4, constancy: 1e-4 };

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "strict" => Ok(Self::STRICT),
            "fd" => Ok(Self::FD),
            other => Err(Error::Config(format!("unknown tolerance profile `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffConfig {
    pub mode: DiffMode,
    pub fd_step: f64,
    pub tolerance: TolerancePolicy,
}

impl Default for DiffConfig {
    fn default() -> Self {
        Self { mode: DiffMode::Jet, fd_step: 1e-4, tolerance: TolerancePolicy::STRICT }
    }
}

impl DiffConfig {
    pub fn finite_difference(fd_step: f64) -> Self {
        Self { mode: DiffMode::FiniteDifference, fd_step, tolerance: TolerancePolicy::FD }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1e-8..=1e-2).contains(&self.fd_step) {
            return Err(Error::Config(format!("fd_step {} outside [1e-8, 1e-2]", self.fd_step)));
        }
        Ok(())
    }
}

/// Metric components and their first and second coordinate derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet2 {
    n: usize,
    pub g: DMatrix<f64>,
    /// `dg[a][i][j] = ∂_a g_{ij}`
    dg: Vec<f64>,
    /// `d2g[a][b][i][j] = ∂_a ∂_b g_{ij}`
    d2g: Vec<f64>,
}

impl Jet2 {
    fn zeros(n: usize) -> Self {
        Self { n, g: DMatrix::zeros(n, n), dg: vec![0.0; n.pow(3)], d2g: vec![0.0; n.pow(4)] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn dg(&self, a: usize, i: usize, j: usize) -> f64 {
        self.dg[(a * self.n + i) * self.n + j]
    }

    #[inline]
    pub fn d2g(&self, a: usize, b: usize, i: usize, j: usize) -> f64 {
        self.d2g[((a * self.n + b) * self.n + i) * self.n + j]
    }

    fn set_dg(&mut self, a: usize, i: usize, j: usize, v: f64) {
        let n = self.n;
        self.dg[(a * n + i) * n + j] = v;
        self.dg[(a * n + j) * n + i] = v;
    }

    fn set_d2g(&mut self, a: usize, b: usize, i: usize, j: usize, v: f64) {
        let n = self.n;
        for (x, y) in [(a, b), (b, a)] {
            self.d2g[((x * n + y) * n + i) * n + j] = v;
            self.d2g[((x * n + y) * n + j) * n + i] = v;
        }
    }

    pub fn max_abs_dg(&self) -> f64 {
        self.dg.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_d2g(&self) -> f64 {
        self.d2g.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Second-order jet of the metric at `p`.
pub fn jet2_at(field: &MetricField, p: &ChartPoint, cfg: &DiffConfig) -> Result<Jet2> {
    let n = field.dim();
    if p.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: p.dim() });
    }
    let x = p.coords();
    match cfg.mode {
        DiffMode::Jet => {
            if !field.contains(x) {
                return Err(Error::OutsideDomain(x.to_vec()));
            }
            let packed = field.eval_taylor(x)?;
            let mut jet = Jet2::zeros(n);
            for i in 0..n {
                for j in i..n {
                    let t = &packed[packed_index(n, i, j)];
                    jet.g[(i, j)] = t.value;
                    jet.g[(j, i)] = t.value;
                    for a in 0..n {
                        jet.set_dg(a, i, j, t.grad[a]);
                        for b in a..n {
                            jet.set_d2g(a, b, i, j, t.hess[a][b]);
                        }
                    }
                }
            }
            Ok(jet)
        }
        DiffMode::FiniteDifference => {
            cfg.validate()?;
            finite_difference_jet(field, x, cfg.fd_step)
        }
    }
}

fn finite_difference_jet(field: &MetricField, x: &[f64], fd_step: f64) -> Result<Jet2> {
    let n = field.dim();
    let steps: Vec<f64> = x.iter().map(|v| fd_step * v.abs().max(1.0)).collect();
    let inside = x
        .iter()
        .zip(&steps)
        .zip(field.domain())
        .all(|((v, h), (lo, hi))| v - h > *lo && v + h < *hi);
    if !inside {
        return Err(Error::OutsideDomain(x.to_vec()));
    }
    let eval = |shift: &[(usize, f64)]| -> Result<DMatrix<f64>> {
        let mut y = x.to_vec();
        for &(a, d) in shift {
            y[a] += d;
        }
        field.eval(&y)
    };
    let center = eval(&[])?;
    let mut jet = Jet2::zeros(n);
    jet.g = center.clone();

    // Each stencil returns n×n matrices for step scale s ∈ {1, ½}; the two are
    // combined as (4·D(h/2) − D(h))/3.
    for a in 0..n {
        let mut d1 = [DMatrix::zeros(n, n), DMatrix::zeros(n, n)];
        let mut d2 = [DMatrix::zeros(n, n), DMatrix::zeros(n, n)];
        for (k, s) in [1.0, 0.5].into_iter().enumerate() {
            let h = steps[a] * s;
            let plus = eval(&[(a, h)])?;
            let minus = eval(&[(a, -h)])?;
            d1[k] = (&plus - &minus) / (2.0 * h);
            d2[k] = (&plus - &center * 2.0 + &minus) / (h * h);
        }
        let first = (&d1[1] * 4.0 - &d1[0]) / 3.0;
        let second = (&d2[1] * 4.0 - &d2[0]) / 3.0;
        for i in 0..n {
            for j in i..n {
                jet.set_dg(a, i, j, first[(i, j)]);
                jet.set_d2g(a, a, i, j, second[(i, j)]);
            }
        }
        for b in a + 1..n {
            let mut mixed = [DMatrix::zeros(n, n), DMatrix::zeros(n, n)];
            for (k, s) in [1.0, 0.5].into_iter().enumerate() {
                let (ha, hb) = (steps[a] * s, steps[b] * s);
                let pp = eval(&[(a, ha), (b, hb)])?;
                let pm = eval(&[(a, ha), (b, -hb)])?;
                let mp = eval(&[(a, -ha), (b, hb)])?;
                let mm = eval(&[(a, -ha), (b, -hb)])?;
                mixed[k] = (pp - pm - mp + mm) / (4.0 * ha * hb);
            }
            let m = (&mixed[1] * 4.0 - &mixed[0]) / 3.0;
            for i in 0..n {
                for j in i..n {
                    jet.set_d2g(a, b, i, j, m[(i, j)]);
                }
            }
        }
    }
    if jet.dg.iter().chain(&jet.d2g).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("finite-difference derivative"));
    }
    Ok(jet)
}

/// Christoffel symbols `Γ^i_{jk}`, stored `[i][j][k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Christoffel {
    n: usize,
    data: Vec<f64>,
}

impl Christoffel {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n.pow(3)] }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[(i * self.n + j) * self.n + k]
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn norm_inf(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `Γ(u, z)^i = Γ^i_{jk} u^j z^k`.
    pub fn apply(&self, u: &[f64], z: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|i| {
                let mut s = 0.0;
                for j in 0..n {
                    for k in 0..n {
                        s += self.get(i, j, k) * u[j] * z[k];
                    }
                }
                s
            })
            .collect()
    }
}

fn inverse(g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let inv = g.clone().try_inverse().ok_or(Error::SingularMetric)?;
    if inv.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularMetric);
    }
    Ok(inv)
}

/// `Γ^i_{jk} = ½ g^{il}(∂_j g_{lk} + ∂_k g_{jl} − ∂_l g_{jk})`.
pub fn christoffel(jet: &Jet2) -> Result<Christoffel> {
    let gi = inverse(&jet.g)?;
    Ok(christoffel_with_inverse(jet, &gi))
}

fn christoffel_with_inverse(jet: &Jet2, gi: &DMatrix<f64>) -> Christoffel {
    let n = jet.n;
    let mut out = Christoffel::zeros(n);
    for i in 0..n {
        for j in 0..n {
            for k in j..n {
                let mut s = 0.0;
                for l in 0..n {
                    s += gi[(i, l)] * (jet.dg(j, l, k) + jet.dg(k, j, l) - jet.dg(l, j, k));
                }
                out.data[(i * n + j) * n + k] = 0.5 * s;
                out.data[(i * n + k) * n + j] = 0.5 * s;
            }
        }
    }
    out
}

/// Christoffel symbols at `x` from exact first derivatives only.
pub fn christoffel_at(field: &MetricField, x: &[f64]) -> Result<Christoffel> {
    if !field.contains(x) {
        return Err(Error::OutsideDomain(x.to_vec()));
    }
    let n = field.dim();
    let packed = field.eval_dual(x)?;
    let mut jet = Jet2 { n, g: DMatrix::zeros(n, n), dg: vec![0.0; n.pow(3)], d2g: Vec::new() };
    for i in 0..n {
        for j in i..n {
            let d = &packed[packed_index(n, i, j)];
            jet.g[(i, j)] = d.value;
            jet.g[(j, i)] = d.value;
            for a in 0..n {
                jet.set_dg(a, i, j, d.grad[a]);
            }
        }
    }
    christoffel(&jet)
}

/// Residual of `∇g = 0` rebuilt from the symbols:
/// `max |∂_a g_{ij} − Γ^l_{ai} g_{lj} − Γ^l_{aj} g_{il}|`.
pub fn metric_compatibility_residual(jet: &Jet2, gamma: &Christoffel) -> f64 {
    let n = jet.n;
    let mut worst = 0.0f64;
    for a in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut r = jet.dg(a, i, j);
                for l in 0..n {
                    r -= gamma.get(l, a, i) * jet.g[(l, j)] + gamma.get(l, a, j) * jet.g[(i, l)];
                }
                worst = worst.max(r.abs());
            }
        }
    }
    worst
}

/// `(1,3)` curvature: `r13[a][b][c][d]` is component `d` of `R(e_a, e_b) e_c`.
#[derive(Debug, Clone, PartialEq)]
pub struct Curvature13 {
    n: usize,
    data: Vec<f64>,
}

impl Curvature13 {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n.pow(4)] }
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        self.data[((a * self.n + b) * self.n + c) * self.n + d]
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn norm_inf(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `R(x, y) z` for arbitrary vectors.
    pub fn apply(&self, x: &[f64], y: &[f64], z: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n];
        for a in 0..n {
            for b in 0..n {
                let xy = x[a] * y[b];
                if xy == 0.0 {
                    continue;
                }
                for c in 0..n {
                    let w = xy * z[c];
                    for (d, o) in out.iter_mut().enumerate() {
                        *o += w * self.get(a, b, c, d);
                    }
                }
            }
        }
        out
    }

    fn lower(&self, g: &DMatrix<f64>) -> Tensor04 {
        let n = self.n;
        Tensor04::from_fn(n, |a, b, c, d| (0..n).map(|i| self.get(a, b, c, i) * g[(i, d)]).sum())
    }

    fn raise(r04: &Tensor04, gi: &DMatrix<f64>) -> Self {
        let n = r04.dim();
        let mut out = Self::zeros(n);
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for i in 0..n {
                        out.data[((a * n + b) * n + c) * n + i] =
                            (0..n).map(|d| r04.get(a, b, c, d) * gi[(d, i)]).sum();
                    }
                }
            }
        }
        out
    }
}

fn riemann13(jet: &Jet2, gi: &DMatrix<f64>, gamma: &Christoffel) -> Curvature13 {
    let n = jet.n;
    // ∂_a g^{il} = −g^{ip} ∂_a g_{pq} g^{ql}
    let mut dgi = vec![0.0; n.pow(3)];
    for a in 0..n {
        let da = DMatrix::from_fn(n, n, |p, q| jet.dg(a, p, q));
        let m = -(gi * da * gi);
        for i in 0..n {
            for l in 0..n {
                dgi[(a * n + i) * n + l] = m[(i, l)];
            }
        }
    }
    // dgamma[a][i][j][k] = ∂_a Γ^i_{jk}
    let mut dgamma = vec![0.0; n.pow(4)];
    for a in 0..n {
        for i in 0..n {
            for j in 0..n {
                for k in j..n {
                    let mut s = 0.0;
                    for l in 0..n {
                        let t = jet.dg(j, l, k) + jet.dg(k, j, l) - jet.dg(l, j, k);
                        let dt = jet.d2g(a, j, l, k) + jet.d2g(a, k, j, l) - jet.d2g(a, l, j, k);
                        s += dgi[(a * n + i) * n + l] * t + gi[(i, l)] * dt;
                    }
                    dgamma[((a * n + i) * n + j) * n + k] = 0.5 * s;
                    dgamma[((a * n + i) * n + k) * n + j] = 0.5 * s;
                }
            }
        }
    }
    let dg = |a: usize, i: usize, j: usize, k: usize| dgamma[((a * n + i) * n + j) * n + k];
    // R(e_k, e_l) e_j = R^i_{jkl} e_i,
    // R^i_{jkl} = ∂_k Γ^i_{lj} − ∂_l Γ^i_{kj} + Γ^i_{km} Γ^m_{lj} − Γ^i_{lm} Γ^m_{kj}
    let mut r = Curvature13::zeros(n);
    for k in 0..n {
        for l in 0..n {
            for j in 0..n {
                for i in 0..n {
                    let mut v = dg(k, i, l, j) - dg(l, i, k, j);
                    for m in 0..n {
                        v += gamma.get(i, k, m) * gamma.get(m, l, j) - gamma.get(i, l, m) * gamma.get(m, k, j);
                    }
                    r.data[((k * n + l) * n + j) * n + i] = v;
                }
            }
        }
    }
    r
}

/// Every pointwise curvature quantity at one chart point.
#[derive(Debug, Clone)]
pub struct CurvatureBundle {
    pub point: Option<ChartPoint>,
    pub g: DMatrix<f64>,
    pub g_inv: DMatrix<f64>,
    pub gamma: Christoffel,
    pub r13: Curvature13,
    pub r04: Tensor04,
    pub ricci: DMatrix<f64>,
    pub scalar: f64,
    /// Zero tensor for n = 2.
    pub weyl: Tensor04,
    pub big_g: Tensor04,
    pub rr: Tensor06,
    pub tach_r: Tensor06,
    pub cc: Tensor06,
    pub tach_c: Tensor06,
    /// `rs.get(x1, x2, e, f) = (R(e_e, e_f)·S)(X1, X2)`
    pub rs: Tensor04,
    /// `tach_s.get(x1, x2, e, f) = ((e_e ∧g e_f)·S)(X1, X2)`
    pub tach_s: Tensor04,
}

impl CurvatureBundle {
    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    /// Builds the bundle from an algebraic (0,4) curvature tensor, e.g. one
    /// assembled from shape operators. Christoffel symbols are left zero.
    pub fn from_curvature(g: DMatrix<f64>, r04: Tensor04) -> Result<Self> {
        let n = g.nrows();
        if r04.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, got: r04.dim() });
        }
        let gi = inverse(&g)?;
        let r13 = Curvature13::raise(&r04, &gi);
        assemble(None, g, gi, Christoffel::zeros(n), r13, Some(r04))
    }
}

fn assemble(
    point: Option<ChartPoint>,
    g: DMatrix<f64>,
    gi: DMatrix<f64>,
    gamma: Christoffel,
    r13: Curvature13,
    r04: Option<Tensor04>,
) -> Result<CurvatureBundle> {
    let n = g.nrows();
    let r04 = r04.unwrap_or_else(|| r13.lower(&g));
    let mut ricci = DMatrix::from_fn(n, n, |x, y| (0..n).map(|a| r13.get(a, x, y, a)).sum());
    ricci = (&ricci + ricci.transpose()) * 0.5;
    let scalar = (&gi * &ricci).trace();
    let weyl = if n >= 3 { weyl_tensor(&r04, &ricci, scalar, &g)? } else { Tensor04::zeros(n) };
    let bg = big_g(&g);

    let r_op = |e, f| r04.operator(&gi, e, f);
    let c_op = |e, f| weyl.operator(&gi, e, f);
    let wedge = |e, f| basis_metric_endomorphism(&g, e, f);
    let rr = tensor06_from_operator(&r04, r_op)?;
    let tach_r = tensor06_from_operator(&r04, wedge)?;
    let cc = tensor06_from_operator(&weyl, c_op)?;
    let tach_c = tensor06_from_operator(&weyl, wedge)?;

    let mut rs = Tensor04::zeros(n);
    let mut tach_s = Tensor04::zeros(n);
    for e in 0..n {
        for f in 0..n {
            let a = act_on_02(&r_op(e, f), &ricci)?;
            let b = act_on_02(&wedge(e, f), &ricci)?;
            for x1 in 0..n {
                for x2 in 0..n {
                    rs.set(x1, x2, e, f, a[(x1, x2)]);
                    tach_s.set(x1, x2, e, f, b[(x1, x2)]);
                }
            }
        }
    }
    if !scalar.is_finite() || r04.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("curvature tensor"));
    }
    Ok(CurvatureBundle {
        point,
        g,
        g_inv: gi,
        gamma,
        r13,
        r04,
        ricci,
        scalar,
        weyl,
        big_g: bg,
        rr,
        tach_r,
        cc,
        tach_c,
        rs,
        tach_s,
    })
}

/// Full curvature bundle of `field` at `p`.
pub fn curvature_bundle(field: &MetricField, p: &ChartPoint, cfg: &DiffConfig) -> Result<CurvatureBundle> {
    let jet = jet2_at(field, p, cfg)?;
    let gi = inverse(&jet.g)?;
    let gamma = christoffel_with_inverse(&jet, &gi);
    let r13 = riemann13(&jet, &gi, &gamma);
    assemble(Some(p.clone()), jet.g, gi, gamma, r13, None)
}

/// `C = R − (g∧S)/(n−2) + τ (g∧g) / (2(n−1)(n−2))`.
pub fn weyl_tensor(r04: &Tensor04, ricci: &DMatrix<f64>, tau: f64, g: &DMatrix<f64>) -> Result<Tensor04> {
    let n = g.nrows();
    if n < 3 {
        return Err(Error::UnsupportedDimension(n));
    }
    if r04.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: r04.dim() });
    }
    let nf = n as f64;
    let gs = kulkarni_nomizu(g, ricci)?;
    let gg = kulkarni_nomizu(g, g)?;
    Ok(r04.axpy(-1.0 / (nf - 2.0), &gs).axpy(tau / (2.0 * (nf - 1.0) * (nf - 2.0)), &gg))
}

/// Largest single trace of a (0,4) tensor with `g⁻¹`, relative to `1 + ‖T‖∞`.
pub fn trace_residual(t: &Tensor04, gi: &DMatrix<f64>) -> f64 {
    let n = t.dim();
    let mut worst = 0.0f64;
    // contractions over slot pairs (0,1) (0,2) (0,3) (1,2) (1,3) (2,3)
    let pairs = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
    for (p, q) in pairs {
        for x in 0..n {
            for y in 0..n {
                let mut s = 0.0;
                for a in 0..n {
                    for b in 0..n {
                        let mut idx = [0usize; 4];
                        idx[p] = a;
                        idx[q] = b;
                        let free: Vec<usize> = (0..4).filter(|s| *s != p && *s != q).collect();
                        idx[free[0]] = x;
                        idx[free[1]] = y;
                        s += gi[(a, b)] * t.get(idx[0], idx[1], idx[2], idx[3]);
                    }
                }
                worst = worst.max(s.abs());
            }
        }
    }
    worst / (1.0 + t.norm_inf())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metricspace::{catalog_metric, parse_metric_spec, sample_points};

    fn origin3() -> ChartPoint {
        ChartPoint::origin(3)
    }

    #[test]
    fn constant_metric_has_zero_derivatives() {
        let m = parse_metric_spec("dim 2\ncoords x y\ng 0 0 = 2\ng 1 1 = 3\ng 0 1 = 1\n").unwrap();
        let p = ChartPoint::new(vec![0.2, 0.1]).unwrap();
        let jet = jet2_at(&m, &p, &DiffConfig::default()).unwrap();
        assert_eq!(jet.max_abs_dg(), 0.0);
        assert_eq!(jet.max_abs_d2g(), 0.0);
    }

    #[test]
    fn sol_jet_at_origin() {
        let m = catalog_metric("sol", &[]).unwrap();
        let jet = jet2_at(&m, &origin3(), &DiffConfig::default()).unwrap();
        assert_eq!(jet.dg(2, 0, 0), 2.0);
        assert_eq!(jet.d2g(2, 2, 0, 0), 4.0);
        assert_eq!(jet.dg(2, 1, 1), -2.0);
        let fd = jet2_at(&m, &origin3(), &DiffConfig::finite_difference(1e-4)).unwrap();
        assert!((fd.dg(2, 0, 0) - 2.0).abs() < 1e-8);
        assert!((fd.d2g(2, 2, 0, 0) - 4.0).abs() < 1e-6);
    }

    #[test]
    fn space_form_jet_matches_finite_differences() {
        let m = catalog_metric("space_form", &[("dim", 2.0), ("c", 1.0)]).unwrap();
        let p = ChartPoint::origin(2);
        let jet = jet2_at(&m, &p, &DiffConfig::default()).unwrap();
        let fd = jet2_at(&m, &p, &DiffConfig::finite_difference(1e-4)).unwrap();
        assert_eq!(jet.max_abs_dg(), 0.0);
        // g_ii = (1 + r²/4)^-2 ⇒ ∂_a∂_a g_ii = −1 at the origin
        assert!((jet.d2g(0, 0, 0, 0) + 1.0).abs() < 1e-15);
        for a in 0..2 {
            for b in 0..2 {
                for i in 0..2 {
                    for j in 0..2 {
                        assert!((jet.d2g(a, b, i, j) - fd.d2g(a, b, i, j)).abs() < 1e-6);
                    }
                }
            }
        }
    }

    #[test]
    fn fd_step_outside_range_is_rejected() {
        let m = catalog_metric("sol", &[]).unwrap();
        let cfg = DiffConfig::finite_difference(1e-1);
        assert!(matches!(jet2_at(&m, &origin3(), &cfg), Err(Error::Config(_))));
    }

    #[test]
    fn domain_errors_propagate() {
        let m = parse_metric_spec("dim 2\ncoords x y\ng 0 0 = log(x)\ng 1 1 = 1\n").unwrap();
        let p = ChartPoint::new(vec![-0.5, 0.0]).unwrap();
        assert!(matches!(jet2_at(&m, &p, &DiffConfig::default()), Err(Error::Domain(_))));
        let outside = ChartPoint::new(vec![5.0, 0.0]).unwrap();
        assert!(matches!(jet2_at(&m, &outside, &DiffConfig::default()), Err(Error::OutsideDomain(_))));
    }

    #[test]
    fn christoffel_examples() {
        let e = catalog_metric("euclidean", &[("dim", 3.0)]).unwrap();
        let jet = jet2_at(&e, &origin3(), &DiffConfig::default()).unwrap();
        assert_eq!(christoffel(&jet).unwrap().norm_inf(), 0.0);

        let sol = catalog_metric("sol", &[]).unwrap();
        let jet = jet2_at(&sol, &origin3(), &DiffConfig::default()).unwrap();
        let gamma = christoffel(&jet).unwrap();
        let (x, y, z) = (0, 1, 2);
        let mut expected = vec![0.0; 27];
        for (i, j, k, v) in [(x, x, z, 1.0), (y, y, z, -1.0), (z, x, x, -1.0), (z, y, y, 1.0)] {
            expected[(i * 3 + j) * 3 + k] = v;
            expected[(i * 3 + k) * 3 + j] = v;
        }
        for (got, want) in gamma.data.iter().zip(&expected) {
            assert!((got - want).abs() < 1e-15);
        }
        assert!(metric_compatibility_residual(&jet, &gamma) < 1e-14);
    }

    #[test]
    fn metric_compatibility_on_catalog() {
        for (name, params) in [
            ("thurston", vec![("m", -0.25), ("l", 1.0)]),
            ("space_form", vec![("dim", 4.0), ("c", -1.0)]),
            ("sol", vec![]),
        ] {
            let m = catalog_metric(name, &params).unwrap();
            for p in sample_points(&m, 5, 2).unwrap() {
                let jet = jet2_at(&m, &p, &DiffConfig::default()).unwrap();
                let gamma = christoffel(&jet).unwrap();
                assert!(metric_compatibility_residual(&jet, &gamma) < 1e-10);
            }
        }
    }

    #[test]
    fn singular_metric_is_reported() {
        let m = parse_metric_spec("dim 2\ncoords x y\ng 0 0 = 1\ng 1 1 = 1\ng 0 1 = 1\n").unwrap();
        let jet = jet2_at(&m, &ChartPoint::origin(2), &DiffConfig::default()).unwrap();
        assert!(matches!(christoffel(&jet), Err(Error::SingularMetric)));
    }

    #[test]
    fn euclidean_bundle_is_flat() {
        let m = catalog_metric("euclidean", &[("dim", 4.0)]).unwrap();
        let b = curvature_bundle(&m, &ChartPoint::origin(4), &DiffConfig::default()).unwrap();
        assert_eq!(b.r04.norm_inf(), 0.0);
        assert_eq!(b.rr.norm_inf(), 0.0);
        assert_eq!(b.tach_r.norm_inf(), 0.0);
    }

    #[test]
    fn unit_sphere_conventions() {
        let m = catalog_metric("space_form", &[("dim", 3.0), ("c", 1.0)]).unwrap();
        for p in sample_points(&m, 20, 4).unwrap() {
            let b = curvature_bundle(&m, &p, &DiffConfig::default()).unwrap();
            let scale = 1.0 + b.r04.norm_inf();
            assert!(b.r04.axpy(-1.0, &b.big_g).norm_inf() <= 1e-9 * scale);
            assert!((&b.ricci - &b.g * 2.0).amax() < 1e-9);
            assert!((b.scalar - 6.0).abs() < 1e-9);
            assert!(b.rr.norm_inf() < 1e-9);
        }
    }

    #[test]
    fn sol_scalar_curvature_is_constant() {
        let m = catalog_metric("sol", &[]).unwrap();
        let taus: Vec<f64> = sample_points(&m, 20, 9)
            .unwrap()
            .iter()
            .map(|p| curvature_bundle(&m, p, &DiffConfig::default()).unwrap().scalar)
            .collect();
        for t in &taus {
            assert!((t - taus[0]).abs() < 1e-10);
        }
        // independent oracle: finite-difference bundle at the origin
        let fd = curvature_bundle(&m, &origin3(), &DiffConfig::finite_difference(1e-4)).unwrap();
        assert!((fd.scalar - taus[0]).abs() < 1e-5);
        assert!((taus[0] + 2.0).abs() < 1e-10);
    }

    #[test]
    fn weyl_vanishes_in_three_dimensions() {
        let m = catalog_metric("thurston", &[("m", 0.1), ("l", 0.7)]).unwrap();
        for p in sample_points(&m, 5, 1).unwrap() {
            let b = curvature_bundle(&m, &p, &DiffConfig::default()).unwrap();
            assert!(b.weyl.norm_inf() <= 1e-10 * (1.0 + b.r04.norm_inf()));
        }
    }

    #[test]
    fn weyl_rejects_surfaces() {
        let g = DMatrix::identity(2, 2);
        let r = Tensor04::zeros(2);
        assert!(weyl_tensor(&r, &g, 0.0, &g).is_err());
    }

    #[test]
    fn constant_rescaling_laws() {
        let base = catalog_metric("sol", &[]).unwrap();
        let k = 2.5;
        let scaled = MetricField::from_entries(
            "k sol",
            base.coord_names().to_vec(),
            vec![],
            base.domain().to_vec(),
            |i, j| crate::metricspace::Expr::num(k) * base.entry(i, j).clone(),
        )
        .unwrap();
        let p = ChartPoint::new(vec![0.1, -0.2, 0.3]).unwrap();
        let b1 = curvature_bundle(&base, &p, &DiffConfig::default()).unwrap();
        let b2 = curvature_bundle(&scaled, &p, &DiffConfig::default()).unwrap();
        let rel = |a: f64, s: f64| a / (1.0 + s);
        assert!(rel((b1.r13.norm_inf() - b2.r13.norm_inf()).abs(), b1.r13.norm_inf()) < 1e-9);
        assert!(rel(b2.r04.axpy(-k, &b1.r04).norm_inf(), b2.r04.norm_inf()) < 1e-9);
        assert!(rel(b2.rr.axpy(-k, &b1.rr).norm_inf(), b2.rr.norm_inf()) < 1e-9);
        assert!(rel(b2.tach_r.axpy(-k * k, &b1.tach_r).norm_inf(), b2.tach_r.norm_inf()) < 1e-9);
    }
}
