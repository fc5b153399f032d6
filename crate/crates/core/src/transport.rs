//! Geodesics, parallel transport, holonomy around coordinate
//! parallelograms and Levi-Civita squaroids.
//!
//! All integration is classical fourth-order Runge–Kutta with a fixed step.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::curvature::{christoffel_at, Christoffel};
use crate::error::{Error, Result};
use crate::metricspace::MetricField;

/// Default arclength step.
pub const DEFAULT_STEP: f64 = 1e-3;

/// Endpoint-miss target of the shooting solver.
const SHOOT_TOL: f64 = 1e-12;
const SHOOT_MAX_ITER: usize = 30;

/// A point on a curve with its velocity and a list of transported vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveState {
    pub point: Vec<f64>,
    pub velocity: Vec<f64>,
    pub carried: Vec<Vec<f64>>,
}

impl CurveState {
    pub fn new(point: Vec<f64>, velocity: Vec<f64>, carried: Vec<Vec<f64>>) -> Result<Self> {
        let n = point.len();
        for len in std::iter::once(velocity.len()).chain(carried.iter().map(Vec::len)) {
            if len != n {
                return Err(Error::DimensionMismatch { expected: n, got: len });
            }
        }
        let s = Self { point, velocity, carried };
        if !s.is_finite() {
            return Err(Error::NonFinite("curve state"));
        }
        Ok(s)
    }

    fn is_finite(&self) -> bool {
        self.point.iter().chain(&self.velocity).chain(self.carried.iter().flatten()).all(|v| v.is_finite())
    }

    fn flatten(&self) -> Vec<f64> {
        let mut y = self.point.clone();
        y.extend(&self.velocity);
        for c in &self.carried {
            y.extend(c);
        }
        y
    }

    fn unflatten(n: usize, y: &[f64]) -> Self {
        Self {
            point: y[..n].to_vec(),
            velocity: y[n..2 * n].to_vec(),
            carried: y[2 * n..].chunks(n).map(<[f64]>::to_vec).collect(),
        }
    }
}

/// `ẋ = u`, `u̇ = −Γ(u,u)` (or `0` on a coordinate line), `ż = −Γ(u,z)`.
fn rhs(field: &MetricField, y: &[f64], geodesic: bool) -> Result<Vec<f64>> {
    let n = field.dim();
    let gamma: Christoffel = christoffel_at(field, &y[..n])?;
    let u = &y[n..2 * n];
    let mut out = Vec::with_capacity(y.len());
    out.extend_from_slice(u);
    if geodesic {
        out.extend(gamma.apply(u, u).into_iter().map(|v| -v));
    } else {
        out.extend(std::iter::repeat(0.0).take(n));
    }
    for z in y[2 * n..].chunks(n) {
        out.extend(gamma.apply(u, z).into_iter().map(|v| -v));
    }
    Ok(out)
}

fn rk4(field: &MetricField, y: &[f64], dt: f64, geodesic: bool) -> Result<Vec<f64>> {
    let axpy = |a: &[f64], s: f64, b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x + s * y).collect() };
    let k1 = rhs(field, y, geodesic)?;
    let k2 = rhs(field, &axpy(y, dt / 2.0, &k1), geodesic)?;
    let k3 = rhs(field, &axpy(y, dt / 2.0, &k2), geodesic)?;
    let k4 = rhs(field, &axpy(y, dt, &k3), geodesic)?;
    let out: Vec<f64> = (0..y.len()).map(|i| y[i] + dt / 6.0 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i])).collect();
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("integrator state"));
    }
    Ok(out)
}

fn integrate(field: &MetricField, state: &CurveState, t: f64, h: f64, geodesic: bool) -> Result<CurveState> {
    let n = field.dim();
    if state.point.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: state.point.len() });
    }
    if !(h > 0.0) || !t.is_finite() || t < 0.0 {
        return Err(Error::Config(format!("invalid integration span {t} with step {h}")));
    }
    let steps = ((t / h).ceil() as usize).max(1);
    let dt = t / steps as f64;
    let mut y = state.flatten();
    for _ in 0..steps {
        y = rk4(field, &y, dt, geodesic)?;
    }
    if !field.contains(&y[..n]) {
        return Err(Error::OutsideDomain(y[..n].to_vec()));
    }
    Ok(CurveState::unflatten(n, &y))
}

/// One Runge–Kutta step of size `h` for the geodesic and transport system.
pub fn geodesic_step(field: &MetricField, state: &CurveState, h: f64) -> Result<CurveState> {
    integrate(field, state, h, h, true)
}

/// Follows the geodesic for parameter length `s` with step at most `h`.
/// With a unit-speed initial velocity `s` is the arclength.
pub fn integrate_geodesic(field: &MetricField, state: &CurveState, s: f64, h: f64) -> Result<CurveState> {
    integrate(field, state, s, h, true)
}

/// Transports `vectors` along the coordinate segment `p → p + d·e_axis`.
pub fn transport_along_axis(
    field: &MetricField,
    p: &[f64],
    axis: usize,
    d: f64,
    vectors: &[Vec<f64>],
    h: f64,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = field.dim();
    if axis >= n {
        return Err(Error::DimensionMismatch { expected: n, got: axis + 1 });
    }
    let mut u = vec![0.0; n];
    u[axis] = d;
    let state = CurveState::new(p.to_vec(), u, vectors.to_vec())?;
    // parameter runs over [0, 1]; the coordinate step is |d|/steps
    let steps = ((d.abs() / h).ceil()).max(1.0);
    let end = integrate(field, &state, 1.0, 1.0 / steps, false)?;
    Ok((end.point, end.carried))
}

/// Transports `vectors` around the coordinate loop whose legs are
/// `(axis, signed increment)` in order.
pub fn transport_around_loop(
    field: &MetricField,
    p: &[f64],
    legs: &[(usize, f64)],
    vectors: &[Vec<f64>],
    h: f64,
) -> Result<Vec<Vec<f64>>> {
    let mut x = p.to_vec();
    let mut zs = vectors.to_vec();
    for &(axis, d) in legs {
        let (nx, nz) = transport_along_axis(field, &x, axis, d, &zs, h)?;
        x = nx;
        zs = nz;
    }
    Ok(zs)
}

/// Parallel transport of `zs` once around the infinitesimal coordinate
/// parallelogram spanned by `dx·e_h` and `dy·e_k` at `p`.
///
/// The loop is traversed so that `(z★ − z)/(dx·dy) → R(e_h, e_k) z`.
/// With `R(X,Y) = ∇_X∇_Y − ∇_Y∇_X − ∇_[X,Y]` that is the order
/// `+dy` along `k`, `+dx` along `h`, `−dy`, `−dx`: the opposite loop
/// (`h` first) produces `−R(e_h, e_k) z` to leading order.
pub fn holonomy_parallelogram_many(
    field: &MetricField,
    p: &[f64],
    h_axis: usize,
    k_axis: usize,
    dx: f64,
    dy: f64,
    zs: &[Vec<f64>],
) -> Result<Vec<Vec<f64>>> {
    if h_axis == k_axis {
        return Err(Error::Config("holonomy loop needs two distinct axes".into()));
    }
    let legs = [(k_axis, dy), (h_axis, dx), (k_axis, -dy), (h_axis, -dx)];
    transport_around_loop(field, p, &legs, zs, DEFAULT_STEP)
}

/// Single-vector form of [`holonomy_parallelogram_many`].
pub fn holonomy_parallelogram(
    field: &MetricField,
    p: &[f64],
    h_axis: usize,
    k_axis: usize,
    dx: f64,
    dy: f64,
    z: &[f64],
) -> Result<Vec<f64>> {
    let mut out = holonomy_parallelogram_many(field, p, h_axis, k_axis, dx, dy, &[z.to_vec()])?;
    Ok(out.remove(0))
}

fn inner(g: &DMatrix<f64>, a: &[f64], b: &[f64]) -> f64 {
    let n = a.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += g[(i, j)] * a[i] * b[j];
        }
    }
    s
}

/// Largest deviation of the Gram matrix of `vs` from the identity.
pub fn orthonormality_residual(g: &DMatrix<f64>, vs: &[&[f64]]) -> f64 {
    let mut worst = 0.0f64;
    for (i, a) in vs.iter().enumerate() {
        for (j, b) in vs.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((inner(g, a, b) - target).abs());
        }
    }
    worst
}

fn require_orthonormal(g: &DMatrix<f64>, vs: &[&[f64]]) -> Result<()> {
    let r = orthonormality_residual(g, vs);
    if r > 1e-8 {
        return Err(Error::NotOrthonormal(r));
    }
    Ok(())
}

/// Exact rotation of `z` by `dphi` in the plane of the `g`-orthonormal pair
/// `(x, y)`; positive angles turn `x` toward `y`. The generator is
/// `d/dφ = −(x ∧g y)`.
pub fn rotate_in_plane(g: &DMatrix<f64>, z: &[f64], x: &[f64], y: &[f64], dphi: f64) -> Result<Vec<f64>> {
    require_orthonormal(g, &[x, y])?;
    let (a, b) = (inner(g, x, z), inner(g, y, z));
    let (s, c) = dphi.sin_cos();
    let (a2, b2) = (a * c - b * s, a * s + b * c);
    Ok((0..z.len()).map(|i| z[i] + (a2 - a) * x[i] + (b2 - b) * y[i]).collect())
}

/// Geodesic distance between two nearby points by shooting: Newton
/// iteration on the endpoint miss of the geodesic `t ∈ [0,1]` from `a`,
/// started at the coordinate difference, with a central-difference Jacobian.
pub fn geodesic_distance(field: &MetricField, a: &[f64], b: &[f64], h: f64) -> Result<f64> {
    let n = field.dim();
    let g_a = field.eval(a)?;
    let chord: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    if chord == 0.0 {
        return Ok(0.0);
    }
    let shoot = |u: &[f64]| -> Result<Vec<f64>> {
        let speed = inner(&g_a, u, u).sqrt();
        let steps = (speed / h).ceil().max(1.0);
        let s = CurveState::new(a.to_vec(), u.to_vec(), vec![])?;
        let end = integrate(field, &s, 1.0, 1.0 / steps, true)?;
        Ok(end.point.iter().zip(b).map(|(x, y)| x - y).collect())
    };
    let norm = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));

    let mut u: Vec<f64> = b.iter().zip(a).map(|(x, y)| x - y).collect();
    let mut miss = shoot(&u)?;
    let mut best = (norm(&miss), u.clone());
    let eta = 1e-6 * chord;
    for _ in 0..SHOOT_MAX_ITER {
        let mut jac = DMatrix::zeros(n, n);
        for j in 0..n {
            let mut up = u.clone();
            let mut um = u.clone();
            up[j] += eta;
            um[j] -= eta;
            let (fp, fm) = (shoot(&up)?, shoot(&um)?);
            for i in 0..n {
                jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * eta);
            }
        }
        let rhs = nalgebra::DVector::from_column_slice(&miss);
        let step = jac.lu().solve(&rhs).ok_or(Error::NoConvergence(best.0))?;
        let candidate: Vec<f64> = u.iter().zip(step.iter()).map(|(x, d)| x - d).collect();
        let next = shoot(&candidate)?;
        let m = norm(&next);
        if m >= best.0 {
            break;
        }
        u = candidate;
        miss = next;
        best = (m, u.clone());
        if m == 0.0 {
            break;
        }
    }
    if best.0 > SHOOT_TOL * (1.0 + chord) {
        return Err(Error::NoConvergence(best.0));
    }
    Ok(inner(&g_a, &best.1, &best.1).sqrt())
}

/// Side lengths and estimates of a squaroid construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SquaroidResult {
    pub epsilon: f64,
    pub eps_prime: f64,
    pub eps_star_prime: Option<f64>,
    pub eps_wedge_prime: Option<f64>,
    pub k_estimate: f64,
    pub l_estimate: Option<f64>,
}

/// Integration step used for squaroids of side `epsilon`.
pub fn squaroid_step(epsilon: f64) -> f64 {
    DEFAULT_STEP.min(epsilon / 100.0)
}

/// Closing side `ε′` of the Levi-Civita squaroid on the orthonormal pair
/// `(v, w)`: geodesic `α` from `p` along `w` to `q` carrying `v` to `v★`,
/// geodesics `β` from `p` along `v` and `γ` from `q` along `v★`, each of
/// length `ε`, and `ε′` the distance between their endpoints.
fn closing_side(field: &MetricField, p: &[f64], v: &[f64], w: &[f64], epsilon: f64) -> Result<f64> {
    let h = squaroid_step(epsilon);
    let alpha = integrate_geodesic(field, &CurveState::new(p.to_vec(), w.to_vec(), vec![v.to_vec()])?, epsilon, h)?;
    let beta = integrate_geodesic(field, &CurveState::new(p.to_vec(), v.to_vec(), vec![])?, epsilon, h)?;
    let gamma =
        integrate_geodesic(field, &CurveState::new(alpha.point.clone(), alpha.carried[0].clone(), vec![])?, epsilon, h)?;
    geodesic_distance(field, &beta.point, &gamma.point, h)
}

/// `K ≈ (ε² − ε′²)/ε⁴` from one squaroid.
pub fn squaroid_riemann(field: &MetricField, p: &[f64], v: &[f64], w: &[f64], epsilon: f64) -> Result<SquaroidResult> {
    if !(epsilon > 0.0) {
        return Err(Error::Config(format!("squaroid side must be positive, got {epsilon}")));
    }
    require_orthonormal(&field.eval(p)?, &[v, w])?;
    let ep = closing_side(field, p, v, w, epsilon)?;
    Ok(SquaroidResult {
        epsilon,
        eps_prime: ep,
        eps_star_prime: None,
        eps_wedge_prime: None,
        k_estimate: (epsilon * epsilon - ep * ep) / epsilon.powi(4),
        l_estimate: None,
    })
}

/// `L ≈ [(ε★′)² − (ε′)²] / [(ε∧′)² − (ε′)²]`.
///
/// `(v★, w★)` come from the holonomy loop with `dx = dy = δ` on the axes
/// `(x_axis, y_axis)`; `(v∧, w∧)` from the rotation in the same coordinate
/// plane with `Δφ = δ²·‖e_x ∧ e_y‖`, oriented so that both first-order
/// changes are generated by `R(e_x, e_y)` and `e_x ∧g e_y` with the same
/// sign.
#[allow(clippy::too_many_arguments)]
pub fn squaroid_deszcz(
    field: &MetricField,
    p: &[f64],
    v: &[f64],
    w: &[f64],
    x_axis: usize,
    y_axis: usize,
    epsilon: f64,
    delta: f64,
) -> Result<SquaroidResult> {
    let base = squaroid_riemann(field, p, v, w, epsilon)?;
    let g = field.eval(p)?;
    let n = field.dim();

    let star = holonomy_parallelogram_many(field, p, x_axis, y_axis, delta, delta, &[v.to_vec(), w.to_vec()])?;
    let ex: Vec<f64> = (0..n).map(|i| if i == x_axis { 1.0 } else { 0.0 }).collect();
    let ey: Vec<f64> = (0..n).map(|i| if i == y_axis { 1.0 } else { 0.0 }).collect();
    let plane = crate::tensorlab::Plane::from_slices(&g, &ex, &ey)?;
    let area = plane.gram_det(&g).sqrt();
    let (xh, yh) = plane.orthonormal(&g);
    // rotate_in_plane is generated by −(x̂ ∧ ŷ); the holonomy by +R(e_x, e_y)
    let dphi = -area * delta * delta;
    let vw = rotate_in_plane(&g, v, xh.as_slice(), yh.as_slice(), dphi)?;
    let ww = rotate_in_plane(&g, w, xh.as_slice(), yh.as_slice(), dphi)?;

    let e_star = closing_side(field, p, &star[0], &star[1], epsilon)?;
    let e_wedge = closing_side(field, p, &vw, &ww, epsilon)?;
    let ep2 = base.eps_prime.powi(2);
    let num = e_star * e_star - ep2;
    let den = e_wedge * e_wedge - ep2;
    let guard = 1e-4 * epsilon.powi(4) * delta * delta;
    if den.abs() <= guard {
        return Err(Error::CurvatureIndependent(den));
    }
    Ok(SquaroidResult {
        eps_star_prime: Some(e_star),
        eps_wedge_prime: Some(e_wedge),
        l_estimate: Some(num / den),
        ..base
    })
}

/// Two-point extrapolation for an error linear in the step:
/// `2·f(h/2) − f(h)`.
pub fn richardson_first_order(coarse: f64, fine: f64) -> f64 {
    2.0 * fine - coarse
}

/// Same for an error quadratic in the step: `(4·f(h/2) − f(h))/3`. The
/// Levi-Civita squaroid estimate has this behaviour.
pub fn richardson_second_order(coarse: f64, fine: f64) -> f64 {
    (4.0 * fine - coarse) / 3.0
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let k = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / k, ly.iter().sum::<f64>() / k);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::{curvature_bundle, DiffConfig};
    use crate::metricspace::{catalog_metric, ChartPoint};

    fn r_apply(field: &MetricField, p: &[f64], x: &[f64], y: &[f64], z: &[f64]) -> Vec<f64> {
        let b = curvature_bundle(field, &ChartPoint::new(p.to_vec()).unwrap(), &DiffConfig::default()).unwrap();
        b.r13.apply(x, y, z)
    }

    fn dist(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
    }

    #[test]
    fn euclidean_geodesic_is_straight() {
        let m = catalog_metric("euclidean", &[("dim", 3.0)]).unwrap();
        let s = CurveState::new(vec![0.1, 0.2, 0.3], vec![0.6, 0.0, 0.8], vec![vec![1.0, 2.0, 3.0]]).unwrap();
        let end = integrate_geodesic(&m, &s, 0.5, 1e-3).unwrap();
        assert!(dist(&end.point, &[0.4, 0.2, 0.7]) < 1e-13, "{:?}", end.point);
        assert_eq!(end.carried[0], vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn geodesic_step_leaving_domain_fails() {
        let m = catalog_metric("euclidean", &[("dim", 2.0)]).unwrap();
        let s = CurveState::new(vec![0.99, 0.0], vec![1.0, 0.0], vec![]).unwrap();
        assert!(matches!(geodesic_step(&m, &s, 0.1), Err(Error::OutsideDomain(_))));
    }

    #[test]
    fn sphere_geodesic_closes() {
        // the equator of the c = 1 chart is the circle r = 2, where the
        // conformal factor is 1/4, so unit speed means coordinate speed 2
        let m = catalog_metric("space_form", &[("dim", 2.0), ("c", 1.0)])
            .unwrap()
            .with_domain(vec![(-3.0, 3.0), (-3.0, 3.0)])
            .unwrap();
        let s = CurveState::new(vec![2.0, 0.0], vec![0.0, 2.0], vec![]).unwrap();
        let end = integrate_geodesic(&m, &s, 2.0 * std::f64::consts::PI, 1e-3).unwrap();
        assert!(dist(&end.point, &s.point) < 1e-6);
    }

    #[test]
    fn transport_preserves_inner_products() {
        let m = catalog_metric("sol", &[]).unwrap();
        let p = vec![0.1, -0.2, 0.3];
        let g = m.eval(&p).unwrap();
        let frame = crate::tensorlab::Plane::from_slices(&g, &[1.0, 0.3, 0.0], &[0.0, 1.0, 0.5]).unwrap();
        let (e1, e2) = frame.orthonormal(&g);
        let u: Vec<f64> = {
            let v = [0.3, 0.2, 0.5];
            let s = inner(&g, &v, &v).sqrt();
            v.iter().map(|x| x / s).collect()
        };
        let s = CurveState::new(p, u, vec![e1.as_slice().to_vec(), e2.as_slice().to_vec()]).unwrap();
        let end = integrate_geodesic(&m, &s, 1.0, 1e-3).unwrap();
        let g_end = m.eval(&end.point).unwrap();
        let drift = orthonormality_residual(&g_end, &[&end.carried[0], &end.carried[1]]);
        assert!(drift < 1e-9, "{drift}");
        assert!((inner(&g_end, &end.velocity, &end.velocity) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn flat_holonomy_is_trivial() {
        let m = catalog_metric("euclidean", &[("dim", 3.0)]).unwrap();
        let z = vec![0.3, -0.4, 0.5];
        let zs = holonomy_parallelogram(&m, &[0.0; 3], 0, 1, 1e-2, 1e-2, &z).unwrap();
        assert!(dist(&zs, &z) <= 1e-12);
    }

    #[test]
    fn holonomy_defect_matches_curvature_operator() {
        let m = catalog_metric("sol", &[]).unwrap();
        let p = [0.0; 3];
        let d = 1e-3;
        for (h, k) in [(0, 2), (1, 2), (0, 1)] {
            let z = [1.0, 0.5, -0.3];
            let zs = holonomy_parallelogram(&m, &p, h, k, d, d, &z).unwrap();
            let defect: Vec<f64> = zs.iter().zip(&z).map(|(a, b)| (a - b) / (d * d)).collect();
            let mut x = [0.0; 3];
            let mut y = [0.0; 3];
            x[h] = 1.0;
            y[k] = 1.0;
            let r = r_apply(&m, &p, &x, &y, &z);
            let rn = r.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!(dist(&defect, &r) <= 0.02 * rn, "{defect:?} vs {r:?}");
        }
    }

    #[test]
    fn reversed_loop_negates_defect() {
        let m = catalog_metric("space_form", &[("dim", 2.0), ("c", 1.0)]).unwrap();
        let z = vec![1.0, 0.0];
        let d = 1e-2;
        let fwd = holonomy_parallelogram(&m, &[0.0, 0.0], 0, 1, d, d, &z).unwrap();
        let rev = transport_around_loop(&m, &[0.0, 0.0], &[(0, d), (1, d), (0, -d), (1, -d)], &[z.clone()], 1e-3)
            .unwrap()
            .remove(0);
        let a: Vec<f64> = fwd.iter().zip(&z).map(|(x, y)| x - y).collect();
        let b: Vec<f64> = rev.iter().zip(&z).map(|(x, y)| x - y).collect();
        let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        assert!(dist(&sum, &[0.0, 0.0]) <= 0.1 * dist(&a, &[0.0, 0.0]));
    }

    #[test]
    fn rotation_examples() {
        let g = DMatrix::identity(3, 3);
        let (x, y) = ([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]);
        let z = rotate_in_plane(&g, &[0.0, 0.0, 2.0], &x, &y, 0.7).unwrap();
        assert_eq!(z, vec![0.0, 0.0, 2.0]);
        let q = rotate_in_plane(&g, &x, &x, &y, std::f64::consts::FRAC_PI_2).unwrap();
        assert!(dist(&q, &y) < 1e-15);
        assert!(matches!(rotate_in_plane(&g, &x, &x, &[0.0, 2.0, 0.0], 0.1), Err(Error::NotOrthonormal(_))));
    }

    #[test]
    fn rotation_first_order_is_minus_wedge() {
        let g = DMatrix::from_row_slice(3, 3, &[2.0, 0.3, 0.0, 0.3, 1.0, 0.1, 0.0, 0.1, 1.5]);
        let plane = crate::tensorlab::Plane::from_slices(&g, &[1.0, 0.2, 0.0], &[0.0, 1.0, 1.0]).unwrap();
        let (x, y) = plane.orthonormal(&g);
        let z = [0.4, -0.7, 0.9];
        let wedge = crate::tensorlab::metric_endomorphism(&g, &x, &y).unwrap();
        let gen = wedge.apply(&nalgebra::DVector::from_column_slice(&z));
        let phis = [1e-1, 3e-2, 1e-2, 3e-3];
        let errs: Vec<f64> = phis
            .iter()
            .map(|&phi| {
                let r = rotate_in_plane(&g, &z, x.as_slice(), y.as_slice(), phi).unwrap();
                (0..3).map(|i| ((r[i] - z[i]) / phi + gen[i]).powi(2)).sum::<f64>().sqrt()
            })
            .collect();
        assert!(log_log_slope(&phis, &errs) >= 0.9);
    }

    #[test]
    fn squaroid_flat_and_sphere() {
        let e = catalog_metric("euclidean", &[("dim", 2.0)]).unwrap();
        let r = squaroid_riemann(&e, &[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0], 1e-2).unwrap();
        assert!((r.eps_prime - 1e-2).abs() < 1e-15);
        assert!(r.k_estimate.abs() < 1e-6);

        let s = catalog_metric("space_form", &[("dim", 2.0), ("c", 1.0)]).unwrap();
        let k1 = squaroid_riemann(&s, &[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0], 1e-2).unwrap();
        assert!((k1.k_estimate - 1.0).abs() < 1e-2, "{}", k1.k_estimate);
        assert!(k1.eps_prime < 1e-2);
    }

    #[test]
    fn squaroid_rejects_non_orthonormal() {
        let e = catalog_metric("euclidean", &[("dim", 2.0)]).unwrap();
        assert!(matches!(
            squaroid_riemann(&e, &[0.0, 0.0], &[1.0, 0.0], &[1.0, 1.0], 1e-2),
            Err(Error::NotOrthonormal(_))
        ));
    }

    #[test]
    fn distance_solver_on_sphere() {
        // chordal oracle: points on the c = 1 model at the origin and on an axis
        let s = catalog_metric("space_form", &[("dim", 2.0), ("c", 1.0)]).unwrap();
        let r: f64 = 0.3;
        let d = geodesic_distance(&s, &[0.0, 0.0], &[r, 0.0], 1e-4).unwrap();
        // radial distance 2·atan(r/2) in the c = 1 stereographic chart
        assert!((d - 2.0 * (r / 2.0).atan()).abs() < 1e-12, "{d}");
    }

    #[test]
    fn richardson_and_slope() {
        assert!((richardson_first_order(1.2, 1.1) - 1.0).abs() < 1e-15);
        assert!((richardson_second_order(1.4, 1.1) - 1.0).abs() < 1e-15);
        let xs = [1.0, 2.0, 4.0];
        let ys = [3.0, 6.0, 12.0];
        assert!((log_log_slope(&xs, &ys) - 1.0).abs() < 1e-14);
    }
}
