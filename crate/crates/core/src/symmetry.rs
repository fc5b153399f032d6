//! Sectional curvatures of Riemann and Deszcz, pseudo-symmetry fits and the
//! classification ladder.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::curvature::{curvature_bundle, CurvatureBundle, DiffConfig, TolerancePolicy};
use crate::error::{Error, Result};
use crate::metricspace::{ChartPoint, MetricField};
use crate::tensorlab::{dot, Plane, Tensor06};

fn check_plane(b: &CurvatureBundle, pi: &Plane) -> Result<()> {
    let n = b.dim();
    for len in [pi.v.len(), pi.w.len()] {
        if len != n {
            return Err(Error::DimensionMismatch { expected: n, got: len });
        }
    }
    Ok(())
}

/// `K(p, π) = R(v,w,w,v) / G(v,w,w,v)`.
pub fn sectional_k(b: &CurvatureBundle, pi: &Plane) -> Result<f64> {
    check_plane(b, pi)?;
    let (v, w) = (pi.v.as_slice(), pi.w.as_slice());
    let den = b.big_g.contract(v, w, w, v);
    if !(den > 0.0) {
        return Err(Error::DegeneratePlane(den));
    }
    Ok(b.r04.contract(v, w, w, v) / den)
}

/// Outcome of a Deszcz curvature evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DeszczValue {
    Value { value: f64 },
    /// `(∧g·R)(v,w,w,v; x,y)` is below the guard.
    CurvatureIndependent { denominator: f64 },
}

impl DeszczValue {
    pub fn value(&self) -> Option<f64> {
        match self {
            Self::Value { value } => Some(*value),
            Self::CurvatureIndependent { .. } => None,
        }
    }
}

/// `L(p, π, π̄) = (R·R)(v,w,w,v; x,y) / (∧g·R)(v,w,w,v; x,y)`.
///
/// The guard scales with `‖v∧w‖²·‖x∧y‖`, the homogeneity of both
/// contractions, so rescaling either basis never flips the outcome.
pub fn deszcz_l(b: &CurvatureBundle, pi: &Plane, pibar: &Plane) -> Result<DeszczValue> {
    check_plane(b, pi)?;
    check_plane(b, pibar)?;
    let (v, w) = (pi.v.as_slice(), pi.w.as_slice());
    let (x, y) = (pibar.v.as_slice(), pibar.w.as_slice());
    let num = b.rr.contract([v, w, w, v], x, y);
    let den = b.tach_r.contract([v, w, w, v], x, y);
    let guard =
        1e-10 * (1.0 + b.tach_r.norm_inf()) * pi.gram_det(&b.g) * pibar.gram_det(&b.g).sqrt();
    if den.abs() > guard {
        Ok(DeszczValue::Value { value: num / den })
    } else {
        Ok(DeszczValue::CurvatureIndependent { denominator: den })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FitVerdict {
    Proportional,
    ZeroDenominatorZeroNumerator,
    ZeroDenominatorNonzeroNumerator,
    NotProportional,
}

/// Least-squares fit of `num ≈ L·den`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PseudoFit {
    pub coefficient: f64,
    pub residual: f64,
    pub denominator_norm: f64,
    pub verdict: FitVerdict,
}

impl PseudoFit {
    /// Proportional, or both sides vanish.
    pub fn holds(&self) -> bool {
        matches!(self.verdict, FitVerdict::Proportional | FitVerdict::ZeroDenominatorZeroNumerator)
    }

    /// The fitted coefficient when it is meaningful.
    pub fn coefficient_if_proportional(&self) -> Option<f64> {
        (self.verdict == FitVerdict::Proportional).then_some(self.coefficient)
    }
}

fn norm_inf(s: &[f64]) -> f64 {
    s.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Fits two component arrays of the same shape.
pub fn fit_slices(num: &[f64], den: &[f64], tol: &TolerancePolicy) -> Result<PseudoFit> {
    if num.len() != den.len() {
        return Err(Error::DimensionMismatch { expected: num.len(), got: den.len() });
    }
    let num_norm = norm_inf(num);
    let den_norm = norm_inf(den);
    if !(num_norm.is_finite() && den_norm.is_finite()) {
        return Err(Error::NonFinite("fit input"));
    }
    if den_norm <= tol.zero {
        let verdict = if num_norm <= tol.zero {
            FitVerdict::ZeroDenominatorZeroNumerator
        } else {
            FitVerdict::ZeroDenominatorNonzeroNumerator
        };
        return Ok(PseudoFit { coefficient: 0.0, residual: num_norm, denominator_norm: den_norm, verdict });
    }
    let l = dot(num, den) / dot(den, den);
    let worst = num.iter().zip(den).fold(0.0f64, |m, (a, b)| m.max((a - l * b).abs()));
    let residual = worst / (1.0 + num_norm);
    let verdict =
        if residual <= tol.proportional { FitVerdict::Proportional } else { FitVerdict::NotProportional };
    Ok(PseudoFit { coefficient: l, residual, denominator_norm: den_norm, verdict })
}

/// Fits `T_num = L·T_den`, e.g. `R·R = L_R ∧g·R`.
pub fn fit_pseudo_coefficient(num: &Tensor06, den: &Tensor06, tol: &TolerancePolicy) -> Result<PseudoFit> {
    if num.dim() != den.dim() {
        return Err(Error::DimensionMismatch { expected: num.dim(), got: den.dim() });
    }
    fit_slices(num.as_slice(), den.as_slice(), tol)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenCluster {
    pub value: f64,
    pub multiplicity: usize,
}

/// Sorted eigenvalues of the Ricci operator `g⁻¹S` and their clusters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RicciSpectrum {
    pub eigenvalues: Vec<f64>,
    pub clusters: Vec<EigenCluster>,
}

impl RicciSpectrum {
    pub fn einstein(&self) -> bool {
        self.clusters.len() == 1
    }

    pub fn quasi_einstein(&self) -> bool {
        let n = self.eigenvalues.len();
        self.clusters.iter().any(|c| c.multiplicity + 1 >= n)
    }

    /// Multiplicities in ascending eigenvalue order.
    pub fn pattern(&self) -> Vec<usize> {
        self.clusters.iter().map(|c| c.multiplicity).collect()
    }
}

/// Groups sorted values whose neighbours lie within `tol`.
pub fn cluster_sorted(values: &[f64], tol: f64) -> Vec<EigenCluster> {
    let mut out: Vec<(f64, usize, f64)> = Vec::new();
    for &v in values {
        match out.last_mut() {
            Some((sum, k, last)) if v - *last <= tol => {
                *sum += v;
                *k += 1;
                *last = v;
            }
            _ => out.push((v, 1, v)),
        }
    }
    out.into_iter().map(|(s, k, _)| EigenCluster { value: s / k as f64, multiplicity: k }).collect()
}

pub fn ricci_spectrum(b: &CurvatureBundle, tol: &TolerancePolicy) -> Result<RicciSpectrum> {
    if b.ricci.iter().chain(b.g.iter()).any(|v| !v.is_finite()) {
        return Err(Error::Eigen("non-finite Ricci or metric entries".into()));
    }
    let chol = b.g.clone().cholesky().ok_or(Error::SingularMetric)?;
    let l_inv = chol.l().try_inverse().ok_or(Error::SingularMetric)?;
    let m = &l_inv * &b.ricci * l_inv.transpose();
    let m = (&m + m.transpose()) * 0.5;
    let mut eigenvalues: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    eigenvalues.sort_by(f64::total_cmp);
    let scale = 1.0 + eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let clusters = cluster_sorted(&eigenvalues, tol.cluster * scale);
    Ok(RicciSpectrum { eigenvalues, clusters })
}

/// Dimension of `{z : R(z, e_b)e_c = 0 for all b, c}`.
pub fn nullity_index(b: &CurvatureBundle, tol: &TolerancePolicy) -> usize {
    let n = b.dim();
    let m = DMatrix::from_fn(n * n * n, n, |row, a| {
        let (bb, c, d) = (row / (n * n), (row / n) % n, row % n);
        b.r13.get(a, bb, c, d)
    });
    let sv = m.singular_values();
    let threshold = tol.zero * (1.0 + b.r13.norm_inf());
    n - sv.iter().filter(|s| **s > threshold).count()
}

/// A random non-degenerate plane with coordinates uniform in [−1, 1].
pub fn random_plane(rng: &mut impl Rng, g: &DMatrix<f64>) -> Plane {
    let n = g.nrows();
    loop {
        let v = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        let w = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        if let Ok(p) = Plane::new(g, v, w) {
            if p.gram_det(g) > 1e-3 {
                return p;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Flags {
    pub flat: bool,
    pub constant_curvature: bool,
    /// `c` in `R = cG` when `constant_curvature` holds.
    pub curvature_constant: Option<f64>,
    pub einstein: bool,
    pub quasi_einstein: bool,
    pub semi_symmetric: bool,
    pub pseudo_symmetric: bool,
    pub pseudo_symmetric_weyl: bool,
}

impl Flags {
    /// Lifts lower rungs into higher ones: flat ⇒ constant curvature ⇒
    /// semi-symmetric ⇒ pseudo-symmetric, and Einstein ⇒ quasi-Einstein.
    fn enforce_ladder(&mut self) {
        if self.flat {
            self.constant_curvature = true;
            self.curvature_constant.get_or_insert(0.0);
        }
        self.semi_symmetric |= self.constant_curvature;
        self.pseudo_symmetric |= self.semi_symmetric;
        self.quasi_einstein |= self.einstein;
    }

    pub fn ladder_is_monotone(&self) -> bool {
        (!self.flat || self.constant_curvature)
            && (!self.constant_curvature || self.semi_symmetric)
            && (!self.semi_symmetric || self.pseudo_symmetric)
            && (!self.einstein || self.quasi_einstein)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleStats {
    pub count: usize,
    pub mean: f64,
    pub std_dev: f64,
    pub min: f64,
    pub max: f64,
}

impl SampleStats {
    pub fn from_values(v: &[f64]) -> Option<Self> {
        if v.is_empty() {
            return None;
        }
        let k = v.len() as f64;
        let mean = v.iter().sum::<f64>() / k;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0).max(1.0);
        Some(Self {
            count: v.len(),
            mean,
            std_dev: var.sqrt(),
            min: v.iter().copied().fold(f64::INFINITY, f64::min),
            max: v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        })
    }

    pub fn max_deviation(&self) -> f64 {
        (self.max - self.mean).max(self.mean - self.min)
    }
}

/// Per-point classification record.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointRecord {
    pub point: Vec<f64>,
    pub flags: Flags,
    pub l_r: Option<f64>,
    pub l_c: Option<f64>,
    pub curvature_fit: PseudoFit,
    pub pseudo_fit: PseudoFit,
    pub weyl_fit: PseudoFit,
    pub scalar: f64,
    pub ricci_spectrum: RicciSpectrum,
    pub nullity_index: usize,
    pub sectional: Option<SampleStats>,
    /// Deszcz curvature over the curvature-dependent sampled plane pairs.
    pub deszcz: Option<SampleStats>,
    pub curvature_independent_pairs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Constancy {
    pub mean: f64,
    pub max_deviation: f64,
    pub constant: bool,
}

fn constancy(values: &[f64], tol: f64) -> Option<Constancy> {
    let stats = SampleStats::from_values(values)?;
    let dev = stats.max_deviation();
    Some(Constancy { mean: stats.mean, max_deviation: dev, constant: dev <= tol * (1.0 + stats.mean.abs()) })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregate {
    /// Flags holding at every sampled point.
    pub flags: Flags,
    pub l_r: Option<Constancy>,
    pub l_c: Option<Constancy>,
    /// Cross-point constancy of `c` when every point has constant curvature.
    pub curvature_constant: Option<Constancy>,
    /// False for n = 2, where pointwise isotropy does not force constancy.
    pub schur_applies: bool,
    pub deszcz: Option<SampleStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationReport {
    pub dim: usize,
    pub per_point: Vec<PointRecord>,
    pub aggregate: Aggregate,
    /// Threshold-proximity warnings; empty on a clean run.
    pub diagnostics: Vec<String>,
}

/// Classifies one algebraic curvature bundle. `planes` random plane pairs
/// are drawn from `rng` for the sectional and Deszcz statistics.
pub fn classify_bundle(
    b: &CurvatureBundle,
    planes: usize,
    tol: &TolerancePolicy,
    rng: &mut impl Rng,
) -> Result<PointRecord> {
    let r_norm = b.r04.norm_inf();
    let flat = r_norm / (1.0 + b.big_g.norm_inf()) <= tol.zero;
    let curvature_fit = fit_slices(b.r04.as_slice(), b.big_g.as_slice(), tol)?;
    let semi = b.rr.norm_inf() / (1.0 + r_norm).powi(2) <= tol.zero;
    let pseudo_fit = fit_pseudo_coefficient(&b.rr, &b.tach_r, tol)?;
    let weyl_fit = fit_pseudo_coefficient(&b.cc, &b.tach_c, tol)?;
    let spectrum = ricci_spectrum(b, tol)?;

    let mut flags = Flags {
        flat,
        constant_curvature: curvature_fit.verdict == FitVerdict::Proportional,
        curvature_constant: curvature_fit.coefficient_if_proportional(),
        einstein: spectrum.einstein(),
        quasi_einstein: spectrum.quasi_einstein(),
        semi_symmetric: semi,
        pseudo_symmetric: pseudo_fit.holds(),
        pseudo_symmetric_weyl: weyl_fit.holds(),
    };
    flags.enforce_ladder();
    let l_r = if flags.semi_symmetric && !flags.constant_curvature {
        // R·R = 0 against a nonzero Tachibana tensor
        Some(pseudo_fit.coefficient_if_proportional().unwrap_or(0.0))
    } else {
        pseudo_fit.coefficient_if_proportional()
    };

    let mut ks = Vec::with_capacity(planes);
    let mut ls = Vec::with_capacity(planes);
    let mut independent = 0;
    for _ in 0..planes {
        let pi = random_plane(rng, &b.g);
        let pibar = random_plane(rng, &b.g);
        ks.push(sectional_k(b, &pi)?);
        match deszcz_l(b, &pi, &pibar)? {
            DeszczValue::Value { value } => ls.push(value),
            DeszczValue::CurvatureIndependent { .. } => independent += 1,
        }
    }

    Ok(PointRecord {
        point: b.point.as_ref().map(|p| p.coords().to_vec()).unwrap_or_default(),
        flags,
        l_r,
        l_c: weyl_fit.coefficient_if_proportional(),
        curvature_fit,
        pseudo_fit,
        weyl_fit,
        scalar: b.scalar,
        nullity_index: nullity_index(b, tol),
        ricci_spectrum: spectrum,
        sectional: SampleStats::from_values(&ks),
        deszcz: SampleStats::from_values(&ls),
        curvature_independent_pairs: independent,
    })
}

fn near_threshold(value: f64, threshold: f64) -> bool {
    value > threshold / 10.0 && value <= threshold * 10.0
}

/// Classifies `field` at `points`. Bundles are computed in parallel; each
/// point draws its planes from its own stream of the seeded generator, so
/// the report does not depend on scheduling.
pub fn classify(
    field: &MetricField,
    points: &[ChartPoint],
    planes_per_point: usize,
    cfg: &DiffConfig,
    seed: u64,
) -> Result<ClassificationReport> {
    if points.is_empty() {
        return Err(Error::Config("no sample points".into()));
    }
    let tol = cfg.tolerance;
    let per_point: Vec<PointRecord> = points
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let b = curvature_bundle(field, p, cfg)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64 + 1);
            classify_bundle(&b, planes_per_point, &tol, &mut rng)
        })
        .collect::<Result<_>>()?;
    Ok(summarize(field.dim(), per_point, &tol))
}

/// Aggregates per-point records and collects threshold diagnostics.
pub fn summarize(dim: usize, per_point: Vec<PointRecord>, tol: &TolerancePolicy) -> ClassificationReport {
    let all = |f: fn(&Flags) -> bool| per_point.iter().all(|r| f(&r.flags));
    let cs: Vec<f64> = per_point.iter().filter_map(|r| r.flags.curvature_constant).collect();
    let curvature_constant = if cs.len() == per_point.len() { constancy(&cs, tol.constancy) } else { None };
    let mut flags = Flags {
        flat: all(|f| f.flat),
        constant_curvature: all(|f| f.constant_curvature),
        curvature_constant: None,
        einstein: all(|f| f.einstein),
        quasi_einstein: all(|f| f.quasi_einstein),
        semi_symmetric: all(|f| f.semi_symmetric),
        pseudo_symmetric: all(|f| f.pseudo_symmetric),
        pseudo_symmetric_weyl: all(|f| f.pseudo_symmetric_weyl),
    };
    if let Some(c) = &curvature_constant {
        if c.constant {
            flags.curvature_constant = Some(c.mean);
        }
    }
    let lr: Vec<f64> = per_point.iter().filter_map(|r| r.l_r).collect();
    let lc: Vec<f64> = per_point.iter().filter_map(|r| r.l_c).collect();
    let ls: Vec<f64> = per_point.iter().filter_map(|r| r.deszcz.map(|d| d.mean)).collect();

    let mut diagnostics = Vec::new();
    for (i, r) in per_point.iter().enumerate() {
        for (name, fit) in [("curvature", &r.curvature_fit), ("pseudo", &r.pseudo_fit), ("weyl", &r.weyl_fit)] {
            if fit.verdict != FitVerdict::ZeroDenominatorZeroNumerator
                && fit.verdict != FitVerdict::ZeroDenominatorNonzeroNumerator
                && near_threshold(fit.residual, tol.proportional)
            {
                diagnostics.push(format!("point {i}: {name} fit residual {:e} near threshold", fit.residual));
            }
            if fit.denominator_norm > 0.0 && near_threshold(fit.denominator_norm, tol.zero) {
                diagnostics.push(format!(
                    "point {i}: {name} fit denominator {:e} near zero threshold",
                    fit.denominator_norm
                ));
            }
        }
    }
    let l_r = constancy(&lr, tol.constancy);
    if flags.pseudo_symmetric && lr.len() == per_point.len() {
        if let Some(c) = &l_r {
            if !c.constant {
                diagnostics.push(format!("L_R varies across points (max deviation {:e})", c.max_deviation));
            }
        }
    }
    ClassificationReport {
        dim,
        aggregate: Aggregate {
            flags,
            l_r,
            l_c: constancy(&lc, tol.constancy),
            curvature_constant,
            schur_applies: dim >= 3,
            deszcz: SampleStats::from_values(&ls),
        },
        per_point,
        diagnostics,
    }
}
