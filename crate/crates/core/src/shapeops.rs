//! Submanifold algebra from shape operators in orthonormal frames: the
//! hypersurface principal-curvature case table, the Gauss and Ricci
//! equations, and the Wintgen inequality.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensorlab::Tensor04;

/// Shape operators `A_1, …, A_m` of an `n`-dimensional submanifold of a
/// real space form of curvature `ambient_c`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeOperatorSet {
    n: usize,
    ops: Vec<DMatrix<f64>>,
    ambient_c: f64,
}

impl ShapeOperatorSet {
    /// Validates and symmetrizes the operators. Asymmetry beyond rounding
    /// is rejected rather than silently averaged away.
    pub fn new(ops: Vec<DMatrix<f64>>, ambient_c: f64) -> Result<Self> {
        let Some(first) = ops.first() else {
            return Err(Error::ShapeOperators("at least one operator is required".into()));
        };
        let n = first.nrows();
        if n < 2 {
            return Err(Error::ShapeOperators(format!("dimension {n} < 2")));
        }
        if !ambient_c.is_finite() {
            return Err(Error::NonFinite("ambient curvature"));
        }
        let mut out = Vec::with_capacity(ops.len());
        for (k, a) in ops.into_iter().enumerate() {
            if a.nrows() != n || a.ncols() != n {
                return Err(Error::ShapeOperators(format!("operator {k} is {}x{}, expected {n}x{n}", a.nrows(), a.ncols())));
            }
            if a.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("shape operator"));
            }
            let asym = (&a - a.transpose()).amax();
            if asym > 1e-9 * (1.0 + a.amax()) {
                return Err(Error::ShapeOperators(format!("operator {k} is not symmetric (asymmetry {asym:e})")));
            }
            out.push((&a + a.transpose()) * 0.5);
        }
        Ok(Self { n, ops: out, ambient_c })
    }

    /// Hypersurface with the given principal curvatures (diagonal operator).
    pub fn hypersurface(spectrum: &[f64], ambient_c: f64) -> Result<Self> {
        Self::new(vec![DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(spectrum))], ambient_c)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn codim(&self) -> usize {
        self.ops.len()
    }

    pub fn ops(&self) -> &[DMatrix<f64>] {
        &self.ops
    }

    pub fn ambient_c(&self) -> f64 {
        self.ambient_c
    }

    /// Random operators with entries uniform in [−1, 1].
    pub fn random(rng: &mut impl Rng, n: usize, m: usize, ambient_c: f64) -> Result<Self> {
        let ops = (0..m)
            .map(|_| {
                let mut a = DMatrix::zeros(n, n);
                for i in 0..n {
                    for j in i..n {
                        let v = rng.gen_range(-1.0..=1.0);
                        a[(i, j)] = v;
                        a[(j, i)] = v;
                    }
                }
                a
            })
            .collect();
        Self::new(ops, ambient_c)
    }
}

/// JSON form: `{"ambient_c": 0.0, "operators": [[[..row..], ...], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeOperatorDoc {
    #[serde(default)]
    pub ambient_c: f64,
    pub operators: Vec<Vec<Vec<f64>>>,
}

impl ShapeOperatorDoc {
    pub fn into_set(self) -> Result<ShapeOperatorSet> {
        let ops = self
            .operators
            .iter()
            .enumerate()
            .map(|(k, rows)| {
                let n = rows.len();
                if rows.iter().any(|r| r.len() != n) {
                    return Err(Error::ShapeOperators(format!("operator {k} is not square")));
                }
                Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
            })
            .collect::<Result<Vec<_>>>()?;
        ShapeOperatorSet::new(ops, self.ambient_c)
    }
}

/// Result of matching a principal-curvature spectrum against the
/// hypersurface case table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseReport {
    /// 1..=7, or `None` when no pattern matches.
    pub case: Option<u8>,
    pub constant_curvature: bool,
    pub semi_symmetric: bool,
    pub pseudo_symmetric: bool,
    pub conformally_flat: bool,
    /// Double sectional curvature: `λμ` in cases 6 and 7, `0` in the
    /// semi-symmetric cases 4 and 5, undefined for space forms.
    pub l: Option<f64>,
    /// Distinct nonzero principal curvatures with multiplicities.
    pub nonzero: Vec<(f64, usize)>,
    pub zeros: usize,
}

/// Matches a hypersurface spectrum (any order) against cases (1)–(7).
/// Values within `tol` of each other are identified; a chain of such
/// values spanning more than `tol` is reported as ambiguous.
pub fn classify_principal_curvatures(spectrum: &[f64], tol: f64) -> Result<CaseReport> {
    let n = spectrum.len();
    if n < 3 {
        return Err(Error::ShapeOperators(format!("spectrum length {n} < 3")));
    }
    if spectrum.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("principal curvature"));
    }
    let mut sorted = spectrum.to_vec();
    sorted.sort_by(f64::total_cmp);
    let zeros = sorted.iter().filter(|v| v.abs() <= tol).count();
    if let Some(v) = sorted.iter().find(|v| v.abs() > tol && v.abs() <= 2.0 * tol) {
        return Err(Error::AmbiguousSpectrum(format!("{v:e} is neither clearly zero nor clearly nonzero")));
    }
    let mut groups: Vec<Vec<f64>> = Vec::new();
    for &v in sorted.iter().filter(|v| v.abs() > tol) {
        match groups.last_mut() {
            Some(gr) if v - gr[gr.len() - 1] <= tol => gr.push(v),
            _ => groups.push(vec![v]),
        }
    }
    for gr in &groups {
        if gr[gr.len() - 1] - gr[0] > tol {
            return Err(Error::AmbiguousSpectrum(format!("values {:?} chain across the tolerance", gr)));
        }
    }
    let nonzero: Vec<(f64, usize)> =
        groups.iter().map(|gr| (gr.iter().sum::<f64>() / gr.len() as f64, gr.len())).collect();

    let case = match (nonzero.as_slice(), zeros) {
        ([], _) => Some(1),
        ([_], 0) => Some(2),
        ([(_, 1)], _) => Some(3),
        ([_], _) => Some(4),
        ([(_, 1), (_, 1)], z) if z > 0 => Some(5),
        ([(_, a), (_, b)], 0) if *a == 1 || *b == 1 => Some(6),
        ([_, _], 0) => Some(7),
        _ => None,
    };
    let in_cases = |lo: u8, hi: u8| case.is_some_and(|c| (lo..=hi).contains(&c));
    let max_mult = nonzero.iter().map(|(_, k)| *k).chain([zeros]).max().unwrap_or(0);
    let l = match case {
        Some(6) | Some(7) => Some(nonzero[0].0 * nonzero[1].0),
        Some(4) | Some(5) => Some(0.0),
        _ => None,
    };
    Ok(CaseReport {
        case,
        constant_curvature: in_cases(1, 3),
        semi_symmetric: in_cases(1, 5),
        pseudo_symmetric: in_cases(1, 7),
        // Cartan–Schouten: a principal curvature of multiplicity ≥ n − 1
        conformally_flat: n == 3 || max_mult + 1 >= n,
        l,
        nonzero,
        zeros,
    })
}

/// Gauss equation in an orthonormal frame:
/// `R(X₁,X₂,X₃,X₄) = c̃·G₀ + Σ_α [A_α(X₁,X₄)A_α(X₂,X₃) − A_α(X₁,X₃)A_α(X₂,X₄)]`.
pub fn gauss_curvature_tensor(s: &ShapeOperatorSet) -> Tensor04 {
    let c = s.ambient_c;
    let delta = |i: usize, j: usize| if i == j { 1.0 } else { 0.0 };
    Tensor04::from_fn(s.n, |a, b, cc, d| {
        let mut v = c * (delta(a, d) * delta(b, cc) - delta(a, cc) * delta(b, d));
        for op in &s.ops {
            v += op[(a, d)] * op[(b, cc)] - op[(a, cc)] * op[(b, d)];
        }
        v
    })
}

/// Normal curvature `R⊥(E_i, E_j; ξ_α, ξ_β) = [A_α, A_β]_{ij}`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalCurvature {
    n: usize,
    m: usize,
    data: Vec<f64>,
}

impl NormalCurvature {
    pub fn get(&self, i: usize, j: usize, alpha: usize, beta: usize) -> f64 {
        self.data[((i * self.n + j) * self.m + alpha) * self.m + beta]
    }

    pub fn norm_inf(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

pub fn normal_curvature(s: &ShapeOperatorSet) -> NormalCurvature {
    let (n, m) = (s.n, s.ops.len());
    let mut data = vec![0.0; n * n * m * m];
    for a in 0..m {
        for b in 0..m {
            let comm = &s.ops[a] * &s.ops[b] - &s.ops[b] * &s.ops[a];
            for i in 0..n {
                for j in 0..n {
                    data[((i * n + j) * m + a) * m + b] = comm[(i, j)];
                }
            }
        }
    }
    NormalCurvature { n, m, data }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WintgenQuantities {
    pub rho: f64,
    pub rho_perp: f64,
    pub h2: f64,
    /// `H² − ρ⊥ + c̃ − ρ`; nonnegative by the inequality.
    pub slack: f64,
}

pub fn wintgen_quantities(s: &ShapeOperatorSet) -> WintgenQuantities {
    let n = s.n;
    let norm = 2.0 / (n * (n - 1)) as f64;
    let r = gauss_curvature_tensor(s);
    let rn = normal_curvature(s);
    let mut sec = 0.0;
    let mut perp = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            sec += r.get(i, j, j, i);
            for a in 0..s.ops.len() {
                for b in a + 1..s.ops.len() {
                    perp += rn.get(i, j, a, b).powi(2);
                }
            }
        }
    }
    let rho = norm * sec;
    let rho_perp = norm * perp.sqrt();
    let h2 = s.ops.iter().map(|a| (a.trace() / n as f64).powi(2)).sum::<f64>();
    WintgenQuantities { rho, rho_perp, h2, slack: h2 - rho_perp + s.ambient_c - rho }
}

/// Shape operators of the equality case of the Wintgen inequality:
/// `A₁ = diag(λ+μcosθ, λ−μcosθ, λ, …)`, `A₂ = diag(μsinθ, −μsinθ, 0, …)`,
/// `A₃` with `μ` in the (1,2) entries, the rest zero.
pub fn wintgen_ideal_frames(n: usize, m: usize, lambda: f64, mu: f64, theta: f64, ambient_c: f64) -> Result<ShapeOperatorSet> {
    if n < 2 {
        return Err(Error::ShapeOperators(format!("dimension {n} < 2")));
    }
    if m < 3 {
        return Err(Error::ShapeOperators(format!("codimension {m} < 3; the ideal form needs three normals")));
    }
    let (s, c) = theta.sin_cos();
    let mut a1 = DMatrix::identity(n, n) * lambda;
    a1[(0, 0)] += mu * c;
    a1[(1, 1)] -= mu * c;
    let mut a2 = DMatrix::zeros(n, n);
    a2[(0, 0)] = mu * s;
    a2[(1, 1)] = -mu * s;
    let mut a3 = DMatrix::zeros(n, n);
    a3[(0, 1)] = mu;
    a3[(1, 0)] = mu;
    let mut ops = vec![a1, a2, a3];
    ops.extend((3..m).map(|_| DMatrix::zeros(n, n)));
    ShapeOperatorSet::new(ops, ambient_c)
}
