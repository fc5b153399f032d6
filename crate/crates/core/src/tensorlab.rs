//! Pointwise multilinear algebra on a single tangent space.
//!
//! Index conventions: a (0,4) tensor stores `T[h][i][j][k] = T(X_h, X_i, X_j, X_k)`,
//! a (0,6) tensor stores `T[a][b][c][d][e][f] = T(X_a, X_b, X_c, X_d; X_e, X_f)`,
//! and an [`Endomorphism`] matrix holds in column `j` the components of the
//! image of `e_j`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

fn max_abs<'a>(it: impl IntoIterator<Item = &'a f64>) -> f64 {
    it.into_iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Linear map of a tangent space into itself.
#[derive(Debug, Clone, PartialEq)]
pub struct Endomorphism(pub DMatrix<f64>);

impl Endomorphism {
    pub fn zero(n: usize) -> Self {
        Self(DMatrix::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn apply(&self, z: &DVector<f64>) -> DVector<f64> {
        &self.0 * z
    }

    /// Image component `i` of basis vector `e_j`.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }
}

/// Dense (0,4) tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor04 {
    n: usize,
    data: Vec<f64>,
}

impl Tensor04 {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n.pow(4)] }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize, usize, usize) -> f64) -> Self {
        let mut t = Self::zeros(n);
        for h in 0..n {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        t.data[((h * n + i) * n + j) * n + k] = f(h, i, j, k);
                    }
                }
            }
        }
        t
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, h: usize, i: usize, j: usize, k: usize) -> f64 {
        self.data[((h * self.n + i) * self.n + j) * self.n + k]
    }

    #[inline]
    pub fn set(&mut self, h: usize, i: usize, j: usize, k: usize, v: f64) {
        let n = self.n;
        self.data[((h * n + i) * n + j) * n + k] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn norm_inf(&self) -> f64 {
        max_abs(&self.data)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { n: self.n, data: self.data.iter().map(|v| v * s).collect() }
    }

    pub fn axpy(&self, s: f64, other: &Tensor04) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + s * b).collect(),
        }
    }

    /// `T(a, b, c, d)` for arbitrary vectors.
    pub fn contract(&self, a: &[f64], b: &[f64], c: &[f64], d: &[f64]) -> f64 {
        let n = self.n;
        let mut s = 0.0;
        for h in 0..n {
            if a[h] == 0.0 {
                continue;
            }
            for i in 0..n {
                if b[i] == 0.0 {
                    continue;
                }
                let ab = a[h] * b[i];
                for j in 0..n {
                    if c[j] == 0.0 {
                        continue;
                    }
                    let abc = ab * c[j];
                    for k in 0..n {
                        s += abc * d[k] * self.get(h, i, j, k);
                    }
                }
            }
        }
        s
    }

    /// Curvature operator family of a (0,4) tensor: `op(e, f)` is the
    /// endomorphism `Z ↦ T(e_e, e_f) Z` with `g(T(X,Y)Z, W) = T(X,Y,Z,W)`.
    pub fn operator(&self, g_inv: &DMatrix<f64>, e: usize, f: usize) -> Endomorphism {
        let n = self.n;
        let mut m = DMatrix::zeros(n, n);
        for c in 0..n {
            for i in 0..n {
                let mut s = 0.0;
                for d in 0..n {
                    s += self.get(e, f, c, d) * g_inv[(d, i)];
                }
                m[(i, c)] = s;
            }
        }
        Endomorphism(m)
    }

    /// Largest violation of the curvature-tensor symmetries, relative to
    /// `1 + ‖T‖∞`: antisymmetry in each pair, pair symmetry and the first
    /// Bianchi identity.
    pub fn curvature_like_residual(&self) -> CurvatureLikeResidual {
        let n = self.n;
        let (mut anti, mut pair, mut bianchi) = (0.0f64, 0.0f64, 0.0f64);
        for h in 0..n {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let t = self.get(h, i, j, k);
                        anti = anti.max((t + self.get(i, h, j, k)).abs());
                        anti = anti.max((t + self.get(h, i, k, j)).abs());
                        pair = pair.max((t - self.get(j, k, h, i)).abs());
                        let cyc = t + self.get(i, j, h, k) + self.get(j, h, i, k);
                        bianchi = bianchi.max(cyc.abs());
                    }
                }
            }
        }
        let scale = 1.0 + self.norm_inf();
        CurvatureLikeResidual {
            antisymmetry: anti / scale,
            pair_symmetry: pair / scale,
            bianchi: bianchi / scale,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureLikeResidual {
    pub antisymmetry: f64,
    pub pair_symmetry: f64,
    pub bianchi: f64,
}

impl CurvatureLikeResidual {
    pub fn max(&self) -> f64 {
        self.antisymmetry.max(self.pair_symmetry).max(self.bianchi)
    }
}

/// Dense (0,6) tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor06 {
    n: usize,
    data: Vec<f64>,
}

impl Tensor06 {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n.pow(6)] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn offset(&self, idx: [usize; 6]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.n + i)
    }

    #[inline]
    pub fn get(&self, idx: [usize; 6]) -> f64 {
        self.data[self.offset(idx)]
    }

    pub fn set(&mut self, idx: [usize; 6], v: f64) {
        let o = self.offset(idx);
        self.data[o] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn norm_inf(&self) -> f64 {
        max_abs(&self.data)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { n: self.n, data: self.data.iter().map(|v| v * s).collect() }
    }

    pub fn axpy(&self, s: f64, other: &Tensor06) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + s * b).collect(),
        }
    }

    /// `T(v1, v2, v3, v4; x, y)`.
    pub fn contract(&self, v: [&[f64]; 4], x: &[f64], y: &[f64]) -> f64 {
        let n = self.n;
        // Contract the last pair first: it yields a (0,4) slice.
        let mut slice = vec![0.0; n.pow(4)];
        for e in 0..n {
            for f in 0..n {
                let w = x[e] * y[f];
                if w == 0.0 {
                    continue;
                }
                for (k, s) in slice.iter_mut().enumerate() {
                    *s += w * self.data[(k * n + e) * n + f];
                }
            }
        }
        Tensor04 { n, data: slice }.contract(v[0], v[1], v[2], v[3])
    }

    /// Residuals of the algebraic symmetries shared by `R·R` and `∧g·R`,
    /// each relative to `1 + ‖T‖∞`.
    pub fn proposition_residuals(&self) -> PropositionResidual {
        let n = self.n;
        let mut r = PropositionResidual::default();
        let mut idx = [0usize; 6];
        let total = n.pow(6);
        for lin in 0..total {
            let mut rem = lin;
            for slot in (0..6).rev() {
                idx[slot] = rem % n;
                rem /= n;
            }
            let [x1, x2, x3, x4, x, y] = idx;
            let t = self.data[lin];
            r.first_pair = r.first_pair.max((t + self.get([x2, x1, x3, x4, x, y])).abs());
            r.block_swap = r.block_swap.max((t - self.get([x3, x4, x1, x2, x, y])).abs());
            let b = t + self.get([x1, x3, x4, x2, x, y]) + self.get([x1, x4, x2, x3, x, y]);
            r.bianchi = r.bianchi.max(b.abs());
            r.last_pair = r.last_pair.max((t + self.get([x1, x2, x3, x4, y, x])).abs());
            let d = t + self.get([x3, x4, x, y, x1, x2]) + self.get([x, y, x1, x2, x3, x4]);
            r.cyclic_blocks = r.cyclic_blocks.max(d.abs());
        }
        let scale = 1.0 + self.norm_inf();
        r.first_pair /= scale;
        r.block_swap /= scale;
        r.bianchi /= scale;
        r.last_pair /= scale;
        r.cyclic_blocks /= scale;
        r
    }
}

/// Residuals for properties a)–d) of a (0,6) curvature-derived tensor.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PropositionResidual {
    /// a) antisymmetry in `(X1, X2)`
    pub first_pair: f64,
    /// a) `(X1,X2,X3,X4) = (X3,X4,X1,X2)`
    pub block_swap: f64,
    /// b) cyclic sum over slots 2–4
    pub bianchi: f64,
    /// c) antisymmetry in `(X, Y)`
    pub last_pair: f64,
    /// d) cyclic sum over the three pair blocks
    pub cyclic_blocks: f64,
}

impl PropositionResidual {
    pub fn max(&self) -> f64 {
        [self.first_pair, self.block_swap, self.bianchi, self.last_pair, self.cyclic_blocks]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

/// `Z ↦ g(y, Z) x − g(x, Z) y`.
pub fn metric_endomorphism(g: &DMatrix<f64>, x: &DVector<f64>, y: &DVector<f64>) -> Result<Endomorphism> {
    let n = g.nrows();
    check_dim(n, g.ncols())?;
    check_dim(n, x.len())?;
    check_dim(n, y.len())?;
    let gx = g * x;
    let gy = g * y;
    Ok(Endomorphism(x * gy.transpose() - y * gx.transpose()))
}

/// Metric endomorphism of two coordinate basis vectors, `e_e ∧g e_f`.
pub fn basis_metric_endomorphism(g: &DMatrix<f64>, e: usize, f: usize) -> Endomorphism {
    let n = g.nrows();
    let mut m = DMatrix::zeros(n, n);
    for j in 0..n {
        m[(e, j)] += g[(f, j)];
        m[(f, j)] -= g[(e, j)];
    }
    Endomorphism(m)
}

/// Kulkarni–Nomizu product,
/// `(A∧B)_{hijk} = A_{hk}B_{ij} + A_{ij}B_{hk} − A_{hj}B_{ik} − A_{ik}B_{hj}`.
pub fn kulkarni_nomizu(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<Tensor04> {
    let n = a.nrows();
    check_dim(n, a.ncols())?;
    check_dim(n, b.nrows())?;
    check_dim(n, b.ncols())?;
    Ok(Tensor04::from_fn(n, |h, i, j, k| {
        a[(h, k)] * b[(i, j)] + a[(i, j)] * b[(h, k)] - a[(h, j)] * b[(i, k)] - a[(i, k)] * b[(h, j)]
    }))
}

/// `G = ½ g∧g`.
pub fn big_g(g: &DMatrix<f64>) -> Tensor04 {
    let n = g.nrows();
    Tensor04::from_fn(n, |h, i, j, k| g[(h, k)] * g[(i, j)] - g[(h, j)] * g[(i, k)])
}

/// Derivation action on a (0,4) tensor:
/// `(E·T)(X1..X4) = −T(EX1,X2,X3,X4) − … − T(X1,X2,X3,EX4)`.
pub fn act_on_04(e: &Endomorphism, t: &Tensor04) -> Result<Tensor04> {
    let n = t.dim();
    check_dim(n, e.dim())?;
    let mut out = Tensor04::zeros(n);
    act_on_04_into(e, t, |idx, v| out.set(idx[0], idx[1], idx[2], idx[3], v));
    Ok(out)
}

fn act_on_04_into(e: &Endomorphism, t: &Tensor04, mut sink: impl FnMut([usize; 4], f64)) {
    let n = t.dim();
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let mut s = 0.0;
                    for m in 0..n {
                        s += e.get(m, a) * t.get(m, b, c, d)
                            + e.get(m, b) * t.get(a, m, c, d)
                            + e.get(m, c) * t.get(a, b, m, d)
                            + e.get(m, d) * t.get(a, b, c, m);
                    }
                    sink([a, b, c, d], -s);
                }
            }
        }
    }
}

/// Derivation action on a (0,2) tensor: `(E·S)(X1,X2) = −S(EX1,X2) − S(X1,EX2)`.
pub fn act_on_02(e: &Endomorphism, s: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = s.nrows();
    check_dim(n, s.ncols())?;
    check_dim(n, e.dim())?;
    // S(EX1, X2) = (Eᵀ S)_{12}
    Ok(-(e.0.transpose() * s + s * &e.0))
}

/// `comps[a][b][c][d][e][f] = (op(e_e, e_f)·T)(e_a, e_b, e_c, e_d)`.
pub fn tensor06_from_operator(
    t: &Tensor04,
    op: impl Fn(usize, usize) -> Endomorphism,
) -> Result<Tensor06> {
    let n = t.dim();
    let mut out = Tensor06::zeros(n);
    for e in 0..n {
        for f in 0..n {
            let endo = op(e, f);
            check_dim(n, endo.dim())?;
            act_on_04_into(&endo, t, |[a, b, c, d], v| out.set([a, b, c, d, e, f], v));
        }
    }
    Ok(out)
}

/// Componentwise inner product of two (0,6) tensors.
pub fn frobenius_inner(t1: &Tensor06, t2: &Tensor06) -> Result<f64> {
    check_dim(t1.dim(), t2.dim())?;
    Ok(dot(t1.as_slice(), t2.as_slice()))
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A 2-plane spanned by an ordered pair of tangent vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    pub v: DVector<f64>,
    pub w: DVector<f64>,
}

impl Plane {
    /// Checks that the `g`-Gram determinant of the pair is positive.
    pub fn new(g: &DMatrix<f64>, v: DVector<f64>, w: DVector<f64>) -> Result<Self> {
        check_dim(g.nrows(), v.len())?;
        check_dim(g.nrows(), w.len())?;
        if v.iter().chain(w.iter()).any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("plane vector"));
        }
        let p = Self { v, w };
        let det = p.gram_det(g);
        let scale = inner(g, &p.v, &p.v) * inner(g, &p.w, &p.w);
        if !(det > 1e-14 * scale) || scale == 0.0 {
            return Err(Error::DegeneratePlane(det));
        }
        Ok(p)
    }

    pub fn from_slices(g: &DMatrix<f64>, v: &[f64], w: &[f64]) -> Result<Self> {
        Self::new(g, DVector::from_column_slice(v), DVector::from_column_slice(w))
    }

    /// `G(v, w, w, v) = g(v,v) g(w,w) − g(v,w)²`.
    pub fn gram_det(&self, g: &DMatrix<f64>) -> f64 {
        let vv = inner(g, &self.v, &self.v);
        let ww = inner(g, &self.w, &self.w);
        let vw = inner(g, &self.v, &self.w);
        vv * ww - vw * vw
    }

    /// `g`-orthonormal basis of the same oriented plane (Gram–Schmidt).
    pub fn orthonormal(&self, g: &DMatrix<f64>) -> (DVector<f64>, DVector<f64>) {
        let e1 = &self.v / inner(g, &self.v, &self.v).sqrt();
        let w = &self.w - &e1 * inner(g, &e1, &self.w);
        let e2 = &w / inner(g, &w, &w).sqrt();
        (e1, e2)
    }
}

/// `g(a, b)`.
pub fn inner(g: &DMatrix<f64>, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a.transpose() * g * b)[(0, 0)]
}
