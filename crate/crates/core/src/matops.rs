//! Dense complex matrices.
//!
//! Everything downstream works with tiny matrices (d ≤ ~32): point values of
//! inner functions, Fourier coefficients, contractions and their defect
//! operators, and the finite matrices of truncated Toeplitz operators. The
//! kernels here are therefore simple and exact-minded rather than blocked:
//! cyclic Jacobi for Hermitian eigenproblems, one-sided Jacobi for singular
//! values, and partially pivoted LU for solves.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Margin below 1 that a contraction must keep to count as strict.
pub const EPS_STRICT: f64 = 1e-6;
/// Tolerance for Hermitian / positive-semidefinite acceptance.
pub const TOL_PSD: f64 = 1e-10;
/// Largest pivot ratio accepted by [`CMat::solve`].
pub const COND_MAX: f64 = 1e12;

const JACOBI_MAX_SWEEPS: usize = 100;

/// Dense complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

/// Which defect operator to form from a contraction `W`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `D_{W*} = (I − W W*)^{1/2}`
    Left,
    /// `D_W = (I − W* W)^{1/2}`
    Right,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(d: usize) -> Self {
        let mut m = CMat::zeros(d, d);
        for i in 0..d {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        CMat { rows, cols, data }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(CMat { rows, cols, data })
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let mut m = CMat::zeros(diag.len(), diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(v, 0.0);
        }
        m
    }

    /// Column vector from entries.
    pub fn column_vector(entries: &[C64]) -> Self {
        CMat { rows: entries.len(), cols: 1, data: entries.to_vec() }
    }

    pub fn scalar(z: C64) -> Self {
        CMat { rows: 1, cols: 1, data: vec![z] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    pub fn column(&self, c: usize) -> Vec<C64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn adjoint(&self) -> CMat {
        CMat::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn transpose(&self) -> CMat {
        CMat::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn scale(&self, s: C64) -> CMat {
        CMat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| x * s).collect() }
    }

    pub fn scale_real(&self, s: f64) -> CMat {
        self.scale(C64::new(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Hilbert–Schmidt inner product `tr(B* A)`.
    pub fn hs_inner(&self, other: &CMat) -> C64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a * b.conj()).sum()
    }

    pub fn try_mul(&self, other: &CMat) -> Result<CMat> {
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = CMat::zeros(self.rows, other.cols);
        matmul_into(&self.data, self.rows, self.cols, &other.data, other.cols, &mut out.data);
        Ok(out)
    }

    pub fn hermitian_part(&self) -> CMat {
        let adj = self.adjoint();
        CMat::from_fn(self.rows, self.cols, |r, c| (self[(r, c)] + adj[(r, c)]) * 0.5)
    }

    /// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
    ///
    /// Returns eigenvalues in ascending order and the unitary whose columns
    /// are the matching eigenvectors. Only the Hermitian part of `self` is
    /// used.
    pub fn hermitian_eig(&self) -> (Vec<f64>, CMat) {
        assert!(self.is_square(), "hermitian_eig needs a square matrix");
        let n = self.rows;
        let mut a = self.hermitian_part();
        let mut v = CMat::identity(n);
        let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);
        for _ in 0..JACOBI_MAX_SWEEPS {
            let off: f64 = (0..n)
                .flat_map(|p| (0..n).filter(move |&q| q != p).map(move |q| (p, q)))
                .map(|(p, q)| a[(p, q)].norm_sqr())
                .sum::<f64>()
                .sqrt();
            if off <= 1e-17 * scale {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[(p, q)];
                    if apq.norm() <= 1e-300 {
                        continue;
                    }
                    let rot = JacobiRotation::new(a[(p, p)].re, a[(q, q)].re, apq);
                    rot.apply_right(&mut a, p, q);
                    rot.apply_left_adjoint(&mut a, p, q);
                    rot.apply_right(&mut v, p, q);
                    a[(p, q)] = C64::new(0.0, 0.0);
                    a[(q, p)] = C64::new(0.0, 0.0);
                    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
                }
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
        let values = order.iter().map(|&i| a[(i, i)].re).collect();
        let vectors = CMat::from_fn(n, n, |r, c| v[(r, order[c])]);
        (values, vectors)
    }

    /// Singular values in descending order (one-sided Jacobi).
    pub fn singular_values(&self) -> Vec<f64> {
        if self.rows == 0 || self.cols == 0 {
            return Vec::new();
        }
        // Work on whichever orientation has no more columns than rows.
        let mut a = if self.cols > self.rows { self.adjoint() } else { self.clone() };
        let (m, n) = a.shape();
        let col_dot = |a: &CMat, p: usize, q: usize| -> C64 {
            (0..m).map(|r| a[(r, p)].conj() * a[(r, q)]).sum()
        };
        for _ in 0..JACOBI_MAX_SWEEPS {
            let mut rotated = false;
            for p in 0..n {
                for q in (p + 1)..n {
                    let alpha = col_dot(&a, p, p).re;
                    let beta = col_dot(&a, q, q).re;
                    let gamma = col_dot(&a, p, q);
                    if gamma.norm() <= 1e-15 * (alpha * beta).sqrt() || gamma.norm() <= 1e-300 {
                        continue;
                    }
                    rotated = true;
                    JacobiRotation::new(alpha, beta, gamma).apply_right(&mut a, p, q);
                }
            }
            if !rotated {
                break;
            }
        }
        let mut sv: Vec<f64> = (0..n).map(|c| col_dot(&a, c, c).re.max(0.0).sqrt()).collect();
        sv.sort_by(|x, y| y.total_cmp(x));
        sv
    }

    /// Largest singular value.
    pub fn operator_norm(&self) -> f64 {
        self.singular_values().first().copied().unwrap_or(0.0)
    }

    /// Number of singular values above `rel_tol · σ_max`.
    pub fn rank(&self, rel_tol: f64) -> usize {
        let sv = self.singular_values();
        match sv.first() {
            Some(&top) if top > 0.0 => sv.iter().filter(|&&s| s > rel_tol * top).count(),
            _ => 0,
        }
    }

    /// Solves `A X = B` by LU with partial pivoting.
    pub fn solve(&self, b: &CMat) -> Result<CMat> {
        if !self.is_square() || b.rows != self.rows {
            return Err(Error::ShapeMismatch(format!(
                "solve with {}x{} system and {}x{} right-hand side",
                self.rows, self.cols, b.rows, b.cols
            )));
        }
        let n = self.rows;
        let mut lu = self.clone();
        let mut x = b.clone();
        let scale = self.max_abs();
        if scale == 0.0 {
            return Err(Error::Singular);
        }
        let mut max_pivot = 0.0f64;
        let mut min_pivot = f64::INFINITY;
        for k in 0..n {
            let piv = (k..n)
                .max_by(|&i, &j| lu[(i, k)].norm().total_cmp(&lu[(j, k)].norm()))
                .expect("non-empty pivot range");
            let pval = lu[(piv, k)].norm();
            if pval <= f64::EPSILON * scale {
                return Err(Error::Singular);
            }
            max_pivot = max_pivot.max(pval);
            min_pivot = min_pivot.min(pval);
            if piv != k {
                lu.swap_rows(piv, k);
                x.swap_rows(piv, k);
            }
            let inv = lu[(k, k)].inv();
            for i in (k + 1)..n {
                let f = lu[(i, k)] * inv;
                if f == C64::new(0.0, 0.0) {
                    continue;
                }
                lu[(i, k)] = f;
                for c in (k + 1)..n {
                    let t = lu[(k, c)];
                    lu[(i, c)] -= f * t;
                }
                for c in 0..x.cols {
                    let t = x[(k, c)];
                    x[(i, c)] -= f * t;
                }
            }
        }
        if max_pivot / min_pivot > COND_MAX {
            return Err(Error::Singular);
        }
        for c in 0..x.cols {
            for i in (0..n).rev() {
                let mut acc = x[(i, c)];
                for j in (i + 1)..n {
                    acc -= lu[(i, j)] * x[(j, c)];
                }
                x[(i, c)] = acc / lu[(i, i)];
            }
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Result<CMat> {
        self.solve(&CMat::identity(self.rows))
    }

    /// Hermitian square root of a positive semidefinite matrix.
    pub fn hermitian_sqrt(&self) -> Result<CMat> {
        if !self.is_square() {
            return Err(Error::ShapeMismatch("square root of a non-square matrix".into()));
        }
        let defect = (self - &self.adjoint()).frobenius_norm();
        if defect > TOL_PSD {
            return Err(Error::NotHermitian { defect });
        }
        let (values, vecs) = self.hermitian_eig();
        if let Some(&min) = values.first() {
            if min < -TOL_PSD {
                return Err(Error::NotPsd { min_eig: min });
            }
        }
        let roots: Vec<f64> = values.iter().map(|&v| v.max(0.0).sqrt()).collect();
        let scaled = CMat::from_fn(self.rows, self.cols, |r, c| vecs[(r, c)] * roots[c]);
        Ok((&scaled * &vecs.adjoint()).hermitian_part())
    }

    /// Defect operator of a strict contraction.
    pub fn defect(&self, side: Side) -> Result<CMat> {
        if !self.is_square() {
            return Err(Error::ShapeMismatch("defect of a non-square matrix".into()));
        }
        let norm = self.operator_norm();
        if norm >= 1.0 - EPS_STRICT {
            return Err(Error::NotStrictContraction { norm });
        }
        let gram = match side {
            Side::Right => &self.adjoint() * self,
            Side::Left => self * &self.adjoint(),
        };
        (&CMat::identity(self.rows) - &gram).hermitian_part().hermitian_sqrt()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }
}

/// A 2×2 unitary acting on coordinates `(p, q)` that diagonalizes the
/// Hermitian block `[[app, apq], [conj(apq), aqq]]`.
struct JacobiRotation {
    upp: C64,
    upq: C64,
    uqp: C64,
    uqq: C64,
}

impl JacobiRotation {
    fn new(app: f64, aqq: f64, apq: C64) -> Self {
        let mag = apq.norm();
        let phase = apq / mag;
        let tau = (aqq - app) / (2.0 * mag);
        let t = if tau >= 0.0 {
            1.0 / (tau + (1.0 + tau * tau).sqrt())
        } else {
            -1.0 / (-tau + (1.0 + tau * tau).sqrt())
        };
        let c = 1.0 / (1.0 + t * t).sqrt();
        let s = t * c;
        let ph = phase.conj();
        JacobiRotation {
            upp: C64::new(c, 0.0),
            upq: C64::new(s, 0.0),
            uqp: ph * (-s),
            uqq: ph * c,
        }
    }

    /// `A ← A U` on columns p, q.
    fn apply_right(&self, a: &mut CMat, p: usize, q: usize) {
        for r in 0..a.rows {
            let ap = a[(r, p)];
            let aq = a[(r, q)];
            a[(r, p)] = ap * self.upp + aq * self.uqp;
            a[(r, q)] = ap * self.upq + aq * self.uqq;
        }
    }

    /// `A ← U* A` on rows p, q.
    fn apply_left_adjoint(&self, a: &mut CMat, p: usize, q: usize) {
        for c in 0..a.cols {
            let ap = a[(p, c)];
            let aq = a[(q, c)];
            a[(p, c)] = self.upp.conj() * ap + self.uqp.conj() * aq;
            a[(q, c)] = self.upq.conj() * ap + self.uqq.conj() * aq;
        }
    }
}

/// `out = a (ar×ac) · b (ac×bc)`, all row-major, `out` overwritten.
pub(crate) fn matmul_into(a: &[C64], ar: usize, ac: usize, b: &[C64], bc: usize, out: &mut [C64]) {
    for r in 0..ar {
        for c in 0..bc {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..ac {
                acc += a[r * ac + k] * b[k * bc + c];
            }
            out[r * bc + c] = acc;
        }
    }
}

impl Index<(usize, usize)> for CMat {
    type Output = C64;
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

impl Mul for &CMat {
    type Output = CMat;
    fn mul(self, rhs: &CMat) -> CMat {
        self.try_mul(rhs).expect("matrix product shape mismatch")
    }
}

impl Add for &CMat {
    type Output = CMat;
    fn add(self, rhs: &CMat) -> CMat {
        assert_eq!(self.shape(), rhs.shape(), "matrix sum shape mismatch");
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CMat {
    type Output = CMat;
    fn sub(self, rhs: &CMat) -> CMat {
        assert_eq!(self.shape(), rhs.shape(), "matrix difference shape mismatch");
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &CMat {
    type Output = CMat;
    fn neg(self) -> CMat {
        self.scale_real(-1.0)
    }
}

impl fmt::Debug for CMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMat {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:+.6e}{:+.6e}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// JSON form `{"re": [[..]], "im": [[..]]}`.
#[derive(Serialize)]
struct MatJsonOut {
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

/// Accepted JSON forms: `{"re", "im"}` (im optional), or rows whose entries
/// are real numbers or `[re, im]` pairs.
#[derive(Deserialize)]
#[serde(untagged)]
enum MatJsonIn {
    Split {
        re: Vec<Vec<f64>>,
        #[serde(default)]
        im: Option<Vec<Vec<f64>>>,
    },
    Rows(Vec<Vec<EntryIn>>),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum EntryIn {
    Real(f64),
    Pair([f64; 2]),
}

impl Serialize for CMat {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let re = (0..self.rows).map(|r| (0..self.cols).map(|c| self[(r, c)].re).collect()).collect();
        let im = (0..self.rows).map(|r| (0..self.cols).map(|c| self[(r, c)].im).collect()).collect();
        MatJsonOut { re, im }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for CMat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let rows_of = |rows: usize, cols: &[usize]| -> std::result::Result<usize, D::Error> {
            let c = cols.first().copied().unwrap_or(0);
            if cols.iter().any(|&x| x != c) || rows == 0 || c == 0 {
                return Err(D::Error::custom("matrix rows must be non-empty and of equal length"));
            }
            Ok(c)
        };
        match MatJsonIn::deserialize(d)? {
            MatJsonIn::Split { re, im } => {
                let cols = rows_of(re.len(), &re.iter().map(Vec::len).collect::<Vec<_>>())?;
                let im = im.unwrap_or_else(|| vec![vec![0.0; cols]; re.len()]);
                if im.len() != re.len() || im.iter().any(|r| r.len() != cols) {
                    return Err(D::Error::custom("re and im parts differ in shape"));
                }
                Ok(CMat::from_fn(re.len(), cols, |r, c| C64::new(re[r][c], im[r][c])))
            }
            MatJsonIn::Rows(rows) => {
                let cols = rows_of(rows.len(), &rows.iter().map(Vec::len).collect::<Vec<_>>())?;
                Ok(CMat::from_fn(rows.len(), cols, |r, c| match rows[r][c] {
                    EntryIn::Real(x) => C64::new(x, 0.0),
                    EntryIn::Pair([x, y]) => C64::new(x, y),
                }))
            }
        }
    }
}
