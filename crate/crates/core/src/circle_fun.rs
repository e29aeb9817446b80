//! Matrix- and vector-valued functions on the unit circle.
//!
//! A [`CircleFn`] is stored as its values on the uniform grid
//! `z_j = e^{2πij/M}`, `j = 0..M`. Fourier coefficients use the convention
//!
//! ```text
//! ĉ_k = (1/M) Σ_j f(z_j) e^{-2πijk/M},   k ∈ [-M/2, M/2)
//! ```
//!
//! and are computed lazily (once) by FFT. Every function carries an optional
//! *band*: the exact Fourier support when it is known to be a trigonometric
//! polynomial. Products of banded functions whose support no longer fits the
//! grid would alias, so [`CircleFn::mul`] rejects them with
//! [`Error::DegreeOverflow`]. Unbanded functions (rational inner functions,
//! kernels) are approximations whose accuracy is measured by
//! [`CircleFn::tail_mass`].

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::sync::OnceLock;

use rustfft::FftPlanner;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::matops::{matmul_into, CMat, C64};

/// Default number of grid points.
pub const DEFAULT_GRID: usize = 1024;
/// Coefficients at or below this magnitude are dropped when serializing.
pub const SERIAL_CUTOFF: f64 = 1e-15;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Function on the unit circle with values in `rows × cols` matrices.
#[derive(Clone)]
pub struct CircleFn {
    rows: usize,
    cols: usize,
    grid: usize,
    samples: Vec<C64>,
    band: Option<(i64, i64)>,
    fourier: OnceLock<Vec<C64>>,
}

/// The `j`-th grid point `e^{2πij/M}`.
pub fn grid_point(j: usize, grid: usize) -> C64 {
    C64::from_polar(1.0, TAU * j as f64 / grid as f64)
}

pub fn check_grid(grid: usize) -> Result<()> {
    if grid.is_power_of_two() && (8..=65536).contains(&grid) {
        Ok(())
    } else {
        Err(Error::BadGrid(grid))
    }
}

fn fft_in_place(data: &mut [C64], rc: usize, grid: usize, inverse: bool) {
    let fft = PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(grid)
        } else {
            p.plan_fft_forward(grid)
        }
    });
    let mut buf = vec![C64::new(0.0, 0.0); grid];
    let norm = if inverse { 1.0 } else { 1.0 / grid as f64 };
    for e in 0..rc {
        for (j, b) in buf.iter_mut().enumerate() {
            *b = data[j * rc + e];
        }
        fft.process(&mut buf);
        for (j, b) in buf.iter().enumerate() {
            data[j * rc + e] = b * norm;
        }
    }
}

impl CircleFn {
    pub fn from_samples(rows: usize, cols: usize, grid: usize, samples: Vec<C64>) -> Result<Self> {
        check_grid(grid)?;
        if samples.len() != rows * cols * grid {
            return Err(Error::ShapeMismatch(format!(
                "{} samples for a {rows}x{cols} function on {grid} points",
                samples.len()
            )));
        }
        Ok(CircleFn { rows, cols, grid, samples, band: None, fourier: OnceLock::new() })
    }

    /// Samples `f(j, z_j)`; `f` must return `rows × cols` matrices.
    pub fn try_from_fn(
        rows: usize,
        cols: usize,
        grid: usize,
        mut f: impl FnMut(usize, C64) -> Result<CMat>,
    ) -> Result<Self> {
        check_grid(grid)?;
        let mut samples = Vec::with_capacity(rows * cols * grid);
        for j in 0..grid {
            let v = f(j, grid_point(j, grid))?;
            if v.shape() != (rows, cols) {
                return Err(Error::ShapeMismatch(format!(
                    "sample of shape {:?}, expected {rows}x{cols}",
                    v.shape()
                )));
            }
            samples.extend_from_slice(v.as_slice());
        }
        Self::from_samples(rows, cols, grid, samples)
    }

    pub fn from_fn(rows: usize, cols: usize, grid: usize, mut f: impl FnMut(C64) -> CMat) -> Result<Self> {
        Self::try_from_fn(rows, cols, grid, |_, z| Ok(f(z)))
    }

    pub fn zeros(rows: usize, cols: usize, grid: usize) -> Result<Self> {
        let mut f = Self::from_samples(rows, cols, grid, vec![C64::new(0.0, 0.0); rows * cols * grid])?;
        f.band = Some((0, 0));
        Ok(f)
    }

    pub fn constant(value: &CMat, grid: usize) -> Result<Self> {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(0, value.clone());
        Self::from_fourier(&coeffs, grid)
    }

    /// `z^k · value`.
    pub fn monomial(k: i64, value: &CMat, grid: usize) -> Result<Self> {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(k, value.clone());
        Self::from_fourier(&coeffs, grid)
    }

    /// Trigonometric polynomial with the given coefficients.
    pub fn from_fourier(coeffs: &BTreeMap<i64, CMat>, grid: usize) -> Result<Self> {
        check_grid(grid)?;
        let half = (grid / 2) as i64;
        let (rows, cols) = coeffs
            .values()
            .next()
            .map(CMat::shape)
            .ok_or_else(|| Error::ShapeMismatch("no coefficients to infer a shape from".into()))?;
        let rc = rows * cols;
        let mut fourier = vec![C64::new(0.0, 0.0); rc * grid];
        for (&k, c) in coeffs {
            if k < -half || k >= half {
                return Err(Error::BadIndex { k, half });
            }
            if c.shape() != (rows, cols) {
                return Err(Error::ShapeMismatch(format!(
                    "coefficient {k} has shape {:?}, expected {rows}x{cols}",
                    c.shape()
                )));
            }
            let bin = k.rem_euclid(grid as i64) as usize;
            fourier[bin * rc..(bin + 1) * rc].copy_from_slice(c.as_slice());
        }
        let mut samples = fourier.clone();
        fft_in_place(&mut samples, rc, grid, true);
        let lo = *coeffs.keys().next().expect("non-empty");
        let hi = *coeffs.keys().next_back().expect("non-empty");
        let cache = OnceLock::new();
        let _ = cache.set(fourier);
        Ok(CircleFn { rows, cols, grid, samples, band: Some((lo, hi)), fourier: cache })
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

    pub fn grid(&self) -> usize {
        self.grid
    }

    /// Known exact Fourier support, if this is a trigonometric polynomial.
    pub fn band(&self) -> Option<(i64, i64)> {
        self.band
    }

    pub fn samples(&self) -> &[C64] {
        &self.samples
    }

    pub fn sample_slice(&self, j: usize) -> &[C64] {
        let rc = self.rows * self.cols;
        &self.samples[j * rc..(j + 1) * rc]
    }

    pub fn sample(&self, j: usize) -> CMat {
        CMat::from_vec(self.rows, self.cols, self.sample_slice(j).to_vec()).expect("sample shape")
    }

    /// Fourier coefficients in FFT bin order (bin `k mod M`).
    pub fn fourier(&self) -> &[C64] {
        self.fourier.get_or_init(|| {
            let mut data = self.samples.clone();
            fft_in_place(&mut data, self.rows * self.cols, self.grid, false);
            data
        })
    }

    /// Coefficient `ĉ_k`; zero outside `[-M/2, M/2)`.
    pub fn coeff(&self, k: i64) -> CMat {
        let half = (self.grid / 2) as i64;
        if k < -half || k >= half {
            return CMat::zeros(self.rows, self.cols);
        }
        let rc = self.rows * self.cols;
        let bin = k.rem_euclid(self.grid as i64) as usize;
        CMat::from_vec(self.rows, self.cols, self.fourier()[bin * rc..(bin + 1) * rc].to_vec())
            .expect("coefficient shape")
    }

    fn with_samples(&self, rows: usize, cols: usize, samples: Vec<C64>, band: Option<(i64, i64)>) -> Self {
        CircleFn { rows, cols, grid: self.grid, samples, band, fourier: OnceLock::new() }
    }

    fn same_grid(&self, other: &CircleFn) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::ShapeMismatch(format!("grids {} and {}", self.grid, other.grid)));
        }
        Ok(())
    }

    fn same_shape(&self, other: &CircleFn) -> Result<()> {
        self.same_grid(other)?;
        if self.shape() != other.shape() {
            return Err(Error::ShapeMismatch(format!("shapes {:?} and {:?}", self.shape(), other.shape())));
        }
        Ok(())
    }

    fn fits(&self, lo: i64, hi: i64) -> Result<(i64, i64)> {
        let half = (self.grid / 2) as i64;
        if lo < -half || hi >= half {
            Err(Error::DegreeOverflow { lo, hi, grid: self.grid })
        } else {
            Ok((lo, hi))
        }
    }

    /// Pointwise product `f(z) g(z)`.
    pub fn mul(&self, other: &CircleFn) -> Result<CircleFn> {
        self.same_grid(other)?;
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch(format!(
                "product of {:?}- and {:?}-valued functions",
                self.shape(),
                other.shape()
            )));
        }
        let band = match (self.band, other.band) {
            (Some((a, b)), Some((c, d))) => Some(self.fits(a + c, b + d)?),
            _ => None,
        };
        let (r, k, c) = (self.rows, self.cols, other.cols);
        let mut out = vec![C64::new(0.0, 0.0); self.grid * r * c];
        for j in 0..self.grid {
            matmul_into(
                self.sample_slice(j),
                r,
                k,
                other.sample_slice(j),
                c,
                &mut out[j * r * c..(j + 1) * r * c],
            );
        }
        Ok(self.with_samples(r, c, out, band))
    }

    /// Pointwise adjoint `f(z)*`.
    pub fn adjoint_fn(&self) -> CircleFn {
        let (r, c) = self.shape();
        let mut out = Vec::with_capacity(self.samples.len());
        for j in 0..self.grid {
            let s = self.sample_slice(j);
            for a in 0..c {
                for b in 0..r {
                    out.push(s[b * c + a].conj());
                }
            }
        }
        self.with_samples(c, r, out, self.band.map(|(lo, hi)| (-hi, -lo)))
    }

    /// `A · f(z)` for a constant matrix `A`.
    pub fn left_mul(&self, a: &CMat) -> Result<CircleFn> {
        self.mul_const(a, true)
    }

    /// `f(z) · A` for a constant matrix `A`.
    pub fn right_mul(&self, a: &CMat) -> Result<CircleFn> {
        self.mul_const(a, false)
    }

    fn mul_const(&self, a: &CMat, left: bool) -> Result<CircleFn> {
        let (rows, inner, cols) = if left {
            (a.rows(), a.cols(), self.cols)
        } else {
            (self.rows, a.rows(), a.cols())
        };
        let ok = if left { a.cols() == self.rows } else { self.cols == a.rows() };
        if !ok {
            return Err(Error::ShapeMismatch(format!(
                "constant {:?} against function {:?}",
                a.shape(),
                self.shape()
            )));
        }
        let mut out = vec![C64::new(0.0, 0.0); self.grid * rows * cols];
        for j in 0..self.grid {
            let dst = &mut out[j * rows * cols..(j + 1) * rows * cols];
            if left {
                matmul_into(a.as_slice(), rows, inner, self.sample_slice(j), cols, dst);
            } else {
                matmul_into(self.sample_slice(j), rows, inner, a.as_slice(), cols, dst);
            }
        }
        Ok(self.with_samples(rows, cols, out, self.band))
    }

    fn combine(&self, other: &CircleFn, f: impl Fn(C64, C64) -> C64) -> Result<CircleFn> {
        self.same_shape(other)?;
        let band = match (self.band, other.band) {
            (Some((a, b)), Some((c, d))) => Some((a.min(c), b.max(d))),
            _ => None,
        };
        let out = self.samples.iter().zip(&other.samples).map(|(&a, &b)| f(a, b)).collect();
        Ok(self.with_samples(self.rows, self.cols, out, band))
    }

    pub fn add(&self, other: &CircleFn) -> Result<CircleFn> {
        self.combine(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &CircleFn) -> Result<CircleFn> {
        self.combine(other, |a, b| a - b)
    }

    /// `a·f + b·g`.
    pub fn lin_comb(&self, a: C64, other: &CircleFn, b: C64) -> Result<CircleFn> {
        self.combine(other, |x, y| a * x + b * y)
    }

    pub fn scale(&self, s: C64) -> CircleFn {
        self.with_samples(self.rows, self.cols, self.samples.iter().map(|&x| x * s).collect(), self.band)
    }

    /// Applies `f(j, z_j, value)` at every grid point.
    pub fn map_samples(
        &self,
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, C64, &CMat) -> Result<CMat>,
    ) -> Result<CircleFn> {
        CircleFn::try_from_fn(rows, cols, self.grid, |j, z| f(j, z, &self.sample(j)))
    }

    /// L² inner product `(1/M) Σ_j ⟨f(z_j), g(z_j)⟩`, Hilbert–Schmidt on
    /// matrix values; linear in `self`.
    pub fn inner_product(&self, other: &CircleFn) -> Result<C64> {
        self.same_shape(other)?;
        let s: C64 = self.samples.iter().zip(&other.samples).map(|(a, b)| a * b.conj()).sum();
        Ok(s / self.grid as f64)
    }

    /// L² norm.
    pub fn norm(&self) -> f64 {
        (self.samples.iter().map(|z| z.norm_sqr()).sum::<f64>() / self.grid as f64).sqrt()
    }

    fn filter_fourier(&self, keep: impl Fn(i64) -> bool, band: Option<(i64, i64)>) -> CircleFn {
        let rc = self.rows * self.cols;
        let g = self.grid as i64;
        let mut data = self.fourier().to_vec();
        for bin in 0..self.grid {
            let k = if (bin as i64) < g / 2 { bin as i64 } else { bin as i64 - g };
            if !keep(k) {
                data[bin * rc..(bin + 1) * rc].fill(C64::new(0.0, 0.0));
            }
        }
        let fourier = data.clone();
        fft_in_place(&mut data, rc, self.grid, true);
        let cache = OnceLock::new();
        let _ = cache.set(fourier);
        CircleFn { rows: self.rows, cols: self.cols, grid: self.grid, samples: data, band, fourier: cache }
    }

    fn clip_band(&self, lo: i64, hi: i64) -> Option<(i64, i64)> {
        self.band.map(|(a, b)| {
            let (a, b) = (a.max(lo), b.min(hi));
            if a > b {
                (0, 0)
            } else {
                (a, b)
            }
        })
    }

    /// Riesz projection onto H²: keeps coefficients `k ≥ 0`.
    pub fn riesz_plus(&self) -> CircleFn {
        self.filter_fourier(|k| k >= 0, self.clip_band(0, i64::MAX))
    }

    /// `f − riesz_plus(f)`: coefficients `k < 0`.
    pub fn riesz_minus(&self) -> CircleFn {
        self.filter_fourier(|k| k < 0, self.clip_band(i64::MIN, -1))
    }

    /// Coefficients `k > 0`.
    pub fn strict_plus(&self) -> CircleFn {
        self.filter_fourier(|k| k > 0, self.clip_band(1, i64::MAX))
    }

    /// L² distance from H², i.e. `‖riesz_minus(f)‖`.
    pub fn h2_distance(&self) -> f64 {
        let rc = self.rows * self.cols;
        let f = self.fourier();
        let s: f64 = (self.grid / 2..self.grid)
            .flat_map(|bin| f[bin * rc..(bin + 1) * rc].iter())
            .map(|z| z.norm_sqr())
            .sum();
        s.sqrt()
    }

    /// Largest Frobenius norm among coefficients with `|k| ≥ 3M/8`,
    /// relative to the largest coefficient. Small values mean the grid
    /// resolves the function; large values signal aliasing.
    pub fn tail_mass(&self) -> f64 {
        let rc = self.rows * self.cols;
        let f = self.fourier();
        let g = self.grid as i64;
        let mut top = 0.0f64;
        let mut tail = 0.0f64;
        for bin in 0..self.grid {
            let k = if (bin as i64) < g / 2 { bin as i64 } else { bin as i64 - g };
            let n = f[bin * rc..(bin + 1) * rc].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            top = top.max(n);
            if 8 * k.abs() >= 3 * g {
                tail = tail.max(n);
            }
        }
        if top == 0.0 {
            0.0
        } else {
            tail / top
        }
    }

    /// Value at an interior point from the power series of the analytic
    /// part, `Σ_{k≥0} ĉ_k λ^k`.
    pub fn eval_analytic(&self, lambda: C64) -> CMat {
        let rc = self.rows * self.cols;
        let f = self.fourier();
        let mut acc = vec![C64::new(0.0, 0.0); rc];
        for bin in (0..self.grid / 2).rev() {
            for (e, a) in acc.iter_mut().enumerate() {
                *a = *a * lambda + f[bin * rc + e];
            }
        }
        CMat::from_vec(self.rows, self.cols, acc).expect("value shape")
    }

    /// Column `c` as a vector-valued function.
    pub fn column(&self, c: usize) -> CircleFn {
        let mut out = Vec::with_capacity(self.grid * self.rows);
        for j in 0..self.grid {
            let s = self.sample_slice(j);
            out.extend((0..self.rows).map(|r| s[r * self.cols + c]));
        }
        self.with_samples(self.rows, 1, out, self.band)
    }

    /// Assembles a matrix-valued function from vector-valued columns.
    pub fn from_columns(columns: &[CircleFn]) -> Result<CircleFn> {
        let first = columns.first().ok_or_else(|| Error::ShapeMismatch("no columns".into()))?;
        for c in columns {
            first.same_shape(c)?;
            if c.cols != 1 {
                return Err(Error::ShapeMismatch("columns must be vector-valued".into()));
            }
        }
        let (rows, ncol, grid) = (first.rows, columns.len(), first.grid);
        let mut out = vec![C64::new(0.0, 0.0); grid * rows * ncol];
        for j in 0..grid {
            for (c, col) in columns.iter().enumerate() {
                for r in 0..rows {
                    out[j * rows * ncol + r * ncol + c] = col.samples[j * rows + r];
                }
            }
        }
        let band = columns.iter().try_fold(Some((i64::MAX, i64::MIN)), |acc, c| {
            Some(match (acc, c.band) {
                (Some((a, b)), Some((lo, hi))) => Some((a.min(lo), b.max(hi))),
                _ => None,
            })
        });
        CircleFn::from_samples(rows, ncol, grid, out).map(|mut f| {
            f.band = band.flatten();
            f
        })
    }

    /// Non-negligible Fourier coefficients, ascending in `k`.
    pub fn nonzero_coeffs(&self, cutoff: f64) -> BTreeMap<i64, CMat> {
        let half = (self.grid / 2) as i64;
        (-half..half)
            .map(|k| (k, self.coeff(k)))
            .filter(|(_, c)| c.max_abs() > cutoff)
            .collect()
    }

    /// Maximum over grid points of the Frobenius distance between samples.
    pub fn max_sample_distance(&self, other: &CircleFn) -> Result<f64> {
        self.same_shape(other)?;
        let rc = self.rows * self.cols;
        Ok((0..self.grid)
            .map(|j| {
                self.samples[j * rc..(j + 1) * rc]
                    .iter()
                    .zip(&other.samples[j * rc..(j + 1) * rc])
                    .map(|(a, b)| (a - b).norm_sqr())
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max))
    }
}

impl std::fmt::Debug for CircleFn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CircleFn")
            .field("shape", &self.shape())
            .field("grid", &self.grid)
            .field("band", &self.band)
            .finish_non_exhaustive()
    }
}

#[derive(Serialize, Deserialize)]
struct CircleFnJson {
    shape: [usize; 2],
    #[serde(rename = "M")]
    grid: usize,
    coeffs: Vec<(i64, CMat)>,
}

impl Serialize for CircleFn {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CircleFnJson {
            shape: [self.rows, self.cols],
            grid: self.grid,
            coeffs: self.nonzero_coeffs(SERIAL_CUTOFF).into_iter().collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CircleFn {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = CircleFnJson::deserialize(d)?;
        let [rows, cols] = raw.shape;
        if raw.coeffs.is_empty() {
            return CircleFn::zeros(rows, cols, raw.grid).map_err(D::Error::custom);
        }
        let mut map = BTreeMap::new();
        for (k, c) in raw.coeffs {
            if c.shape() != (rows, cols) {
                return Err(D::Error::custom(format!("coefficient {k} does not match shape {rows}x{cols}")));
            }
            map.insert(k, c);
        }
        CircleFn::from_fourier(&map, raw.grid).map_err(D::Error::custom)
    }
}
