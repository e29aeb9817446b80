//! Seeded generators for matrices and test instances.
//!
//! All draws go through a caller-supplied RNG so a run seed fully determines
//! every instance.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::matops::{CMat, C64};

/// The generator used for every seeded draw in the toolkit.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Complex standard normal draw (unit variance overall).
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Matrix with i.i.d. complex standard normal entries.
pub fn gaussian<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| complex_normal(rng))
}

/// Haar-ish unitary from Gram–Schmidt of a Gaussian matrix.
pub fn unitary<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CMat {
    let g = gaussian(rng, d, d);
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(d);
    for j in 0..d {
        let mut v = g.column(j);
        // two passes keep the columns orthonormal to rounding
        for _ in 0..2 {
            for u in &cols {
                let proj: C64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (vi, ui) in v.iter_mut().zip(u) {
                    *vi -= proj * ui;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for vi in &mut v {
            *vi /= norm;
        }
        cols.push(v);
    }
    CMat::from_fn(d, d, |r, c| cols[c][r])
}

/// `scale · U Σ V*` with Σ uniform on [0, 1); the norm is below `scale`.
pub fn strict_contraction<R: Rng + ?Sized>(rng: &mut R, d: usize, scale: f64) -> CMat {
    let u = unitary(rng, d);
    let v = unitary(rng, d);
    let sigma: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
    let us = CMat::from_fn(d, d, |r, c| u[(r, c)] * sigma[c]);
    (&us * &v.adjoint()).scale_real(scale)
}

/// Orthogonal projection onto a random `rank`-dimensional subspace.
pub fn projection<R: Rng + ?Sized>(rng: &mut R, d: usize, rank: usize) -> CMat {
    let u = unitary(rng, d);
    CMat::from_fn(d, d, |r, c| (0..rank).map(|k| u[(r, k)] * u[(c, k)].conj()).sum())
}

/// Uniform point in the disk of the given radius.
pub fn disk_point<R: Rng + ?Sized>(rng: &mut R, radius: f64) -> C64 {
    let r = radius * rng.random::<f64>().sqrt();
    let t = std::f64::consts::TAU * rng.random::<f64>();
    C64::from_polar(r, t)
}

/// Random unit vector in C^d.
pub fn unit_vector<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<C64> {
    let v: Vec<C64> = (0..d).map(|_| complex_normal(rng)).collect();
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / n).collect()
}
