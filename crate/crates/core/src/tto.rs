//! Asymmetric truncated Toeplitz operators `A_Φ : K_Θ₁ → K_Θ₂`,
//! `f ↦ P_Θ₂(Φ f)`, materialized in orthonormal bases.

use std::collections::BTreeMap;
use std::hash::{DefaultHasher, Hash, Hasher};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circle_fun::CircleFn;
use crate::error::{Error, Result};
use crate::inner::InnerSpec;
use crate::matops::{CMat, C64};
use crate::model_space::{self, ModelSpaceBasis};

/// Entry tolerance recorded on every built matrix.
pub const BUILD_TOL: f64 = 1e-10;

/// Dense matrix of `A_Φ` with enough provenance to rebuild it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TtoMatrix {
    #[serde(rename = "entries")]
    pub mat: CMat,
    pub theta1: Option<InnerSpec>,
    pub theta2: Option<InnerSpec>,
    #[serde(rename = "symbol")]
    pub symbol_id: String,
    pub tol: f64,
    dims: [usize; 2],
}

impl TtoMatrix {
    pub fn dims(&self) -> (usize, usize) {
        (self.dims[0], self.dims[1])
    }
}

/// Stable token identifying a symbol by its sampled values.
pub fn symbol_id(phi: &CircleFn) -> String {
    let mut h = DefaultHasher::new();
    phi.shape().hash(&mut h);
    phi.grid().hash(&mut h);
    for z in phi.samples() {
        z.re.to_bits().hash(&mut h);
        z.im.to_bits().hash(&mut h);
    }
    format!("samples:{:016x}", h.finish())
}

fn check_shapes(b1: &ModelSpaceBasis, b2: &ModelSpaceBasis, phi: &CircleFn) -> Result<()> {
    let (d1, d2) = (b1.theta().d(), b2.theta().d());
    if phi.shape() != (d2, d1) {
        return Err(Error::ShapeMismatch(format!("symbol {:?} for spaces over C^{d1} and C^{d2}", phi.shape())));
    }
    if phi.grid() != b1.theta().grid() || phi.grid() != b2.theta().grid() {
        return Err(Error::ShapeMismatch("symbol and bases use different grids".into()));
    }
    Ok(())
}

fn assemble(
    b1: &ModelSpaceBasis,
    b2: &ModelSpaceBasis,
    phi: &CircleFn,
    column: impl Fn(&CircleFn) -> Result<CircleFn> + Sync,
) -> Result<TtoMatrix> {
    check_shapes(b1, b2, phi)?;
    let (rows, cols) = (b2.dim(), b1.dim());
    let columns: Vec<Vec<C64>> = b1
        .elements()
        .par_iter()
        .map(|f| b2.coords(&column(f)?))
        .collect::<Result<_>>()?;
    let mat = CMat::from_fn(rows, cols, |i, j| columns[j][i]);
    Ok(TtoMatrix {
        mat,
        theta1: b1.theta().spec().cloned(),
        theta2: b2.theta().spec().cloned(),
        symbol_id: symbol_id(phi),
        tol: BUILD_TOL,
        dims: [rows, cols],
    })
}

/// Entries `⟨Φ b1_j, b2_i⟩` in L². Since `b2` is an orthonormal basis of
/// `K_Θ₂ ⊂ L²`, this is the compression of multiplication by `Φ`.
pub fn build(b1: &ModelSpaceBasis, b2: &ModelSpaceBasis, phi: &CircleFn) -> Result<TtoMatrix> {
    assemble(b1, b2, phi, |f| phi.mul(f))
}

/// Same matrix computed as `⟨P_Θ₂ P₊(Φ b1_j), b2_i⟩`; kept as an oracle.
pub fn build_via_projection(b1: &ModelSpaceBasis, b2: &ModelSpaceBasis, phi: &CircleFn) -> Result<TtoMatrix> {
    let theta2 = b2.theta().clone();
    assemble(b1, b2, phi, move |f| model_space::project(&theta2, &phi.mul(f)?.riesz_plus()))
}

/// `m × n` grid of `d × d` blocks with block `(r, c) = Δ_{c−r}`; missing
/// `Δ_s` are zero.
pub fn block_toeplitz(n: usize, m: usize, d: usize, delta: &BTreeMap<i64, CMat>) -> Result<CMat> {
    if m == 0 || m > n {
        return Err(Error::BadShape(format!("block Toeplitz needs 1 ≤ m ≤ n, got m = {m}, n = {n}")));
    }
    if let Some((s, bad)) = delta.iter().find(|(_, b)| b.shape() != (d, d)) {
        return Err(Error::BadShape(format!("block Δ_{s} has shape {:?}, expected {d}x{d}", bad.shape())));
    }
    let zero = CMat::zeros(d, d);
    let mut out = CMat::zeros(m * d, n * d);
    for r in 0..m {
        for c in 0..n {
            let block = delta.get(&(c as i64 - r as i64)).unwrap_or(&zero);
            for p in 0..d {
                for q in 0..d {
                    out[(r * d + p, c * d + q)] = block[(p, q)];
                }
            }
        }
    }
    Ok(out)
}

/// `‖build(b1, b2, Φ)* − build(b2, b1, Φ*)‖` (operator norm).
pub fn adjoint_pair_check(b1: &ModelSpaceBasis, b2: &ModelSpaceBasis, phi: &CircleFn) -> Result<f64> {
    let a = build(b1, b2, phi)?;
    let b = build(b2, b1, &phi.adjoint_fn())?;
    Ok((&a.mat.adjoint() - &b.mat).operator_norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inner::{self, InnerFn};
    use crate::random;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const M: usize = 256;

    fn laurent(rng: &mut ChaCha8Rng, d: usize, lo: i64, hi: i64) -> CircleFn {
        let coeffs = (lo..=hi).map(|k| (k, random::gaussian(rng, d, d))).collect();
        CircleFn::from_fourier(&coeffs, M).unwrap()
    }

    fn basis(theta: &InnerFn) -> ModelSpaceBasis {
        ModelSpaceBasis::new(theta).unwrap()
    }

    fn mono(n: usize, d: usize) -> ModelSpaceBasis {
        basis(&inner::monomial(n, d, M).unwrap())
    }

    /// Δ_s for the monomial layout is the Fourier coefficient at −s.
    fn deltas_of(phi: &CircleFn, n: usize, m: usize) -> BTreeMap<i64, CMat> {
        (-(m as i64 - 1)..=(n as i64 - 1)).map(|s| (s, phi.coeff(-s))).collect()
    }

    #[test]
    fn identity_symbol_examples() {
        let id = CircleFn::constant(&CMat::identity(2), M).unwrap();
        let a = build(&mono(3, 2), &mono(3, 2), &id).unwrap();
        assert!((&a.mat - &CMat::identity(6)).max_abs() < 1e-14);

        let a = build(&mono(3, 2), &mono(2, 2), &id).unwrap();
        assert_eq!(a.dims(), (4, 6));
        let expect = CMat::from_fn(4, 6, |r, c| if r == c { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) });
        assert!((&a.mat - &expect).max_abs() < 1e-14);
    }

    #[test]
    fn block_toeplitz_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let d0 = random::gaussian(&mut rng, 2, 2);
        let d1 = random::gaussian(&mut rng, 2, 2);
        let delta: BTreeMap<i64, CMat> = [(0, d0.clone()), (1, d1.clone())].into_iter().collect();
        assert_eq!(block_toeplitz(1, 1, 2, &delta).unwrap(), d0);
        let row = block_toeplitz(2, 1, 2, &delta).unwrap();
        for p in 0..2 {
            for q in 0..2 {
                assert_eq!(row[(p, q)], d0[(p, q)]);
                assert_eq!(row[(p, 2 + q)], d1[(p, q)]);
            }
        }
        assert!(matches!(block_toeplitz(1, 2, 2, &delta), Err(Error::BadShape(_))));
        assert!(matches!(block_toeplitz(2, 1, 3, &delta), Err(Error::BadShape(_))));
    }

    #[test]
    fn build_matches_block_toeplitz_on_monomials() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let n = rng.random_range(1..=4);
            let m = rng.random_range(1..=n);
            let d = rng.random_range(1..=3);
            let phi = laurent(&mut rng, d, -3, 3);
            let a = build(&mono(n, d), &mono(m, d), &phi).unwrap();
            let bt = block_toeplitz(n, m, d, &deltas_of(&phi, n, m)).unwrap();
            assert!((&a.mat - &bt).max_abs() < 1e-10, "n={n} m={m} d={d}");
        }
    }

    #[test]
    fn worked_example_z3_z2() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let phi = laurent(&mut rng, 2, -2, 3);
        let a = build(&mono(3, 2), &mono(2, 2), &phi).unwrap();
        let bt = block_toeplitz(3, 2, 2, &deltas_of(&phi, 3, 2)).unwrap();
        assert!((&a.mat - &bt).max_abs() < 1e-10);
    }

    #[test]
    fn projection_route_agrees() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let t1 = InnerSpec::random_bp(&mut rng, 2, 3, 0.6).build(M).unwrap();
        let t2 = InnerSpec::random_bp(&mut rng, 2, 4, 0.6).build(M).unwrap();
        let (b1, b2) = (basis(&t1), basis(&t2));
        let phi = laurent(&mut rng, 2, -3, 3);
        let a = build(&b1, &b2, &phi).unwrap();
        let b = build_via_projection(&b1, &b2, &phi).unwrap();
        assert!((&a.mat - &b.mat).max_abs() < 1e-10);
    }

    #[test]
    fn adjoint_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = random::gaussian(&mut rng, 2, 2).hermitian_part();
        let t = InnerSpec::random_bp(&mut rng, 2, 3, 0.6).build(M).unwrap();
        let b = basis(&t);
        let phi = CircleFn::constant(&h, M).unwrap();
        assert!(adjoint_pair_check(&b, &b, &phi).unwrap() <= 1e-10);
        let a = build(&b, &b, &phi).unwrap().mat;
        assert!((&a - &a.adjoint()).max_abs() <= 1e-10);

        let phi = laurent(&mut rng, 2, -3, 3);
        assert!(adjoint_pair_check(&mono(4, 2), &mono(2, 2), &phi).unwrap() <= 1e-9);

        let z = CircleFn::monomial(1, &CMat::identity(2), M).unwrap();
        let zbar = CircleFn::monomial(-1, &CMat::identity(2), M).unwrap();
        let fwd = build(&mono(3, 2), &mono(3, 2), &z).unwrap().mat;
        let back = build(&mono(3, 2), &mono(3, 2), &zbar).unwrap().mat;
        assert!((&fwd.adjoint() - &back).max_abs() <= 1e-9);
    }

    #[test]
    fn linearity() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let t1 = InnerSpec::random_bp(&mut rng, 2, 2, 0.6).build(M).unwrap();
        let t2 = InnerSpec::random_bp(&mut rng, 2, 3, 0.6).build(M).unwrap();
        let (b1, b2) = (basis(&t1), basis(&t2));
        let (p, q) = (laurent(&mut rng, 2, -2, 2), laurent(&mut rng, 2, -1, 3));
        let (al, be) = (C64::new(0.3, -1.2), C64::new(-2.0, 0.5));
        let lhs = build(&b1, &b2, &p.lin_comb(al, &q, be).unwrap()).unwrap().mat;
        let rhs = &build(&b1, &b2, &p).unwrap().mat.scale(al) + &build(&b1, &b2, &q).unwrap().mat.scale(be);
        assert!((&lhs - &rhs).max_abs() < 1e-10);
    }

    #[test]
    fn zero_class_symbols_give_zero_operator() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let t1 = InnerSpec::random_bp(&mut rng, 2, 3, 0.6).build(M).unwrap();
        let t2 = InnerSpec::random_bp(&mut rng, 2, 2, 0.6).build(M).unwrap();
        let (b1, b2) = (basis(&t1), basis(&t2));
        let g1 = laurent(&mut rng, 2, 0, 3);
        let g2 = laurent(&mut rng, 2, 0, 3);
        let analytic_part = t2.func().mul(&g2).unwrap();
        assert!(build(&b1, &b2, &analytic_part).unwrap().mat.operator_norm() < 1e-10);
        let anti = t1.func().mul(&g1).unwrap().adjoint_fn();
        assert!(build(&b1, &b2, &anti).unwrap().mat.operator_norm() < 1e-10);
    }

    #[test]
    fn grid_refinement_is_stable() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let spec = InnerSpec::random_bp(&mut rng, 2, 3, 0.6);
        let coeffs: BTreeMap<i64, CMat> = (-2..=2).map(|k| (k, random::gaussian(&mut rng, 2, 2))).collect();
        let mats: Vec<CMat> = [M, 2 * M]
            .iter()
            .map(|&g| {
                let t = spec.build(g).unwrap();
                let b = ModelSpaceBasis::new(&t).unwrap();
                let phi = CircleFn::from_fourier(&coeffs, g).unwrap();
                // basis phases may differ between grids; compare a basis-free quantity
                let a = build(&b, &b, &phi).unwrap().mat;
                CMat::from_real_diag(&a.singular_values())
            })
            .collect();
        assert!((&mats[0] - &mats[1]).max_abs() < 1e-8);
    }

    #[test]
    fn json_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let phi = laurent(&mut rng, 1, -1, 1);
        let a = build(&mono(2, 1), &mono(1, 1), &phi).unwrap();
        let text = serde_json::to_string(&a).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["dims"], serde_json::json!([1, 2]));
        assert_eq!(v["theta1"]["type"], "monomial");
        let back: TtoMatrix = serde_json::from_str(&text).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn shape_errors() {
        let phi = CircleFn::constant(&CMat::identity(2), M).unwrap();
        assert!(matches!(build(&mono(2, 1), &mono(2, 1), &phi), Err(Error::ShapeMismatch(_))));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(12))]

            #[test]
            fn adjoint_relation_holds_for_bp(seed in any::<u64>(), d in 1usize..3) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let t1 = InnerSpec::random_bp(&mut rng, d, d + 1, 0.6).build(M).unwrap();
                let t2 = InnerSpec::random_bp(&mut rng, d, d + 2, 0.6).build(M).unwrap();
                let phi = laurent(&mut rng, d, -3, 3);
                prop_assert!(adjoint_pair_check(&basis(&t1), &basis(&t2), &phi).unwrap() <= 1e-9);
            }
        }
    }
}
