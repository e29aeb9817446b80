//! The generalized Crofoot transform `J_W : K_Θ → K_Θ′` as a matrix between
//! orthonormal bases, and the symbol maps that conjugate truncated Toeplitz
//! operators through it.
//!
//! Pointwise, `J_W f = M f` with `M = D_{W*}(I − ΘW*)^{-1}` and
//! `J_W* g = N g` with `N = D_{W*}(I + Θ′W*)^{-1}`. The identity
//! `I + Θ′W* = D_{W*}(I − ΘW*)^{-1} D_{W*}` gives `N = M^{-1}` on the circle.

use crate::circle_fun::CircleFn;
use crate::error::{Error, Result};
use crate::inner::{self, InnerFn};
use crate::matops::{CMat, Side, C64};
use crate::model_space::{self, ModelSpaceBasis};
use crate::tto;

/// Largest accepted `‖J*J − I‖` or `‖JJ* − I‖`.
pub const UNITARY_TOL: f64 = 1e-7;

/// A transform together with the bases it is written in.
#[derive(Debug, Clone)]
pub struct CrofootPair {
    pub w: CMat,
    pub basis: ModelSpaceBasis,
    pub basis_prime: ModelSpaceBasis,
    /// Matrix of `J_W`, shape `dim K_Θ′ × dim K_Θ`.
    pub j: CMat,
    pub unitarity_defect: f64,
    forward: CircleFn,
    backward: CircleFn,
}

impl CrofootPair {
    /// Builds `Θ′`, both bases and `J` from `Θ` and `W`.
    pub fn new(theta: &InnerFn, w: &CMat) -> Result<Self> {
        let theta_prime = inner::crofoot_inner(theta, w)?;
        transform(&ModelSpaceBasis::new(theta)?, &ModelSpaceBasis::new(&theta_prime)?, w)
    }

    pub fn theta(&self) -> &InnerFn {
        self.basis.theta()
    }

    pub fn theta_prime(&self) -> &InnerFn {
        self.basis_prime.theta()
    }

    /// `J f` for `f ∈ K_Θ`, pointwise.
    pub fn apply(&self, f: &CircleFn) -> Result<CircleFn> {
        self.forward.mul(f)
    }

    /// The multiplier `D_{W*}(I − ΘW*)^{-1}`.
    pub fn forward_multiplier(&self) -> &CircleFn {
        &self.forward
    }

    /// The multiplier `D_{W*}(I + Θ′W*)^{-1}`.
    pub fn backward_multiplier(&self) -> &CircleFn {
        &self.backward
    }
}

/// `D_{W*}(I + s·ΘW*)^{-1}` on the grid.
fn multiplier(theta: &InnerFn, w: &CMat, sign: f64) -> Result<CircleFn> {
    let d = theta.d();
    let dws = w.defect(Side::Left)?;
    let ws = w.adjoint().scale_real(sign);
    let id = CMat::identity(d);
    theta.func().map_samples(d, d, |_, _, t| Ok(&dws * &(&id + &(t * &ws)).inverse()?))
}

/// `D_{W*}^{-1}(I + s·WΘ*)` on the grid; the adjoint of `(I + s·ΘW*) D_{W*}^{-1}`.
fn inverse_adjoint_multiplier(theta: &InnerFn, w: &CMat, sign: f64) -> Result<CircleFn> {
    let d = theta.d();
    let dws_inv = w.defect(Side::Left)?.inverse()?;
    let ws = w.scale_real(sign);
    let id = CMat::identity(d);
    theta.func().map_samples(d, d, |_, _, t| Ok(&dws_inv * &(&id + &(&ws * &t.adjoint()))))
}

fn check_contraction(theta: &InnerFn, w: &CMat) -> Result<()> {
    if w.shape() != (theta.d(), theta.d()) {
        return Err(Error::ShapeMismatch(format!("contraction of shape {:?} for d = {}", w.shape(), theta.d())));
    }
    Ok(())
}

/// Matrix of `J_W` with entries `⟨J b_j, b′_i⟩`.
pub fn transform(b: &ModelSpaceBasis, b_prime: &ModelSpaceBasis, w: &CMat) -> Result<CrofootPair> {
    if b.dim() != b_prime.dim() {
        return Err(Error::DimMismatch(format!("dim K_Θ = {} but dim K_Θ′ = {}", b.dim(), b_prime.dim())));
    }
    check_contraction(b.theta(), w)?;
    let forward = multiplier(b.theta(), w, -1.0)?;
    let backward = multiplier(b_prime.theta(), w, 1.0)?;
    let n = b.dim();
    let mut j = CMat::zeros(n, n);
    for (c, f) in b.elements().iter().enumerate() {
        let coords = b_prime.coords(&forward.mul(f)?)?;
        for (r, v) in coords.into_iter().enumerate() {
            j[(r, c)] = v;
        }
    }
    let id = CMat::identity(n);
    let unitarity_defect = (&(&j.adjoint() * &j) - &id)
        .operator_norm()
        .max((&(&j * &j.adjoint()) - &id).operator_norm());
    if unitarity_defect > UNITARY_TOL {
        return Err(Error::NotUnitary { defect: unitarity_defect });
    }
    Ok(CrofootPair {
        w: w.clone(),
        basis: b.clone(),
        basis_prime: b_prime.clone(),
        j,
        unitarity_defect,
        forward,
        backward,
    })
}

/// `J* g = D_{W*}(I + Θ′W*)^{-1} g` for `g ∈ K_Θ′`.
pub fn adjoint_apply(pair: &CrofootPair, g: &CircleFn) -> Result<CircleFn> {
    pair.backward.mul(g)
}

/// `‖J(k_λ^Θ (I − WΘ(λ)*)^{-1} D_{W*} y) − k_λ^Θ′ y‖`.
pub fn kernel_action_defect(pair: &CrofootPair, lambda: C64, y: &[C64]) -> Result<f64> {
    let theta = pair.theta();
    let d = theta.d();
    let id = CMat::identity(d);
    let dws = pair.w.defect(Side::Left)?;
    let t_star = theta.eval(lambda)?.adjoint();
    let x = &(&id - &(&pair.w * &t_star)).inverse()? * &(&dws * &CMat::column_vector(y));
    let lhs = pair.apply(&model_space::kernel(theta, lambda, x.as_slice())?)?;
    let rhs = model_space::kernel(pair.theta_prime(), lambda, y)?;
    Ok(lhs.sub(&rhs)?.norm())
}

/// Symbol of `J_{W₂} A_Φ J_{W₁}*`:
/// `Ψ = D_{W₂*}^{-1}(I − W₂Θ₂*) Φ D_{W₁*}(I + Θ₁′W₁*)^{-1}`.
pub fn symbol_push(
    phi: &CircleFn,
    w1: &CMat,
    w2: &CMat,
    theta1: &InnerFn,
    theta2: &InnerFn,
    theta1_prime: &InnerFn,
) -> Result<CircleFn> {
    check_contraction(theta1, w1)?;
    check_contraction(theta2, w2)?;
    let left = inverse_adjoint_multiplier(theta2, w2, -1.0)?;
    let right = multiplier(theta1_prime, w1, 1.0)?;
    left.mul(phi)?.mul(&right)
}

/// Symbol of `J_{W₂}* A_Ψ J_{W₁}`:
/// `Φ = D_{W₂*}^{-1}(I + W₂Θ₂′*) Ψ D_{W₁*}(I − Θ₁W₁*)^{-1}`.
pub fn symbol_pull(
    psi: &CircleFn,
    w1: &CMat,
    w2: &CMat,
    theta1: &InnerFn,
    theta2_prime: &InnerFn,
) -> Result<CircleFn> {
    check_contraction(theta1, w1)?;
    check_contraction(theta2_prime, w2)?;
    let left = inverse_adjoint_multiplier(theta2_prime, w2, 1.0)?;
    let right = multiplier(theta1, w1, -1.0)?;
    left.mul(psi)?.mul(&right)
}

/// The forward symbol exactly as it is usually quoted,
/// `D_{W₂*}(I − Θ₂W₂*)^{-1} Φ D_{W₁*}(I + Θ₁′W₁*)^{-1}`. It does not
/// intertwine in general; kept so the discrepancy can be measured.
pub fn symbol_push_as_published(
    phi: &CircleFn,
    w1: &CMat,
    w2: &CMat,
    theta2: &InnerFn,
    theta1_prime: &InnerFn,
) -> Result<CircleFn> {
    check_contraction(theta2, w2)?;
    check_contraction(theta1_prime, w1)?;
    multiplier(theta2, w2, -1.0)?.mul(phi)?.mul(&multiplier(theta1_prime, w1, 1.0)?)
}

/// Reverse counterpart of [`symbol_push_as_published`],
/// `D_{W₂*}(I + Θ₂′W₂*)^{-1} Ψ D_{W₁*}(I − Θ₁W₁*)^{-1}`.
pub fn symbol_pull_as_published(
    psi: &CircleFn,
    w1: &CMat,
    w2: &CMat,
    theta1: &InnerFn,
    theta2_prime: &InnerFn,
) -> Result<CircleFn> {
    check_contraction(theta1, w1)?;
    check_contraction(theta2_prime, w2)?;
    multiplier(theta2_prime, w2, 1.0)?.mul(psi)?.mul(&multiplier(theta1, w1, -1.0)?)
}

/// `‖J₂ A_Φ J₁* − A_Ψ‖`, with `A_Φ : K_Θ₁ → K_Θ₂` and `A_Ψ : K_Θ₁′ → K_Θ₂′`.
pub fn push_defect(p1: &CrofootPair, p2: &CrofootPair, phi: &CircleFn, psi: &CircleFn) -> Result<f64> {
    let a_phi = tto::build(&p1.basis, &p2.basis, phi)?.mat;
    let a_psi = tto::build(&p1.basis_prime, &p2.basis_prime, psi)?.mat;
    let conj = &(&p2.j * &a_phi) * &p1.j.adjoint();
    Ok((&conj - &a_psi).operator_norm())
}

/// `‖J₂* A_Ψ J₁ − A_Φ‖`.
pub fn pull_defect(p1: &CrofootPair, p2: &CrofootPair, psi: &CircleFn, phi: &CircleFn) -> Result<f64> {
    let a_psi = tto::build(&p1.basis_prime, &p2.basis_prime, psi)?.mat;
    let a_phi = tto::build(&p1.basis, &p2.basis, phi)?.mat;
    let conj = &(&p2.j.adjoint() * &a_psi) * &p1.j;
    Ok((&conj - &a_phi).operator_norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inner::InnerSpec;
    use crate::random;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeMap;

    const M: usize = 1024;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn laurent(rng: &mut ChaCha8Rng, d: usize, deg: i64) -> CircleFn {
        let coeffs: BTreeMap<i64, CMat> = (-deg..=deg).map(|k| (k, random::gaussian(rng, d, d))).collect();
        CircleFn::from_fourier(&coeffs, M).unwrap()
    }

    fn bp(rng: &mut ChaCha8Rng, d: usize, degree: usize) -> InnerFn {
        InnerSpec::random_bp(rng, d, degree, 0.6).build(M).unwrap()
    }

    #[test]
    fn zero_parameter_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let theta = bp(&mut rng, 2, 3);
        let b = ModelSpaceBasis::new(&theta).unwrap();
        let pair = transform(&b, &b, &CMat::zeros(2, 2)).unwrap();
        assert!((&pair.j - &CMat::identity(3)).max_abs() < 1e-12);
        let g = b.elements()[1].clone();
        assert!(adjoint_apply(&pair, &g).unwrap().max_sample_distance(&g).unwrap() < 1e-14);
        let y = random::unit_vector(&mut rng, 2);
        assert!(kernel_action_defect(&pair, c(0.3, 0.2), &y).unwrap() <= 1e-12);
    }

    #[test]
    fn scalar_one_dimensional() {
        let z = inner::monomial(1, 1, M).unwrap();
        let pair = CrofootPair::new(&z, &CMat::scalar(c(0.4, -0.3))).unwrap();
        assert_eq!(pair.j.shape(), (1, 1));
        assert!((pair.j[(0, 0)].norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn seeded_unitarity() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let theta = bp(&mut rng, 2, 3);
        let w = random::strict_contraction(&mut rng, 2, 1.0);
        let w = w.scale_real(0.7 / w.operator_norm());
        let pair = CrofootPair::new(&theta, &w).unwrap();
        let id = CMat::identity(3);
        assert!((&(&pair.j.adjoint() * &pair.j) - &id).operator_norm() <= 1e-7);
    }

    #[test]
    fn adjoint_inverts_forward() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let theta = bp(&mut rng, 2, 3);
        let w = random::strict_contraction(&mut rng, 2, 0.8);
        let pair = CrofootPair::new(&theta, &w).unwrap();
        let coords: Vec<C64> = (0..3).map(|_| random::complex_normal(&mut rng)).collect();
        let f = pair.basis.combine(&coords).unwrap();
        let jf = pair.apply(&f).unwrap();
        let back = adjoint_apply(&pair, &jf).unwrap();
        assert!(back.sub(&f).unwrap().norm() <= 1e-8);

        let g = pair.basis_prime.combine(&coords).unwrap();
        let lhs = pair.basis.coords(&adjoint_apply(&pair, &g).unwrap()).unwrap();
        let rhs = &pair.j.adjoint() * &CMat::column_vector(&coords);
        let diff: f64 = lhs.iter().zip(rhs.as_slice()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(diff <= 1e-8);
    }

    #[test]
    fn kernel_action() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let theta = bp(&mut rng, 2, 3);
        let w = random::strict_contraction(&mut rng, 2, 0.8);
        let pair = CrofootPair::new(&theta, &w).unwrap();
        for _ in 0..10 {
            let lambda = random::disk_point(&mut rng, 0.9);
            let y = random::unit_vector(&mut rng, 2);
            assert!(kernel_action_defect(&pair, lambda, &y).unwrap() <= 1e-8);
        }
        // Θ(0) = 0 at λ = 0
        let mono = inner::monomial(2, 2, M).unwrap();
        let pair = CrofootPair::new(&mono, &w).unwrap();
        assert!(kernel_action_defect(&pair, c(0.0, 0.0), &random::unit_vector(&mut rng, 2)).unwrap() <= 1e-9);
    }

    #[test]
    fn push_trivial_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let t1 = bp(&mut rng, 2, 2);
        let t2 = bp(&mut rng, 2, 3);
        let phi = laurent(&mut rng, 2, 2);
        let zero = CMat::zeros(2, 2);
        let psi = symbol_push(&phi, &zero, &zero, &t1, &t2, &t1).unwrap();
        assert!(psi.max_sample_distance(&phi).unwrap() < 1e-13);
        let back = symbol_pull(&phi, &zero, &zero, &t1, &t2).unwrap();
        assert!(back.max_sample_distance(&phi).unwrap() < 1e-13);
        let w = random::strict_contraction(&mut rng, 2, 0.8);
        let t1p = inner::crofoot_inner(&t1, &w).unwrap();
        let nil = CircleFn::zeros(2, 2, M).unwrap();
        assert!(symbol_push(&nil, &w, &w, &t1, &t2, &t1p).unwrap().norm() == 0.0);
    }

    #[test]
    fn intertwining_both_directions() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let (t1, t2) = (bp(&mut rng, 2, 2), bp(&mut rng, 2, 3));
        let w1 = random::strict_contraction(&mut rng, 2, 0.8);
        let w2 = random::strict_contraction(&mut rng, 2, 0.8);
        let p1 = CrofootPair::new(&t1, &w1).unwrap();
        let p2 = CrofootPair::new(&t2, &w2).unwrap();
        let phi = laurent(&mut rng, 2, 3);
        let psi = symbol_push(&phi, &w1, &w2, &t1, &t2, p1.theta_prime()).unwrap();
        let scale = tto::build(&p1.basis, &p2.basis, &phi).unwrap().mat.operator_norm();
        assert!(push_defect(&p1, &p2, &phi, &psi).unwrap() <= 1e-6 * scale);

        let psi = laurent(&mut rng, 2, 3);
        let phi = symbol_pull(&psi, &w1, &w2, &t1, p2.theta_prime()).unwrap();
        let scale = tto::build(&p1.basis_prime, &p2.basis_prime, &psi).unwrap().mat.operator_norm();
        assert!(pull_defect(&p1, &p2, &psi, &phi).unwrap() <= 1e-6 * scale);
    }

    #[test]
    fn published_push_fails_on_scalar_shift() {
        // Θ = z, Φ = z: A_Φ = 0 on the constants, yet the published Ψ is z
        // and compresses to a nonzero operator.
        let z = inner::monomial(1, 1, M).unwrap();
        let w = CMat::scalar(c(0.5, 0.0));
        let p = CrofootPair::new(&z, &w).unwrap();
        let phi = CircleFn::monomial(1, &CMat::identity(1), M).unwrap();
        let published = symbol_push_as_published(&phi, &w, &w, &z, p.theta_prime()).unwrap();
        assert!(published.max_sample_distance(&phi).unwrap() < 1e-12);
        assert!((push_defect(&p, &p, &phi, &published).unwrap() - 0.5).abs() < 1e-10);
        let fixed = symbol_push(&phi, &w, &w, &z, &z, p.theta_prime()).unwrap();
        assert!(push_defect(&p, &p, &phi, &fixed).unwrap() < 1e-12);
    }

    #[test]
    fn published_pair_still_inverts() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (t1, t2) = (bp(&mut rng, 2, 2), bp(&mut rng, 2, 3));
        let w1 = random::strict_contraction(&mut rng, 2, 0.8);
        let w2 = random::strict_contraction(&mut rng, 2, 0.8);
        let t1p = inner::crofoot_inner(&t1, &w1).unwrap();
        let t2p = inner::crofoot_inner(&t2, &w2).unwrap();
        let phi = laurent(&mut rng, 2, 3);
        let psi = symbol_push_as_published(&phi, &w1, &w2, &t2, &t1p).unwrap();
        let back = symbol_pull_as_published(&psi, &w1, &w2, &t1, &t2p).unwrap();
        assert!(back.max_sample_distance(&phi).unwrap() <= 1e-9);
    }

    #[test]
    fn dimension_mismatch() {
        let t1 = inner::monomial(1, 1, M).unwrap();
        let t2 = inner::monomial(2, 1, M).unwrap();
        let (b1, b2) = (ModelSpaceBasis::new(&t1).unwrap(), ModelSpaceBasis::new(&t2).unwrap());
        assert!(matches!(transform(&b1, &b2, &CMat::zeros(1, 1)), Err(Error::DimMismatch(_))));
    }

    #[test]
    fn inconsistent_target_is_not_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let t = bp(&mut rng, 1, 2);
        let other = bp(&mut rng, 1, 2);
        let w = CMat::scalar(c(0.5, 0.1));
        let b = ModelSpaceBasis::new(&t).unwrap();
        let wrong = ModelSpaceBasis::new(&other).unwrap();
        assert!(matches!(transform(&b, &wrong, &w), Err(Error::NotUnitary { .. })));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(10))]

            #[test]
            fn push_pull_invert(seed in any::<u64>(), d in 1usize..4) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let (t1, t2) = (bp(&mut rng, d, d), bp(&mut rng, d, d + 1));
                let w1 = random::strict_contraction(&mut rng, d, 0.8);
                let w2 = random::strict_contraction(&mut rng, d, 0.8);
                let t1p = inner::crofoot_inner(&t1, &w1).unwrap();
                let t2p = inner::crofoot_inner(&t2, &w2).unwrap();
                let phi = laurent(&mut rng, d, 3);
                let psi = symbol_push(&phi, &w1, &w2, &t1, &t2, &t1p).unwrap();
                let back = symbol_pull(&psi, &w1, &w2, &t1, &t2p).unwrap();
                prop_assert!(back.max_sample_distance(&phi).unwrap() <= 1e-9);
            }
        }
    }
}
