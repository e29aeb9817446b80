//! Matrix-valued inner functions: monomials `zⁿ I`, finite Blaschke–Potapov
//! products, and their Crofoot transforms.
//!
//! An [`InnerFn`] is a square [`CircleFn`] that passed certification: its
//! boundary values are unitary to [`TOL_INNER`], it has no negative
//! frequencies, the grid resolves it, and (unless constant) `‖Θ(0)‖ < 1`.
//! Functions built from an [`InnerSpec`] keep the spec so that interior
//! values `Θ(λ)` come from the closed form rather than a truncated series.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circle_fun::CircleFn;
use crate::error::{Error, Result};
use crate::matops::{CMat, Side, C64, EPS_STRICT};
use crate::random;

/// Acceptance threshold for the unitarity defect of boundary values.
pub const TOL_INNER: f64 = 1e-8;
/// Largest admissible modulus of a Blaschke–Potapov zero.
pub const ZERO_CAP: f64 = 0.9;
const TOL_PROJECTION: f64 = 1e-10;

/// One factor `b_w(z) P + (I − P)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BpFactor {
    /// Zero as `[re, im]`.
    pub w: [f64; 2],
    #[serde(rename = "P")]
    pub p: CMat,
}

impl BpFactor {
    pub fn new(w: C64, p: CMat) -> Self {
        BpFactor { w: [w.re, w.im], p }
    }

    pub fn zero(&self) -> C64 {
        C64::new(self.w[0], self.w[1])
    }
}

/// Declarative description of an inner function (also its JSON form).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum InnerSpec {
    Monomial { n: usize, d: usize },
    Bp { d: usize, factors: Vec<BpFactor> },
    Crofoot {
        base: Box<InnerSpec>,
        #[serde(rename = "W")]
        w: CMat,
    },
}

/// Scalar Blaschke factor normalized to be non-negative at the origin.
pub fn blaschke_factor(w: C64, z: C64) -> C64 {
    if w == C64::new(0.0, 0.0) {
        z
    } else {
        (w.norm() / w) * (w - z) / (C64::new(1.0, 0.0) - w.conj() * z)
    }
}

/// `−W + D_{W*} (I − T W*)^{-1} T D_W` for a point value `T`.
fn crofoot_value(t: &CMat, w: &CMat, dw: &CMat, dws: &CMat) -> Result<CMat> {
    let d = t.rows();
    let resolvent = (&CMat::identity(d) - &(t * &w.adjoint())).inverse()?;
    Ok(&(&(&(dws * &resolvent) * t) * dw) - w)
}

impl InnerSpec {
    /// Dimension `d` of the coefficient space E.
    pub fn dim(&self) -> usize {
        match self {
            InnerSpec::Monomial { d, .. } | InnerSpec::Bp { d, .. } => *d,
            InnerSpec::Crofoot { base, .. } => base.dim(),
        }
    }

    /// Closed-form value at `λ` (interior or boundary).
    pub fn eval(&self, lambda: C64) -> Result<CMat> {
        match self {
            InnerSpec::Monomial { n, d } => Ok(CMat::identity(*d).scale(lambda.powu(*n as u32))),
            InnerSpec::Bp { d, factors } => {
                let id = CMat::identity(*d);
                let mut acc = id.clone();
                for f in factors {
                    let b = blaschke_factor(f.zero(), lambda);
                    let factor = &(&f.p.scale(b) + &id) - &f.p;
                    acc = &acc * &factor;
                }
                Ok(acc)
            }
            InnerSpec::Crofoot { base, w } => {
                let t = base.eval(lambda)?;
                crofoot_value(&t, w, &w.defect(Side::Right)?, &w.defect(Side::Left)?)
            }
        }
    }

    /// Samples and certifies the function on a grid of `grid` points.
    pub fn build(&self, grid: usize) -> Result<InnerFn> {
        match self {
            InnerSpec::Monomial { n, d } => monomial(*n, *d, grid),
            InnerSpec::Bp { d, factors } => {
                let pairs: Vec<(C64, CMat)> = factors.iter().map(|f| (f.zero(), f.p.clone())).collect();
                blaschke_potapov(&pairs, *d, grid)
            }
            InnerSpec::Crofoot { base, w } => crofoot_inner(&base.build(grid)?, w),
        }
    }

    /// Random pure Blaschke–Potapov product of total degree `degree ≥ d`
    /// with zeros in `|w| ≤ radius`.
    pub fn random_bp<R: Rng + ?Sized>(rng: &mut R, d: usize, degree: usize, radius: f64) -> InnerSpec {
        assert!(degree >= d, "a pure product needs degree at least d");
        loop {
            let mut factors = Vec::new();
            let mut left = degree;
            while left > 0 {
                let rank = rng.random_range(1..=left.min(d));
                left -= rank;
                let p = random::projection(rng, d, rank);
                factors.push(BpFactor::new(random::disk_point(rng, radius), p));
            }
            let spec = InnerSpec::Bp { d, factors };
            let purity = spec.eval(C64::new(0.0, 0.0)).map(|t| t.operator_norm()).unwrap_or(1.0);
            if purity < 0.99 {
                return spec;
            }
        }
    }
}

/// A certified inner function.
#[derive(Debug, Clone)]
pub struct InnerFn {
    func: CircleFn,
    spec: Option<InnerSpec>,
    at_zero: CMat,
    unitarity_defect: f64,
    purity: f64,
    degree_hint: Option<usize>,
    constant: bool,
}

impl InnerFn {
    pub fn func(&self) -> &CircleFn {
        &self.func
    }

    pub fn spec(&self) -> Option<&InnerSpec> {
        self.spec.as_ref()
    }

    pub fn d(&self) -> usize {
        self.func.rows()
    }

    pub fn grid(&self) -> usize {
        self.func.grid()
    }

    /// `max_j ‖Θ(z_j)* Θ(z_j) − I‖_F`.
    pub fn unitarity_defect(&self) -> f64 {
        self.unitarity_defect
    }

    /// `‖Θ(0)‖`.
    pub fn purity(&self) -> f64 {
        self.purity
    }

    /// Dimension of the model space when known.
    pub fn degree_hint(&self) -> Option<usize> {
        self.degree_hint
    }

    /// Constant unitaries are accepted; their model space is trivial.
    pub fn is_constant(&self) -> bool {
        self.constant
    }

    /// `n` when this is `zⁿ I`.
    pub fn monomial_degree(&self) -> Option<usize> {
        match self.spec {
            Some(InnerSpec::Monomial { n, .. }) => Some(n),
            _ => None,
        }
    }

    pub fn at_zero(&self) -> &CMat {
        &self.at_zero
    }

    /// `Θ(λ)` for `|λ| < 1`.
    pub fn eval(&self, lambda: C64) -> Result<CMat> {
        match &self.spec {
            Some(spec) => spec.eval(lambda),
            None => Ok(self.func.eval_analytic(lambda)),
        }
    }
}

/// Certifies an arbitrary square function as inner.
pub fn certify(f: &CircleFn) -> Result<InnerFn> {
    certify_with(f.clone(), None, None)
}

fn certify_with(func: CircleFn, spec: Option<InnerSpec>, degree_hint: Option<usize>) -> Result<InnerFn> {
    let (rows, cols) = func.shape();
    if rows != cols {
        return Err(Error::ShapeMismatch(format!("inner function must be square, got {rows}x{cols}")));
    }
    let d = rows;
    let id = CMat::identity(d);
    let unitarity_defect = (0..func.grid())
        .map(|j| {
            let s = func.sample(j);
            (&(&s.adjoint() * &s) - &id).frobenius_norm()
        })
        .fold(0.0, f64::max);
    if unitarity_defect > TOL_INNER {
        return Err(Error::NotInner(format!("boundary values are not unitary (defect {unitarity_defect:e})")));
    }
    let scale = func.norm().max(1.0);
    let anti = func.h2_distance();
    if anti > TOL_INNER * scale {
        return Err(Error::NotInner(format!("function has negative frequencies (mass {anti:e})")));
    }
    let tail = func.tail_mass();
    if tail > TOL_INNER {
        return Err(Error::NotInner(format!("grid of {} points does not resolve the function (tail {tail:e})", func.grid())));
    }
    let at_zero = match &spec {
        Some(s) => s.eval(C64::new(0.0, 0.0))?,
        None => func.coeff(0),
    };
    let purity = at_zero.operator_norm();
    let mean = func.coeff(0);
    let varying = (0..func.grid()).map(|j| (&func.sample(j) - &mean).frobenius_norm()).fold(0.0, f64::max);
    let constant = varying <= TOL_INNER;
    if !constant && purity >= 1.0 - EPS_STRICT {
        return Err(Error::NotPure { purity });
    }
    let degree_hint = if constant { Some(0) } else { degree_hint };
    Ok(InnerFn { func, spec, at_zero, unitarity_defect, purity, degree_hint, constant })
}

/// `Θ(z) = zⁿ I_d`.
pub fn monomial(n: usize, d: usize, grid: usize) -> Result<InnerFn> {
    crate::circle_fun::check_grid(grid)?;
    if n < 1 || n >= grid / 4 {
        return Err(Error::BadDegree(format!("monomial degree {n} outside [1, {})", grid / 4)));
    }
    if d == 0 {
        return Err(Error::BadDegree("d must be positive".into()));
    }
    let func = CircleFn::monomial(n as i64, &CMat::identity(d), grid)?;
    certify_with(func, Some(InnerSpec::Monomial { n, d }), Some(n * d))
}

/// Product of factors `b_w(z) P + (I − P)`, in the given order.
pub fn blaschke_potapov(factors: &[(C64, CMat)], d: usize, grid: usize) -> Result<InnerFn> {
    let mut degree = 0;
    for (w, p) in factors {
        if p.shape() != (d, d) {
            return Err(Error::ShapeMismatch(format!("projection of shape {:?} for d = {d}", p.shape())));
        }
        if w.norm() > ZERO_CAP {
            return Err(Error::ZeroTooLarge { modulus: w.norm(), cap: ZERO_CAP });
        }
        let defect = (&(p * p) - p).frobenius_norm() + (p - &p.adjoint()).frobenius_norm();
        if defect > TOL_PROJECTION {
            return Err(Error::NotProjection { defect });
        }
        degree += p.rank(1e-10);
    }
    let spec = InnerSpec::Bp {
        d,
        factors: factors.iter().map(|(w, p)| BpFactor::new(*w, p.clone())).collect(),
    };
    let func = CircleFn::try_from_fn(d, d, grid, |_, z| spec.eval(z))?;
    certify_with(func, Some(spec), Some(degree))
}

/// Crofoot transform `Θ′ = −W + D_{W*}(I − ΘW*)^{-1} Θ D_W` of a pure inner
/// function by a strict contraction `W`.
pub fn crofoot_inner(theta: &InnerFn, w: &CMat) -> Result<InnerFn> {
    let d = theta.d();
    if w.shape() != (d, d) {
        return Err(Error::ShapeMismatch(format!("contraction of shape {:?} for d = {d}", w.shape())));
    }
    let dw = w.defect(Side::Right)?;
    let dws = w.defect(Side::Left)?;
    let func = theta.func.map_samples(d, d, |_, _, t| crofoot_value(t, w, &dw, &dws))?;
    let spec = theta.spec.as_ref().map(|s| InnerSpec::Crofoot { base: Box::new(s.clone()), w: w.clone() });
    let spec_free = spec.is_none();
    let mut out = certify_with(func, spec, theta.degree_hint)?;
    if spec_free {
        let base_zero = &theta.at_zero;
        out.at_zero = crofoot_value(base_zero, w, &dw, &dws)?;
        out.purity = out.at_zero.operator_norm();
    }
    Ok(out)
}

/// `max_j ‖I + Θ′W* − D_{W*}(I − ΘW*)^{-1} D_{W*}‖_F` over the grid.
pub fn crofoot_identity_defect(theta: &InnerFn, theta_prime: &InnerFn, w: &CMat) -> Result<f64> {
    let d = theta.d();
    let id = CMat::identity(d);
    let dws = w.defect(Side::Left)?;
    let ws = w.adjoint();
    let mut worst = 0.0f64;
    for j in 0..theta.grid() {
        let t = theta.func.sample(j);
        let tp = theta_prime.func.sample(j);
        let lhs = &id + &(&tp * &ws);
        let rhs = &(&dws * &(&id - &(&t * &ws)).inverse()?) * &dws;
        worst = worst.max((&lhs - &rhs).frobenius_norm());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const M: usize = 256;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn monomial_examples() {
        let z = monomial(1, 1, M).unwrap();
        for j in [0, 3, 100] {
            assert!((z.func().sample(j)[(0, 0)] - crate::circle_fun::grid_point(j, M)).norm() < 1e-14);
        }
        let t = monomial(3, 2, M).unwrap();
        assert!((&t.func().coeff(3) - &CMat::identity(2)).max_abs() < 1e-14);
        for k in [-2, 0, 1, 2, 4, 5] {
            assert!(t.func().coeff(k).max_abs() < 1e-14);
        }
        assert_eq!(t.purity(), 0.0);
        assert_eq!(t.degree_hint(), Some(6));
        assert!(t.unitarity_defect() <= 1e-14);
        assert!(matches!(monomial(0, 1, M), Err(Error::BadDegree(_))));
        assert!(matches!(monomial(M / 4, 1, M), Err(Error::BadDegree(_))));
    }

    #[test]
    fn blaschke_examples() {
        let z = blaschke_potapov(&[(c(0.0, 0.0), CMat::identity(1))], 1, M).unwrap();
        let m = monomial(1, 1, M).unwrap();
        assert!(z.func().max_sample_distance(m.func()).unwrap() < 1e-14);

        let b = blaschke_potapov(&[(c(0.5, 0.0), CMat::identity(1))], 1, M).unwrap();
        assert!(b.eval(c(0.5, 0.0)).unwrap().max_abs() < 1e-15);
        assert!((b.purity() - 0.5).abs() < 1e-14);
        assert_eq!(b.degree_hint(), Some(1));

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p1 = random::projection(&mut rng, 2, 1);
        let p2 = random::projection(&mut rng, 2, 1);
        let t = blaschke_potapov(&[(c(0.3, 0.4), p1.clone()), (c(-0.5, 0.1), p2.clone())], 2, M).unwrap();
        assert_eq!(t.degree_hint(), Some(2));
        // direct grid evaluation oracle
        for j in 0..M {
            let z = crate::circle_fun::grid_point(j, M);
            let f1 = &(&p1.scale(blaschke_factor(c(0.3, 0.4), z)) + &CMat::identity(2)) - &p1;
            let f2 = &(&p2.scale(blaschke_factor(c(-0.5, 0.1), z)) + &CMat::identity(2)) - &p2;
            let v = &f1 * &f2;
            assert!((&(&v.adjoint() * &v) - &CMat::identity(2)).frobenius_norm() <= 1e-10);
            assert!((&v - &t.func().sample(j)).max_abs() < 1e-14);
        }
    }

    #[test]
    fn blaschke_errors() {
        let id = CMat::identity(1);
        assert!(matches!(
            blaschke_potapov(&[(c(0.95, 0.0), id.clone())], 1, M),
            Err(Error::ZeroTooLarge { .. })
        ));
        let not_p = CMat::from_real_diag(&[0.5]);
        assert!(matches!(blaschke_potapov(&[(c(0.1, 0.0), not_p)], 1, M), Err(Error::NotProjection { .. })));
        // one rank-one factor in d = 2 leaves a fixed direction: impure
        let p = CMat::from_real_diag(&[1.0, 0.0]);
        assert!(matches!(blaschke_potapov(&[(c(0.2, 0.0), p)], 2, M), Err(Error::NotPure { .. })));
    }

    #[test]
    fn certify_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let u = random::unitary(&mut rng, 2);
        let cst = certify(&CircleFn::constant(&u, M).unwrap()).unwrap();
        assert!(cst.is_constant());
        assert_eq!(cst.degree_hint(), Some(0));

        let z = CircleFn::monomial(1, &CMat::identity(2), M).unwrap();
        let t = certify(&z).unwrap();
        assert!(!t.is_constant());
        assert_eq!(t.purity(), 0.0);

        let half = CircleFn::monomial(1, &CMat::identity(2).scale_real(0.5), M).unwrap();
        assert!(matches!(certify(&half), Err(Error::NotInner(_))));
        let zbar = CircleFn::monomial(-1, &CMat::identity(1), M).unwrap();
        assert!(matches!(certify(&zbar), Err(Error::NotInner(_))));
        assert!(matches!(certify(&CircleFn::zeros(2, 3, M).unwrap()), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn certify_flags_unresolved_grid() {
        // zero near the circle on a coarse grid: coefficients 0.9^k never die out
        let b = blaschke_potapov(&[(c(0.9, 0.0), CMat::identity(1))], 1, 64);
        assert!(matches!(b, Err(Error::NotInner(_))));
        assert!(blaschke_potapov(&[(c(0.9, 0.0), CMat::identity(1))], 1, 1024).is_ok());
    }

    #[test]
    fn crofoot_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let theta = InnerSpec::random_bp(&mut rng, 2, 3, 0.6).build(M).unwrap();
        let same = crofoot_inner(&theta, &CMat::zeros(2, 2)).unwrap();
        assert_eq!(same.func().samples(), theta.func().samples());

        let mono = monomial(2, 2, 1024).unwrap();
        let w = random::strict_contraction(&mut rng, 2, 0.8);
        let tp = crofoot_inner(&mono, &w).unwrap();
        assert!((&tp.eval(c(0.0, 0.0)).unwrap() + &w).max_abs() < 1e-14);
        assert!((&tp.func().coeff(0) + &w).max_abs() < 1e-12);
        assert_eq!(tp.degree_hint(), Some(4));

        let w0 = theta.at_zero().clone();
        let tp = crofoot_inner(&theta, &w0).unwrap();
        assert!(tp.at_zero().operator_norm() <= 1e-10);
        assert!(tp.func().coeff(0).operator_norm() <= 1e-10);
    }

    #[test]
    fn crofoot_rejects_non_strict() {
        let theta = monomial(1, 1, M).unwrap();
        let w = CMat::scalar(c(1.0, 0.0));
        assert!(matches!(crofoot_inner(&theta, &w), Err(Error::NotStrictContraction { .. })));
    }

    #[test]
    fn spec_json_forms() {
        let spec: InnerSpec = serde_json::from_str(r#"{"type":"monomial","n":2,"d":1}"#).unwrap();
        assert_eq!(spec, InnerSpec::Monomial { n: 2, d: 1 });
        let bp: InnerSpec =
            serde_json::from_str(r#"{"type":"bp","d":1,"factors":[{"w":[0.5,0],"P":[[1]]}]}"#).unwrap();
        assert_eq!(bp.dim(), 1);
        let cf: InnerSpec = serde_json::from_str(
            r#"{"type":"crofoot","base":{"type":"monomial","n":1,"d":1},"W":[[0.3]]}"#,
        )
        .unwrap();
        let t = cf.build(M).unwrap();
        assert!((t.at_zero()[(0, 0)] + c(0.3, 0.0)).norm() < 1e-14);
        let text = serde_json::to_string(&cf).unwrap();
        assert_eq!(serde_json::from_str::<InnerSpec>(&text).unwrap(), cf);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(16))]

            #[test]
            fn crofoot_with_negated_parameter_inverts(seed in any::<u64>(), d in 1usize..4) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let theta = InnerSpec::random_bp(&mut rng, d, d + 1, 0.6).build(1024).unwrap();
                let w = random::strict_contraction(&mut rng, d, 0.8);
                let tp = crofoot_inner(&theta, &w).unwrap();
                let back = crofoot_inner(&tp, &-&w).unwrap();
                prop_assert!(back.func().max_sample_distance(theta.func()).unwrap() <= 1e-8);
            }

            #[test]
            fn transformed_identity_holds(seed in any::<u64>(), d in 1usize..4) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let theta = InnerSpec::random_bp(&mut rng, d, d + 1, 0.6).build(1024).unwrap();
                let w = random::strict_contraction(&mut rng, d, 0.8);
                let tp = crofoot_inner(&theta, &w).unwrap();
                prop_assert!(crofoot_identity_defect(&theta, &tp, &w).unwrap() <= 1e-9);
            }

            #[test]
            fn blaschke_potapov_is_unitary_on_grid(seed in any::<u64>(), d in 1usize..4, extra in 0usize..3) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let theta = InnerSpec::random_bp(&mut rng, d, d + extra, 0.9).build(1024).unwrap();
                prop_assert!(theta.unitarity_defect() <= 1e-10);
            }
        }
    }
}
