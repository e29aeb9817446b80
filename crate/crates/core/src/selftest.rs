//! Seeded instances and the invariant suites run by `msk selftest`.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circle_fun::CircleFn;
use crate::crofoot::{self, CrofootPair};
use crate::error::{Error, Result};
use crate::inner::{self, InnerFn, InnerSpec};
use crate::matops::{CMat, Side, C64};
use crate::model_space::{self, ModelSpaceBasis};
use crate::random;
use crate::tto;
use crate::zerosym::{self, Finding};

/// Grid used for seeded instances unless a caller asks otherwise.
pub const INSTANCE_GRID: usize = 1024;
/// Largest Blaschke–Potapov degree drawn for instances.
pub const MAX_BP_DEGREE: usize = 4;
/// Norm bound for seeded contractions.
pub const CONTRACTION_SCALE: f64 = 0.8;
/// Zeros of seeded products stay in this disk.
pub const ZERO_RADIUS: f64 = 0.6;

/// Named tolerances with documented defaults; callers may override any key.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerances(pub BTreeMap<String, f64>);

impl Default for Tolerances {
    fn default() -> Self {
        let pairs = [
            ("unitarity", 1e-7),
            ("intertwining", 1e-6),
            ("inversion", 1e-9),
            ("identity", 1e-9),
            ("kernel_action", 1e-8),
            ("sufficiency", 1e-7),
            ("reproducing", 1e-9),
            ("adjoint", 1e-9),
            ("class_shift", 1e-8),
            ("purity", 1e-10),
            ("block_toeplitz", 1e-9),
            ("mutation", 1e-3),
            ("gram", 1e-9),
            ("membership", 1e-8),
            ("projection_route", 1e-9),
        ];
        Tolerances(pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect())
    }
}

impl Tolerances {
    pub fn get(&self, key: &str) -> f64 {
        self.0.get(key).copied().unwrap_or_else(|| Tolerances::default().0[key])
    }

    /// Applies overrides; unknown keys are rejected.
    pub fn with_overrides(mut self, overrides: &BTreeMap<String, f64>) -> Result<Self> {
        for (k, v) in overrides {
            if !self.0.contains_key(k) {
                return Err(Error::BadShape(format!("unknown tolerance key {k:?}")));
            }
            self.0.insert(k.clone(), *v);
        }
        Ok(self)
    }
}

/// Laurent polynomial with Gaussian coefficients on `[-degree, degree]`.
pub fn random_laurent<R: Rng + ?Sized>(rng: &mut R, d: usize, degree: i64, scale: f64) -> BTreeMap<i64, CMat> {
    (-degree..=degree).map(|k| (k, random::gaussian(rng, d, d).scale_real(scale))).collect()
}

/// One seeded configuration: two pure inner functions, two contractions and
/// a Laurent symbol.
#[derive(Debug, Clone)]
pub struct Instance {
    pub seed: u64,
    pub d: usize,
    pub spec1: InnerSpec,
    pub spec2: InnerSpec,
    pub theta1: InnerFn,
    pub theta2: InnerFn,
    pub w1: CMat,
    pub w2: CMat,
    pub phi_coeffs: BTreeMap<i64, CMat>,
    pub phi: CircleFn,
}

impl Instance {
    /// Draws `d ≤ max_d`, product degrees in `[d, 4]`, `‖W‖ < 0.8` and a
    /// symbol of degree ≤ 3. Draws whose transforms the grid cannot resolve
    /// are redrawn from the same stream.
    pub fn generate(seed: u64, max_d: usize, grid: usize) -> Result<Instance> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = rng.random_range(1..=max_d.max(1));
        let mut last = Error::InfiniteDimensional;
        for _ in 0..32 {
            let deg1 = rng.random_range(d..=MAX_BP_DEGREE.max(d));
            let deg2 = rng.random_range(d..=MAX_BP_DEGREE.max(d));
            let spec1 = InnerSpec::random_bp(&mut rng, d, deg1, ZERO_RADIUS);
            let spec2 = InnerSpec::random_bp(&mut rng, d, deg2, ZERO_RADIUS);
            let w1 = random::strict_contraction(&mut rng, d, CONTRACTION_SCALE);
            let w2 = random::strict_contraction(&mut rng, d, CONTRACTION_SCALE);
            let sym_deg = rng.random_range(0..=3);
            let phi_coeffs = random_laurent(&mut rng, d, sym_deg, 1.0);
            let inst = Instance::from_parts(seed, spec1, spec2, w1, w2, phi_coeffs, grid);
            match inst {
                Ok(i) => return Ok(i),
                Err(e) => last = e,
            }
        }
        Err(last)
    }

    /// Builds an instance from explicit draws.
    pub fn from_parts(
        seed: u64,
        spec1: InnerSpec,
        spec2: InnerSpec,
        w1: CMat,
        w2: CMat,
        phi_coeffs: BTreeMap<i64, CMat>,
        grid: usize,
    ) -> Result<Instance> {
        let d = spec1.dim();
        let theta1 = spec1.build(grid)?;
        let theta2 = spec2.build(grid)?;
        // the transformed functions must also be resolved by the grid
        inner::crofoot_inner(&theta1, &w1)?;
        inner::crofoot_inner(&theta2, &w2)?;
        let phi = CircleFn::from_fourier(&phi_coeffs, grid)?;
        Ok(Instance { seed, d, spec1, spec2, theta1, theta2, w1, w2, phi_coeffs, phi })
    }

    /// Same draws sampled on another grid.
    pub fn on_grid(&self, grid: usize) -> Result<Instance> {
        Instance::from_parts(
            self.seed,
            self.spec1.clone(),
            self.spec2.clone(),
            self.w1.clone(),
            self.w2.clone(),
            self.phi_coeffs.clone(),
            grid,
        )
    }
}

/// Residuals of the Crofoot checks on one instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrofootResiduals {
    pub unitarity: f64,
    /// `‖J₂A_ΦJ₁* − A_Ψ‖ / ‖A_Φ‖`.
    pub push: f64,
    /// `‖J₂*A_ΨJ₁ − A_Φ‖ / ‖A_Ψ‖` for an independent `Ψ`.
    pub pull: f64,
    /// Forward residual of the symbol formula taken verbatim.
    pub push_as_published: f64,
    pub inversion: f64,
    pub identity: f64,
}

/// Runs the transform checks. The reverse-direction symbol is drawn from
/// `rng` so the caller controls reproducibility.
pub fn crofoot_residuals<R: Rng + ?Sized>(inst: &Instance, rng: &mut R) -> Result<(CrofootResiduals, CrofootPair, CrofootPair)> {
    let p1 = CrofootPair::new(&inst.theta1, &inst.w1)?;
    let p2 = CrofootPair::new(&inst.theta2, &inst.w2)?;
    let (t1p, t2p) = (p1.theta_prime().clone(), p2.theta_prime().clone());
    let phi = &inst.phi;
    let psi = crofoot::symbol_push(phi, &inst.w1, &inst.w2, &inst.theta1, &inst.theta2, &t1p)?;
    let a_phi = relative_scale(tto::build(&p1.basis, &p2.basis, phi)?.mat.operator_norm());
    let push = crofoot::push_defect(&p1, &p2, phi, &psi)? / a_phi;
    let published = crofoot::symbol_push_as_published(phi, &inst.w1, &inst.w2, &inst.theta2, &t1p)?;
    let push_as_published = crofoot::push_defect(&p1, &p2, phi, &published)? / a_phi;

    let psi_coeffs = random_laurent(rng, inst.d, 3, 1.0);
    let psi_rev = CircleFn::from_fourier(&psi_coeffs, phi.grid())?;
    let phi_rev = crofoot::symbol_pull(&psi_rev, &inst.w1, &inst.w2, &inst.theta1, &t2p)?;
    let a_psi = relative_scale(tto::build(&p1.basis_prime, &p2.basis_prime, &psi_rev)?.mat.operator_norm());
    let pull = crofoot::pull_defect(&p1, &p2, &psi_rev, &phi_rev)? / a_psi;

    let back = crofoot::symbol_pull(&psi, &inst.w1, &inst.w2, &inst.theta1, &t2p)?;
    let inversion = back.max_sample_distance(phi)?;
    let identity = inner::crofoot_identity_defect(&inst.theta1, &t1p, &inst.w1)?
        .max(inner::crofoot_identity_defect(&inst.theta2, &t2p, &inst.w2)?);
    let unitarity = p1.unitarity_defect.max(p2.unitarity_defect);
    Ok((CrofootResiduals { unitarity, push, pull, push_as_published, inversion, identity }, p1, p2))
}

/// Divisor for relative residuals; vanishing operators fall back to absolute.
fn relative_scale(norm: f64) -> f64 {
    if norm > 1e-12 {
        norm
    } else {
        1.0
    }
}

/// Forward symbol with the sign of `W₂Θ₂*` flipped; used to confirm the
/// intertwining check has teeth.
pub fn mutated_push(inst: &Instance, p1: &CrofootPair) -> Result<CircleFn> {
    let d = inst.d;
    let dws_inv = inst.w2.defect(Side::Left)?.inverse()?;
    let id = CMat::identity(d);
    let left = inst
        .theta2
        .func()
        .map_samples(d, d, |_, _, t| Ok(&dws_inv * &(&id + &(&inst.w2 * &t.adjoint()))))?;
    left.mul(&inst.phi)?.mul(p1.backward_multiplier())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Quick,
    Full,
}

impl Level {
    pub fn max_d(self) -> usize {
        match self {
            Level::Quick => 2,
            Level::Full => 3,
        }
    }

    pub fn seeds(self) -> u64 {
        match self {
            Level::Quick => 5,
            Level::Full => 20,
        }
    }
}

/// Outcome of one invariant over all seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantResult {
    pub name: String,
    pub cases: usize,
    pub worst: f64,
    pub tol: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SelftestReport {
    pub results: Vec<InvariantResult>,
    pub findings: Vec<Finding>,
}

impl SelftestReport {
    pub fn all_passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }
}

#[derive(Default)]
struct Tally {
    worst: BTreeMap<&'static str, (usize, f64)>,
    /// checks that must stay above their threshold
    floor: BTreeMap<&'static str, (usize, f64)>,
}

impl Tally {
    fn max(&mut self, name: &'static str, v: f64) {
        let e = self.worst.entry(name).or_insert((0, 0.0));
        e.0 += 1;
        e.1 = if v.is_nan() { f64::INFINITY } else { e.1.max(v) };
    }

    fn min(&mut self, name: &'static str, v: f64) {
        let e = self.floor.entry(name).or_insert((0, f64::INFINITY));
        e.0 += 1;
        e.1 = if v.is_nan() { 0.0 } else { e.1.min(v) };
    }
}

/// Runs every invariant suite at the given level.
pub fn run(level: Level, base_seed: u64, tol: &Tolerances) -> Result<SelftestReport> {
    let mut tally = Tally::default();
    let mut findings = Vec::new();
    for i in 0..level.seeds() {
        let seed = base_seed.wrapping_add(i);
        let inst = Instance::generate(seed, level.max_d(), INSTANCE_GRID)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
        let (res, p1, p2) = crofoot_residuals(&inst, &mut rng)?;
        tally.max("unitarity", res.unitarity);
        tally.max("intertwining", res.push.max(res.pull));
        tally.max("inversion", res.inversion);
        tally.max("identity", res.identity);
        let published_tol = tol.get("intertwining");
        findings.push(Finding {
            check: "published_forward_symbol_intertwines".into(),
            instance_seed: seed,
            lhs: res.push_as_published,
            rhs: 0.0,
            tolerance: published_tol,
            verdict: if res.push_as_published <= published_tol { "holds" } else { "violated" }.into(),
        });

        let a_phi = tto::build(&p1.basis, &p2.basis, &inst.phi)?.mat.operator_norm();
        let mutated = mutated_push(&inst, &p1)?;
        if a_phi > 1e-8 {
            tally.min("mutation", crofoot::push_defect(&p1, &p2, &inst.phi, &mutated)? / a_phi);
        }

        for _ in 0..10 {
            let lambda = random::disk_point(&mut rng, 0.9);
            let y = random::unit_vector(&mut rng, inst.d);
            tally.max("kernel_action", crofoot::kernel_action_defect(&p1, lambda, &y)?);
        }

        let (b1, b2) = (&p1.basis, &p2.basis);
        let grid = inst.phi.grid();
        let g1 = CircleFn::from_fourier(&random_analytic(&mut rng, inst.d, 3), grid)?;
        let g2 = CircleFn::from_fourier(&random_analytic(&mut rng, inst.d, 3), grid)?;
        let member = inst.theta1.func().mul(&g1)?.adjoint_fn().add(&inst.theta2.func().mul(&g2)?)?;
        let scale = member.norm();
        tally.max("sufficiency", tto::build(b1, b2, &member)?.mat.operator_norm() / scale);
        for phi in [&member, &inst.phi] {
            let r = zerosym::zero_equivalence_check(phi, b1, b2)?;
            tally.max("zero_equivalence", if r.consistent { 0.0 } else { 1.0 });
            if !r.consistent {
                findings.push(r.to_finding(seed));
            }
        }

        let coords: Vec<C64> = (0..b1.dim()).map(|_| random::complex_normal(&mut rng)).collect();
        let f = b1.combine(&coords)?;
        for _ in 0..5 {
            let lambda = random::disk_point(&mut rng, 0.9);
            let x = random::unit_vector(&mut rng, inst.d);
            let k = model_space::kernel(&inst.theta1, lambda, &x)?;
            let lhs = f.inner_product(&k)?;
            let fl = f.eval_analytic(lambda);
            let rhs: C64 = (0..inst.d).map(|r| fl[(r, 0)] * x[r].conj()).sum();
            tally.max("reproducing", (lhs - rhs).norm());
        }

        tally.max("adjoint", tto::adjoint_pair_check(b1, b2, &inst.phi)?);

        let pair = zerosym::symbol_pair(&inst.phi, &inst.theta1, &inst.theta2)?;
        let x = random::gaussian(&mut rng, inst.d, inst.d);
        let shifted = zerosym::class_shift(&pair, &x, &inst.theta1, &inst.theta2)?;
        let before = tto::build(b1, b2, &zerosym::pair_symbol(&pair)?)?.mat;
        let after = tto::build(b1, b2, &zerosym::pair_symbol(&shifted)?)?.mat;
        tally.max("class_shift", (&after - &before).operator_norm() / relative_scale(before.operator_norm()));

        let w0 = inst.theta1.at_zero().clone();
        tally.max("purity", inner::crofoot_inner(&inst.theta1, &w0)?.at_zero().operator_norm());

        let (n, m) = (rng.random_range(1..=4usize), 0);
        let m = rng.random_range(1..=n.max(m + 1));
        let d = inst.d;
        let mono_phi = CircleFn::from_fourier(&random_laurent(&mut rng, d, 3, 1.0), grid)?;
        let bn = ModelSpaceBasis::new(&inner::monomial(n, d, grid)?)?;
        let bm = ModelSpaceBasis::new(&inner::monomial(m, d, grid)?)?;
        let built = tto::build(&bn, &bm, &mono_phi)?.mat;
        let deltas: BTreeMap<i64, CMat> =
            (-(m as i64 - 1)..=(n as i64 - 1)).map(|s| (s, mono_phi.coeff(-s))).collect();
        let bt = tto::block_toeplitz(n, m, d, &deltas)?;
        tally.max("block_toeplitz", (&built - &bt).max_abs());

        let dim = zerosym::tto_space_dim_with(&bn, &bm)?;
        let expected = ((n + m - 1) * d * d) as f64;
        tally.max("dimension", (dim.computed as f64 - expected).abs());
        if !dim.formula_agrees() {
            findings.push(dim.to_finding(seed));
        }
    }

    let mut results = Vec::new();
    for (name, (cases, worst)) in &tally.worst {
        let t = match *name {
            "zero_equivalence" | "dimension" => 0.0,
            other => tol.get(other),
        };
        results.push(InvariantResult { name: name.to_string(), cases: *cases, worst: *worst, tol: t, passed: *worst <= t });
    }
    for (name, (cases, floor)) in &tally.floor {
        let t = tol.get(name);
        results.push(InvariantResult { name: format!("{name}_detected"), cases: *cases, worst: *floor, tol: t, passed: *floor > t });
    }
    Ok(SelftestReport { results, findings })
}

fn random_analytic<R: Rng + ?Sized>(rng: &mut R, d: usize, degree: i64) -> BTreeMap<i64, CMat> {
    (0..=degree).map(|k| (k, random::gaussian(rng, d, d))).collect()
}
