//! Model spaces `K_Θ = H²(E) ⊖ ΘH²(E)`: projection, reproducing kernels,
//! orthonormal bases and inclusion tests.

use crate::circle_fun::CircleFn;
use crate::error::{Error, Result};
use crate::inner::InnerFn;
use crate::matops::{CMat, C64};

/// Kernel points must satisfy `|λ| ≤ KERNEL_POINT_CAP`.
pub const KERNEL_POINT_CAP: f64 = 0.9;
/// Radius of the seed spiral used for kernel-span bases.
pub const SEED_RADIUS: f64 = 0.6;
/// Relative threshold below which a kernel adds no new direction.
pub const RANK_REL_TOL: f64 = 1e-10;
/// Largest accepted `‖Gram − I‖_F` of a basis.
pub const GRAM_TOL: f64 = 1e-9;

/// Orthogonal projection onto `ΘH²`: `Θ · P₊(Θ* g)`. Acts column by column
/// on matrix-valued `g`.
pub fn range_projection(theta: &InnerFn, g: &CircleFn) -> Result<CircleFn> {
    let theta_fn = theta.func();
    theta_fn.mul(&theta_fn.adjoint_fn().mul(g)?.riesz_plus())
}

/// `P_Θ f = f − Θ P₊(Θ* f)` for analytic `f`.
pub fn project(theta: &InnerFn, f: &CircleFn) -> Result<CircleFn> {
    f.sub(&range_projection(theta, f)?)
}

/// Reproducing kernel `k_λ^Θ x = (1 − λ̄z)^{-1} (I − Θ(z)Θ(λ)*) x`.
pub fn kernel(theta: &InnerFn, lambda: C64, x: &[C64]) -> Result<CircleFn> {
    if lambda.norm() > KERNEL_POINT_CAP {
        return Err(Error::PointTooClose { modulus: lambda.norm(), cap: KERNEL_POINT_CAP });
    }
    let d = theta.d();
    if x.len() != d {
        return Err(Error::ShapeMismatch(format!("kernel direction of length {} for d = {d}", x.len())));
    }
    let tl_star_x = &theta.eval(lambda)?.adjoint() * &CMat::column_vector(x);
    let one = C64::new(1.0, 0.0);
    theta.func().map_samples(d, 1, |_, z, t| {
        let v = &CMat::column_vector(x) - &(t * &tl_star_x);
        Ok(v.scale(one / (one - lambda.conj() * z)))
    })
}

/// Matrix-valued kernel at the origin, `k₀^Θ(z) = I − Θ(z)Θ(0)*`.
pub fn kernel_at_zero(theta: &InnerFn) -> Result<CircleFn> {
    let d = theta.d();
    let id = CircleFn::constant(&CMat::identity(d), theta.grid())?;
    id.sub(&theta.func().right_mul(&theta.at_zero().adjoint())?)
}

/// Deterministic spiral of `count` points in `|λ| ≤ SEED_RADIUS`.
pub fn seed_points(count: usize) -> Vec<C64> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|l| {
            let r = SEED_RADIUS * ((l as f64 + 0.5) / count as f64).sqrt();
            C64::from_polar(r, golden * l as f64)
        })
        .collect()
}

/// Orthonormal basis of a finite-dimensional model space.
#[derive(Debug, Clone)]
pub struct ModelSpaceBasis {
    theta: InnerFn,
    elements: Vec<CircleFn>,
    gram_defect: f64,
}

impl ModelSpaceBasis {
    /// Basis with the default number of seed points (`dim + 2`).
    pub fn new(theta: &InnerFn) -> Result<Self> {
        let n = theta.degree_hint().ok_or(Error::InfiniteDimensional)?;
        Self::with_seeds(theta, n + 2)
    }

    /// Monomial `zⁿ I` uses `{z^j e_i}` ordered `j·d + i`; anything else is
    /// orthonormalized from kernels at `seeds` spiral points.
    pub fn with_seeds(theta: &InnerFn, seeds: usize) -> Result<Self> {
        let expected = theta.degree_hint().ok_or(Error::InfiniteDimensional)?;
        let d = theta.d();
        let grid = theta.grid();
        let elements = if let Some(n) = theta.monomial_degree() {
            let mut out = Vec::with_capacity(n * d);
            for j in 0..n {
                for i in 0..d {
                    let mut e = CMat::zeros(d, 1);
                    e[(i, 0)] = C64::new(1.0, 0.0);
                    out.push(CircleFn::monomial(j as i64, &e, grid)?);
                }
            }
            out
        } else if expected == 0 {
            Vec::new()
        } else {
            let mut kernels = Vec::with_capacity(seeds * d);
            for lambda in seed_points(seeds) {
                for i in 0..d {
                    let mut x = vec![C64::new(0.0, 0.0); d];
                    x[i] = C64::new(1.0, 0.0);
                    kernels.push(kernel(theta, lambda, &x)?);
                }
            }
            let found = pivoted_orthonormalize(kernels, RANK_REL_TOL);
            if found.len() != expected {
                return Err(Error::DeficientSpan { found: found.len(), expected });
            }
            // Clean rounding noise out of K_Θ, then re-orthonormalize.
            let cleaned = found.iter().map(|b| project(theta, b)).collect::<Result<Vec<_>>>()?;
            let out = pivoted_orthonormalize(cleaned, RANK_REL_TOL);
            if out.len() != expected {
                return Err(Error::DeficientSpan { found: out.len(), expected });
            }
            out
        };
        let gram_defect = gram_defect(&elements)?;
        if gram_defect > GRAM_TOL {
            return Err(Error::DeficientSpan { found: elements.len(), expected });
        }
        Ok(ModelSpaceBasis { theta: theta.clone(), elements, gram_defect })
    }

    pub fn theta(&self) -> &InnerFn {
        &self.theta
    }

    pub fn dim(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[CircleFn] {
        &self.elements
    }

    pub fn gram_defect(&self) -> f64 {
        self.gram_defect
    }

    /// Coordinates `⟨f, b_i⟩`.
    pub fn coords(&self, f: &CircleFn) -> Result<Vec<C64>> {
        self.elements.iter().map(|b| f.inner_product(b)).collect()
    }

    /// `Σ c_i b_i`.
    pub fn combine(&self, coeffs: &[C64]) -> Result<CircleFn> {
        if coeffs.len() != self.dim() {
            return Err(Error::DimMismatch(format!("{} coordinates for dimension {}", coeffs.len(), self.dim())));
        }
        let mut acc = CircleFn::zeros(self.theta.d(), 1, self.theta.grid())?;
        for (c, b) in coeffs.iter().zip(&self.elements) {
            acc = acc.lin_comb(C64::new(1.0, 0.0), b, *c)?;
        }
        Ok(acc)
    }

    /// `max_b ‖P_Θ b − b‖` over the basis.
    pub fn membership_defect(&self) -> Result<f64> {
        self.elements
            .iter()
            .map(|b| Ok(range_projection(&self.theta, b)?.norm()))
            .try_fold(0.0f64, |acc, r: Result<f64>| Ok(acc.max(r?)))
    }

    /// `max_b ‖b − Θ₂P₊(Θ₂* b)‖` over this basis; zero iff `K_Θ ⊂ Θ₂H²`.
    pub fn inclusion_defect(&self, theta2: &InnerFn) -> Result<f64> {
        self.elements
            .iter()
            .map(|b| Ok(project(theta2, b)?.norm()))
            .try_fold(0.0f64, |acc, r: Result<f64>| Ok(acc.max(r?)))
    }
}

/// Inclusion defect of `K_Θ₁` in `Θ₂H²`.
pub fn inclusion_defect(theta1: &InnerFn, theta2: &InnerFn) -> Result<f64> {
    ModelSpaceBasis::new(theta1)?.inclusion_defect(theta2)
}

fn gram_defect(elements: &[CircleFn]) -> Result<f64> {
    let n = elements.len();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            let g = elements[j].inner_product(&elements[i])?;
            let target = if i == j { 1.0 } else { 0.0 };
            acc += (g - C64::new(target, 0.0)).norm_sqr();
        }
    }
    Ok(acc.sqrt())
}

/// Gram–Schmidt with column pivoting and a second orthogonalization pass.
/// Stops when every remaining candidate is below `rel_tol` times the
/// largest initial norm.
fn pivoted_orthonormalize(mut cands: Vec<CircleFn>, rel_tol: f64) -> Vec<CircleFn> {
    let reference = cands.iter().map(CircleFn::norm).fold(0.0, f64::max);
    let mut basis: Vec<CircleFn> = Vec::new();
    if reference == 0.0 {
        return basis;
    }
    let one = C64::new(1.0, 0.0);
    while !cands.is_empty() {
        let (idx, best) = cands
            .iter()
            .map(CircleFn::norm)
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("non-empty");
        if best <= rel_tol * reference {
            break;
        }
        let mut q = cands.swap_remove(idx);
        for b in &basis {
            let p = q.inner_product(b).expect("same shape");
            q = q.lin_comb(one, b, -p).expect("same shape");
        }
        let n = q.norm();
        if n <= rel_tol * reference {
            continue;
        }
        let q = q.scale(C64::new(1.0 / n, 0.0));
        for c in cands.iter_mut() {
            let p = c.inner_product(&q).expect("same shape");
            *c = c.lin_comb(one, &q, -p).expect("same shape");
        }
        basis.push(q);
    }
    basis
}
