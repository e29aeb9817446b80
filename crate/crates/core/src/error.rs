use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failures raised anywhere in the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("matrix is not Hermitian (‖A − A*‖ = {defect:e})")]
    NotHermitian { defect: f64 },
    #[error("matrix is not positive semidefinite (smallest eigenvalue {min_eig:e})")]
    NotPsd { min_eig: f64 },
    #[error("not a strict contraction (‖W‖ = {norm})")]
    NotStrictContraction { norm: f64 },
    #[error("matrix is singular or too ill-conditioned")]
    Singular,
    #[error("Fourier index {k} outside [-{half}, {half})")]
    BadIndex { k: i64, half: i64 },
    #[error("Fourier support [{lo}, {hi}] does not fit a grid of {grid} points")]
    DegreeOverflow { lo: i64, hi: i64, grid: usize },
    #[error("grid size {0} must be a power of two in [8, 65536]")]
    BadGrid(usize),
    #[error("bad degree: {0}")]
    BadDegree(String),
    #[error("not an orthogonal projection (defect {defect:e})")]
    NotProjection { defect: f64 },
    #[error("Blaschke zero |w| = {modulus} exceeds the cap {cap}")]
    ZeroTooLarge { modulus: f64, cap: f64 },
    #[error("inner function is not pure (‖Θ(0)‖ = {purity})")]
    NotPure { purity: f64 },
    #[error("not an inner function: {0}")]
    NotInner(String),
    #[error("point |λ| = {modulus} is too close to the unit circle (cap {cap})")]
    PointTooClose { modulus: f64, cap: f64 },
    #[error("model space has no known finite dimension")]
    InfiniteDimensional,
    #[error("kernel span is deficient: found {found} directions, expected {expected}")]
    DeficientSpan { found: usize, expected: usize },
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("transform is not unitary (defect {defect:e})")]
    NotUnitary { defect: f64 },
    #[error("bad block shape: {0}")]
    BadShape(String),
}
