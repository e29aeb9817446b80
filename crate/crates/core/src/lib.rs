//! Numerical toolkit for matrix-valued model spaces `K_Θ = H²(E) ⊖ ΘH²(E)`,
//! asymmetric truncated Toeplitz operators between them, and the generalized
//! Crofoot transform.
//!
//! All functions on the unit circle are sampled on a uniform power-of-two
//! grid; operators between finite-dimensional model spaces are materialized
//! as dense matrices in orthonormal bases.

pub mod circle_fun;
pub mod crofoot;
pub mod error;
pub mod inner;
pub mod matops;
pub mod model_space;
pub mod random;
pub mod selftest;
pub mod tto;
pub mod zerosym;

pub use circle_fun::CircleFn;
pub use error::{Error, Result};
pub use inner::{InnerFn, InnerSpec};
pub use matops::{CMat, Side, C64};
