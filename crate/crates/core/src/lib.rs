//! Ornstein–Uhlenbeck calculus on finite Hermite chaos expansions.
//!
//! Functions on `(ℝⁿ, γ_n)` are represented as expansions in the orthonormal
//! tensor Hermite basis. On that representation the OU generator, semigroup,
//! gradient and divergence act exactly, and nonlinear quantities (entropy,
//! Fisher information, the Bochner-type identity for `|∇u|²/u`) are evaluated
//! by tensor Gauss–Hermite quadrature.
//!
//! Everything is generic over [`Scalar`] (`f32` or `f64`); the aliases at the
//! crate root fix `f64`, which is what the tolerances in [`verifier`] and
//! [`experiments`] are calibrated for.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod functionals;
pub mod hermite;
pub mod ou;
pub mod random;
pub mod scalar;
pub mod verifier;

pub use error::{Error, Result};
pub use hermite::{
    enumerate_multi_indices, evaluate_expansion, expansion_to_grid, gauss_hermite_grid, hermite_eval,
    normalized_hermite_eval, project_to_expansion, MultiIndex,
};
pub use scalar::Scalar;

pub type Expansion = hermite::ChaosExpansion<f64>;
pub type Grid = hermite::QuadratureGrid<f64>;
pub type GridValues<'g> = hermite::GridFunction<'g, f64>;
