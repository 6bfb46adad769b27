//! Orthonormal Hermite basis for the standard Gaussian measure: multi-index
//! bookkeeping, chaos expansions, tensor Gauss–Hermite quadrature and the
//! conversions between coefficient and nodal representations.

mod expansion;
mod grid_function;
mod multi_index;
mod polynomial;
mod quadrature;

pub use expansion::{evaluate_expansion, ChaosExpansion, PRUNE_THRESHOLD};
pub use grid_function::{expansion_to_grid, project_to_expansion, GridFunction};
pub use multi_index::{enumerate_multi_indices, MultiIndex};
pub use polynomial::{hermite_eval, normalized_hermite_eval, normalized_hermite_table};
pub use quadrature::{check_node_budget, gauss_hermite_grid, jacobi_eigen, GaussHermiteRule, QuadratureGrid, DEFAULT_NODE_BUDGET};
