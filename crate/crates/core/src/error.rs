use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error(
        "tensor grid with {nodes} nodes exceeds the node budget of {budget}; \
         use a smaller dimension or quadrature order (Monte-Carlo integration is not supported)"
    )]
    NodeBudgetExceeded { nodes: u128, budget: u64 },

    #[error("time must be non-negative, got {0}")]
    NegativeTime(f64),

    #[error("retained dimension {k} out of range 1..={n}")]
    DimensionOutOfRange { k: usize, n: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error(
        "positivity certificate invalid: min value {min_observed:e} at node {node} is below floor {floor:e}"
    )]
    InvalidCertificate { min_observed: f64, floor: f64, node: usize },

    #[error("certificate was issued for a grid with (n={cert_dim}, m={cert_order}), not (n={grid_dim}, m={grid_order})")]
    CertificateGridMismatch { cert_dim: usize, cert_order: usize, grid_dim: usize, grid_order: usize },

    #[error("density lost positivity at t = {t}: value {value:e} at node {node} (coordinates {coords:?}) is below floor {floor:e}")]
    PositivityLost { t: f64, node: usize, coords: Vec<f64>, value: f64, floor: f64 },

    #[error("decay-rate fit needs strictly positive Fisher information; got {value:e} at t = {t}")]
    NonPositiveFisher { t: f64, value: f64 },

    #[error("need at least {needed} time points, got {got}")]
    TooFewTimePoints { needed: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
