use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::hermite::ChaosExpansion;
use crate::scalar::Scalar;

/// Outcome of one identity or inequality check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub identity: String,
    /// The mathematical statement being checked.
    pub statement: String,
    pub max_abs_residual: f64,
    pub max_rel_residual: f64,
    pub nodes_checked: usize,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(default)]
    pub diagnostics: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl IdentityReport {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn with_diagnostic(mut self, key: &str, value: f64) -> Self {
        self.diagnostics.insert(key.to_string(), value);
        self
    }

    /// Folds `other` into `self`: worst residuals, summed node counts, and
    /// `pass` only if both passed.
    pub fn absorb(&mut self, other: &IdentityReport) {
        self.max_abs_residual = self.max_abs_residual.max(other.max_abs_residual);
        self.max_rel_residual = self.max_rel_residual.max(other.max_rel_residual);
        self.nodes_checked += other.nodes_checked;
        self.pass = self.pass && other.pass;
    }
}

/// Running maxima of `|lhs - rhs|` and of the magnitudes of both sides.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Residuals {
    pub max_abs: f64,
    pub max_lhs: f64,
    pub max_rhs: f64,
    pub count: usize,
    /// Lower bound on the normalizer; `1` unless the check compares rates.
    pub scale_floor: Option<f64>,
}

impl Residuals {
    pub fn pointwise<T: Scalar>(lhs: &[T], rhs: &[T]) -> Self {
        let mut r = Residuals::default();
        for (&a, &b) in lhs.iter().zip(rhs) {
            r.push(a.as_f64(), b.as_f64(), (a - b).abs().as_f64());
        }
        r
    }

    pub fn scalar<T: Scalar>(lhs: T, rhs: T, nodes: usize) -> Self {
        let mut r = Residuals::default();
        r.push(lhs.as_f64(), rhs.as_f64(), (lhs - rhs).abs().as_f64());
        r.count = nodes;
        r
    }

    /// One-sided `lhs ≤ rhs`: only the excess counts.
    pub fn at_most<T: Scalar>(lhs: T, rhs: T, nodes: usize) -> Self {
        let mut r = Residuals::default();
        let excess = (lhs - rhs).max(T::zero()).as_f64();
        r.push(lhs.as_f64(), rhs.as_f64(), excess);
        r.count = nodes;
        r
    }

    /// Coefficient-wise comparison over the union of supports.
    pub fn coefficients<T: Scalar>(a: &ChaosExpansion<T>, b: &ChaosExpansion<T>) -> Result<Self> {
        let diff = a.max_coefficient_difference(b)?.as_f64();
        Ok(Residuals {
            max_abs: diff,
            max_lhs: a.max_abs_coefficient().as_f64(),
            max_rhs: b.max_abs_coefficient().as_f64(),
            count: a.len().max(b.len()),
            scale_floor: None,
        })
    }

    pub fn push(&mut self, lhs: f64, rhs: f64, residual: f64) {
        self.max_abs = nan_max(self.max_abs, residual);
        self.max_lhs = nan_max(self.max_lhs, lhs.abs());
        self.max_rhs = nan_max(self.max_rhs, rhs.abs());
        self.count += 1;
    }

    pub fn merge(self, other: Residuals) -> Self {
        Residuals {
            max_abs: nan_max(self.max_abs, other.max_abs),
            max_lhs: nan_max(self.max_lhs, other.max_lhs),
            max_rhs: nan_max(self.max_rhs, other.max_rhs),
            count: self.count + other.count,
            scale_floor: self.scale_floor.or(other.scale_floor),
        }
    }

    /// Normalize by `max(floor, max|lhs|, max|rhs|)` instead of the default floor `1`.
    pub fn with_scale_floor(mut self, floor: f64) -> Self {
        self.scale_floor = Some(floor);
        self
    }

    pub fn relative(&self) -> f64 {
        let scale = self.scale_floor.unwrap_or(1.0).max(self.max_lhs).max(self.max_rhs);
        if self.max_abs == 0.0 {
            0.0
        } else if scale > 0.0 {
            self.max_abs / scale
        } else {
            f64::INFINITY
        }
    }

    pub fn into_report(self, identity: &str, statement: &str, tolerance: f64) -> IdentityReport {
        let rel = self.relative();
        IdentityReport {
            identity: identity.to_string(),
            statement: statement.to_string(),
            max_abs_residual: self.max_abs,
            max_rel_residual: rel,
            nodes_checked: self.count,
            tolerance,
            // NaN residuals fail.
            pass: rel <= tolerance,
            diagnostics: BTreeMap::new(),
            seed: None,
        }
    }
}

fn nan_max(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

/// Relative tolerances for every check family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub weitzenbock: f64,
    pub bochner: f64,
    pub bochner_fd: f64,
    pub integration_by_parts: f64,
    /// Coefficient-wise identities: semigroup law, commutations, mass.
    pub exact: f64,
    pub backend: f64,
    /// Contraction and other `≤` checks.
    pub one_sided: f64,
    pub entropy_bound: f64,
    pub projection: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            weitzenbock: 1e-10,
            bochner: 1e-8,
            bochner_fd: 1e-6,
            integration_by_parts: 1e-10,
            exact: 1e-12,
            backend: 1e-10,
            one_sided: 1e-12,
            entropy_bound: 1e-10,
            projection: 1e-14,
        }
    }
}

impl Tolerances {
    /// Every tolerance multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Tolerances {
            weitzenbock: self.weitzenbock * factor,
            bochner: self.bochner * factor,
            bochner_fd: self.bochner_fd * factor,
            integration_by_parts: self.integration_by_parts * factor,
            exact: self.exact * factor,
            backend: self.backend * factor,
            one_sided: self.one_sided * factor,
            entropy_bound: self.entropy_bound * factor,
            projection: self.projection * factor,
        }
    }
}
