//! Seeded randomized suites over the identity checks.
//!
//! Each suite folds its samples into one report per identity carrying the
//! worst residual, the sample count and the seed.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::*;
use crate::functionals::{check_positivity, default_functional_order, FUNCTIONAL_ORDER_MARGIN};
use crate::hermite::{check_node_budget, DEFAULT_NODE_BUDGET};
use crate::random::{random_density, random_polynomial, seeded_rng};

/// Sample counts and shapes for the randomized suites.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    pub seed: u64,
    pub weitzenbock_samples: usize,
    pub weitzenbock_max_degree: usize,
    pub bochner_samples: usize,
    pub bochner_max_degree: usize,
    pub bochner_sup_norm: f64,
    pub bochner_times: Vec<f64>,
    pub bochner_floor: f64,
    pub fd_step: f64,
    pub algebra_samples: usize,
    pub algebra_max_degree: usize,
    pub backend_samples: usize,
    pub backend_max_degree: usize,
    pub backend_times: Vec<f64>,
    pub backend_dimensions: Vec<usize>,
    /// Dimensions sampled uniformly by the Weitzenböck, Bochner and algebra suites.
    pub dimensions: Vec<usize>,
    /// Largest tensor grid any suite may build.
    #[serde(skip)]
    pub node_budget: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 20_240_601,
            weitzenbock_samples: 100,
            weitzenbock_max_degree: 4,
            bochner_samples: 30,
            bochner_max_degree: 3,
            bochner_sup_norm: 0.3,
            bochner_times: vec![0.0, 0.25, 1.0],
            bochner_floor: 0.1,
            fd_step: 1e-4,
            algebra_samples: 100,
            algebra_max_degree: 4,
            backend_samples: 5,
            backend_max_degree: 6,
            backend_times: vec![0.1, 0.5, 1.0],
            backend_dimensions: vec![1, 2],
            dimensions: vec![1, 2, 3],
            node_budget: DEFAULT_NODE_BUDGET,
        }
    }
}

impl SuiteConfig {
    /// Rejects empty or out-of-range settings and any grid that would exceed
    /// the node budget, before any work is done.
    pub fn validate(&self) -> Result<()> {
        let bad = |name: &'static str, reason: &str| Err(Error::InvalidParameter { name, reason: reason.into() });
        if self.dimensions.is_empty() || self.dimensions.contains(&0) {
            return bad("dimensions", "must be a non-empty list of positive integers");
        }
        if self.backend_dimensions.is_empty() || self.backend_dimensions.contains(&0) {
            return bad("backend_dimensions", "must be a non-empty list of positive integers");
        }
        if self.bochner_max_degree == 0 {
            return bad("bochner_max_degree", "must be at least 1");
        }
        if !(self.bochner_sup_norm > 0.0 && self.bochner_sup_norm < 1.0) {
            return bad("bochner_sup_norm", "must lie in (0, 1)");
        }
        if !(self.bochner_floor > 0.0) {
            return bad("bochner_floor", "must be positive");
        }
        if !(self.fd_step > 0.0) {
            return bad("fd_step", "must be positive");
        }
        let times_ok = |ts: &[f64]| ts.iter().all(|t| *t >= 0.0 && t.is_finite());
        if !times_ok(&self.bochner_times) || !times_ok(&self.backend_times) {
            return bad("times", "must be finite and non-negative");
        }
        let max_n = *self.dimensions.iter().max().expect("non-empty");
        let max_backend_n = *self.backend_dimensions.iter().max().expect("non-empty");
        let d = self.backend_max_degree;
        for (n, order) in [
            (max_n, self.weitzenbock_max_degree + 2),
            (max_n, self.bochner_max_degree + FUNCTIONAL_ORDER_MARGIN),
            (max_n, algebra_order(self.algebra_max_degree, self.algebra_max_degree)),
            (max_backend_n, d + 1),
            (max_backend_n, d.div_ceil(2) + 3),
        ] {
            check_node_budget(n, order, self.node_budget)?;
        }
        Ok(())
    }
}

// Exact for products of total degree df + dg + 1 (the divergence raises degree by one).
fn algebra_order(df: usize, dg: usize) -> usize {
    (df + dg + 2) / 2 + 1
}

// Independent streams per suite so that changing one sample count does not
// reshuffle the others.
const WEITZENBOCK_STREAM: u64 = 1;
const BOCHNER_STREAM: u64 = 2;
const ALGEBRA_STREAM: u64 = 3;
const BACKEND_STREAM: u64 = 4;

fn stream(seed: u64, id: u64) -> rand_chacha::ChaCha8Rng {
    let mut rng = seeded_rng(seed);
    rng.set_stream(id);
    rng
}

fn pick<R: Rng>(rng: &mut R, options: &[usize]) -> usize {
    options[rng.gen_range(0..options.len())]
}

/// Accumulates per-sample reports into one report per identity, in first-seen order.
#[derive(Debug, Default)]
pub struct ReportFolder {
    reports: Vec<(IdentityReport, usize)>,
}

impl ReportFolder {
    pub fn push(&mut self, report: IdentityReport) {
        if let Some((acc, n)) = self.reports.iter_mut().find(|(r, _)| r.identity == report.identity) {
            acc.absorb(&report);
            for (k, v) in &report.diagnostics {
                let slot = acc.diagnostics.entry(k.clone()).or_insert(*v);
                *slot = slot.max(*v);
            }
            *n += 1;
        } else {
            self.reports.push((report, 1));
        }
    }

    pub fn finish(self, seed: u64) -> Vec<IdentityReport> {
        self.reports
            .into_iter()
            .map(|(r, n)| r.with_seed(seed).with_diagnostic("samples", n as f64))
            .collect()
    }
}

/// Weitzenböck identity on random polynomials with coefficients in `[-1, 1]`.
pub fn weitzenbock_suite(cfg: &SuiteConfig, tol: &Tolerances) -> Result<Vec<IdentityReport>> {
    let mut rng = stream(cfg.seed, WEITZENBOCK_STREAM);
    let mut folder = ReportFolder::default();
    for _ in 0..cfg.weitzenbock_samples {
        let n = pick(&mut rng, &cfg.dimensions);
        let d = rng.gen_range(0..=cfg.weitzenbock_max_degree);
        let f: ChaosExpansion<f64> = random_polynomial(&mut rng, n, d, 1.0);
        let grid = QuadratureGrid::with_budget(n, d + 2, cfg.node_budget)?;
        folder.push(check_weitzenbock(&f, &grid, tol.weitzenbock)?);
    }
    Ok(folder.finish(cfg.seed))
}

/// Bochner-type identity on random densities at each configured time, with
/// the finite-difference time-derivative diagnostic alongside.
pub fn bochner_suite(cfg: &SuiteConfig, tol: &Tolerances) -> Result<Vec<IdentityReport>> {
    let mut rng = stream(cfg.seed, BOCHNER_STREAM);
    let mut folder = ReportFolder::default();
    for _ in 0..cfg.bochner_samples {
        let n = pick(&mut rng, &cfg.dimensions);
        let d = rng.gen_range(1..=cfg.bochner_max_degree);
        let u0: ChaosExpansion<f64> = {
            let shape = QuadratureGrid::with_budget(n, d + FUNCTIONAL_ORDER_MARGIN, cfg.node_budget)?;
            random_density(&mut rng, &shape, d, cfg.bochner_sup_norm)?
        };
        let grid = QuadratureGrid::with_budget(n, default_functional_order(&u0), cfg.node_budget)?;
        for &t in &cfg.bochner_times {
            let ut = apply_semigroup(&u0, t, SemigroupBackend::Spectral)?;
            let cert = check_positivity(&ut, &grid, cfg.bochner_floor)?;
            folder.push(check_bochner_entropy(&u0, t, &grid, &cert, tol.bochner)?);
            folder.push(check_bochner_time_derivative_fd(&u0, t, cfg.fd_step, &grid, tol.bochner_fd)?);
        }
    }
    Ok(folder.finish(cfg.seed))
}

/// Operator-algebra identities on random pairs `(F, G)` and random vector fields.
pub fn algebra_suite(cfg: &SuiteConfig, tol: &Tolerances) -> Result<Vec<IdentityReport>> {
    let mut rng = stream(cfg.seed, ALGEBRA_STREAM);
    let mut folder = ReportFolder::default();
    for _ in 0..cfg.algebra_samples {
        let n = pick(&mut rng, &cfg.dimensions);
        let df = rng.gen_range(0..=cfg.algebra_max_degree);
        let dg = rng.gen_range(0..=cfg.algebra_max_degree);
        let f: ChaosExpansion<f64> = random_polynomial(&mut rng, n, df, 1.0);
        let g: ChaosExpansion<f64> = random_polynomial(&mut rng, n, dg, 1.0);
        let z = VectorExpansion::new((0..n).map(|_| random_polynomial(&mut rng, n, df, 1.0)).collect())?;
        let s = rng.gen_range(0.0..2.0);
        let t = rng.gen_range(0.0..2.0);
        let k = rng.gen_range(1..=n);

        let grid = QuadratureGrid::with_budget(n, algebra_order(df, dg), cfg.node_budget)?;
        folder.push(check_generator_paths(&f, tol.integration_by_parts)?);
        folder.push(check_divergence_paths(&z, tol.integration_by_parts)?);
        folder.push(check_integration_by_parts(&f, &g, &grid, tol.integration_by_parts)?);
        folder.push(check_divergence_adjoint(&z, &g, &grid, tol.integration_by_parts)?);
        folder.push(check_semigroup_symmetry(&f, &g, t, &grid, tol.integration_by_parts)?);
        folder.push(check_semigroup_law(&f, s, t, tol.exact)?);
        folder.push(check_gradient_commutation(&f, t, tol.exact)?);
        folder.push(check_projection_commutes(&f, k, t, tol.exact)?);
        folder.push(check_mass_invariance(&f, t, tol.exact)?);
        folder.push(check_hessian_symmetry(&f, tol.exact)?);
    }
    Ok(folder.finish(cfg.seed))
}

/// Spectral against Mehler-quadrature semigroup.
pub fn backend_suite(cfg: &SuiteConfig, tol: &Tolerances) -> Result<Vec<IdentityReport>> {
    let mut rng = stream(cfg.seed, BACKEND_STREAM);
    let mut folder = ReportFolder::default();
    for &n in &cfg.backend_dimensions {
        for &t in &cfg.backend_times {
            for _ in 0..cfg.backend_samples {
                let f: ChaosExpansion<f64> = random_polynomial(&mut rng, n, cfg.backend_max_degree, 1.0);
                folder.push(check_backend_agreement(&f, t, tol.backend)?);
            }
        }
    }
    Ok(folder.finish(cfg.seed))
}

/// All randomized suites, in a fixed order.
pub fn run_all(cfg: &SuiteConfig, tol: &Tolerances) -> Result<Vec<IdentityReport>> {
    cfg.validate()?;
    let mut out = weitzenbock_suite(cfg, tol)?;
    out.extend(bochner_suite(cfg, tol)?);
    out.extend(algebra_suite(cfg, tol)?);
    out.extend(backend_suite(cfg, tol)?);
    Ok(out)
}
