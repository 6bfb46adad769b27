//! Entropy and Fisher-information trajectories along `u_t = P_t u_0`.
//!
//! The semigroup is applied from `t = 0` at every sampled time, so records are
//! independent of the sampling. Positivity is re-certified at each time.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{check_positivity, default_functional_order, entropy, fisher, mass, PositivityCertificate};
use crate::hermite::{expansion_to_grid, ChaosExpansion, MultiIndex, QuadratureGrid, DEFAULT_NODE_BUDGET};
use crate::ou::{apply_generator, apply_semigroup, GeneratorPath, SemigroupBackend};
use crate::scalar::{compensated_sum, Scalar};
use crate::verifier::{check_contraction, check_entropy_bound, IdentityReport, Residuals};

/// Named initial densities in the first coordinate, embedded in any dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Preset {
    /// `u ≡ 1`.
    Uniform,
    /// `1 + εx`.
    FirstChaos { epsilon: f64 },
    /// `1 + ε(x² - 1)`.
    SecondChaos { epsilon: f64 },
    /// `c0 + c1 x + c2 (x² - 1)`.
    Mixed { c0: f64, c1: f64, c2: f64 },
    /// Explicit orthonormal-basis coefficients; exponent vectors must have the
    /// experiment's dimension.
    Coefficients { terms: Vec<(Vec<u32>, f64)> },
}

impl Preset {
    pub fn expansion<T: Scalar>(&self, dimension: usize) -> Result<ChaosExpansion<T>> {
        if dimension == 0 {
            return Err(Error::InvalidParameter { name: "dimension", reason: "must be at least 1".into() });
        }
        let he2 = std::f64::consts::SQRT_2;
        let first: Vec<(u32, f64)> = match *self {
            Preset::Uniform => vec![(0, 1.0)],
            Preset::FirstChaos { epsilon } => vec![(0, 1.0), (1, epsilon)],
            Preset::SecondChaos { epsilon } => vec![(0, 1.0), (2, epsilon * he2)],
            Preset::Mixed { c0, c1, c2 } => vec![(0, c0), (1, c1), (2, c2 * he2)],
            Preset::Coefficients { ref terms } => {
                return ChaosExpansion::from_terms(
                    dimension,
                    terms.iter().map(|(e, c)| (MultiIndex::new(e.clone()), T::lit(*c))),
                )
            }
        };
        let terms = first.into_iter().map(|(k, c)| {
            let mut e = vec![0; dimension];
            e[0] = k;
            (MultiIndex::new(e), T::lit(c))
        });
        ChaosExpansion::from_terms(dimension, terms)
    }

    /// Short label such as `mixed(1.5,0.2,0.1)`.
    pub fn label(&self) -> String {
        match self {
            Preset::Uniform => "uniform".into(),
            Preset::FirstChaos { epsilon } => format!("first-chaos({epsilon})"),
            Preset::SecondChaos { epsilon } => format!("second-chaos({epsilon})"),
            Preset::Mixed { c0, c1, c2 } => format!("mixed({c0},{c1},{c2})"),
            Preset::Coefficients { terms } => format!("coefficients({} terms)", terms.len()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Spacing {
    Linear,
    Log,
}

/// Sampled times `start..=stop`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeGrid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl Default for TimeGrid {
    fn default() -> Self {
        TimeGrid { start: 0.0, stop: 3.0, count: 31, spacing: Spacing::Linear }
    }
}

impl TimeGrid {
    pub fn validate(&self) -> Result<()> {
        let bad = |reason: String| Err(Error::InvalidParameter { name: "time", reason });
        if !(self.start >= 0.0) || !self.start.is_finite() {
            return bad(format!("start must be finite and non-negative, got {}", self.start));
        }
        if !(self.stop > self.start) || !self.stop.is_finite() {
            return bad(format!("stop must be finite and exceed start, got start={} stop={}", self.start, self.stop));
        }
        if self.count < 2 {
            return bad(format!("count must be at least 2, got {}", self.count));
        }
        if self.spacing == Spacing::Log && self.start <= 0.0 {
            return bad("log spacing needs start > 0".into());
        }
        Ok(())
    }

    pub fn points(&self) -> Result<Vec<f64>> {
        self.validate()?;
        let last = (self.count - 1) as f64;
        let pts = (0..self.count).map(|k| {
            if k + 1 == self.count {
                return self.stop;
            }
            match self.spacing {
                Spacing::Linear => self.start + (self.stop - self.start) * k as f64 / last,
                Spacing::Log => self.start * (self.stop / self.start).powf(k as f64 / last),
            }
        });
        Ok(pts.collect())
    }
}

/// Tolerances of the trajectory checks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentTolerances {
    pub mass: f64,
    pub monotonicity: f64,
    /// Relative slack in `fisher(t) ≤ e^{-2t} fisher(0) (1 + slack)`.
    pub decay_bound: f64,
    /// Relative tolerance of `dEnt/dt = fisher` with a finite-difference derivative.
    pub entropy_production: f64,
    /// Relative tolerance of `-∫ log u Lu = fisher`, both by quadrature.
    pub production_paths: f64,
    pub interchange: f64,
    /// `|ratio / e^{-2t} - 1|` on the first chaos.
    pub tightness: f64,
    pub contraction: f64,
    pub entropy_bound: f64,
    pub right_continuity: f64,
}

impl Default for ExperimentTolerances {
    fn default() -> Self {
        ExperimentTolerances {
            mass: 1e-12,
            monotonicity: 1e-12,
            decay_bound: 1e-6,
            entropy_production: 1e-4,
            production_paths: 1e-6,
            interchange: 1e-4,
            tightness: 1e-3,
            contraction: 1e-12,
            entropy_bound: 1e-10,
            right_continuity: 1e-2,
        }
    }
}

impl ExperimentTolerances {
    pub fn scaled(&self, f: f64) -> Self {
        ExperimentTolerances {
            mass: self.mass * f,
            monotonicity: self.monotonicity * f,
            decay_bound: self.decay_bound * f,
            entropy_production: self.entropy_production * f,
            production_paths: self.production_paths * f,
            interchange: self.interchange * f,
            tightness: self.tightness * f,
            contraction: self.contraction * f,
            entropy_bound: self.entropy_bound * f,
            right_continuity: self.right_continuity * f,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dimension: usize,
    pub initial: Preset,
    /// Positivity floor `ε₀`.
    pub floor: f64,
    pub time: TimeGrid,
    /// Points per coordinate; `deg u_0 + 12` when absent.
    pub quadrature_order: Option<usize>,
    /// Small time at which right-continuity of the Fisher information is sampled.
    pub right_continuity_time: f64,
    pub tolerances: ExperimentTolerances,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            dimension: 1,
            initial: Preset::FirstChaos { epsilon: 0.01 },
            floor: 0.1,
            time: TimeGrid::default(),
            quadrature_order: None,
            right_continuity_time: 1e-4,
            tolerances: ExperimentTolerances::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dimension == 0 {
            return Err(Error::InvalidParameter { name: "dimension", reason: "must be at least 1".into() });
        }
        if !(self.floor > 0.0) || !self.floor.is_finite() {
            return Err(Error::InvalidParameter { name: "floor", reason: format!("must be positive, got {}", self.floor) });
        }
        if !(self.right_continuity_time > 0.0) || !self.right_continuity_time.is_finite() {
            return Err(Error::InvalidParameter { name: "right_continuity_time", reason: "must be positive".into() });
        }
        if self.quadrature_order == Some(0) {
            return Err(Error::InvalidParameter { name: "quadrature_order", reason: "must be at least 1".into() });
        }
        self.time.validate()
    }
}

/// Observables of `u_t` at one time.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrajectoryRecord<T> {
    pub t: T,
    pub mass: T,
    pub entropy: T,
    pub fisher: T,
    /// `e^{-2t} fisher(u_0)`.
    pub bound: T,
    /// `fisher / fisher(u_0)`, absent when `fisher(u_0) = 0`.
    pub ratio: Option<T>,
}

/// A validated configuration with its initial density and quadrature grid.
#[derive(Clone, Debug)]
pub struct Experiment<T> {
    pub config: ExperimentConfig,
    pub initial: ChaosExpansion<T>,
    pub grid: QuadratureGrid<T>,
}

struct State<T> {
    u: ChaosExpansion<T>,
    cert: PositivityCertificate<T>,
}

impl<T: Scalar> Experiment<T> {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        Self::with_budget(config, DEFAULT_NODE_BUDGET)
    }

    pub fn with_budget(config: ExperimentConfig, budget: u64) -> Result<Self> {
        config.validate()?;
        let initial = config.initial.expansion(config.dimension)?;
        let order = config.quadrature_order.unwrap_or_else(|| default_functional_order(&initial));
        let grid = QuadratureGrid::with_budget(config.dimension, order, budget)?;
        Ok(Experiment { config, initial, grid })
    }

    fn floor(&self) -> T {
        T::lit(self.config.floor)
    }

    /// `u_t` with a certificate, or `PositivityLost` naming the offending node.
    fn state(&self, t: T) -> Result<State<T>> {
        let u = apply_semigroup(&self.initial, t, SemigroupBackend::Spectral)?;
        let cert = check_positivity(&u, &self.grid, self.floor())?;
        if !cert.is_valid() {
            return Err(Error::PositivityLost {
                t: t.as_f64(),
                node: cert.argmin,
                coords: self.grid.node(cert.argmin).iter().map(|x| x.as_f64()).collect(),
                value: cert.min_observed.as_f64(),
                floor: cert.floor.as_f64(),
            });
        }
        Ok(State { u, cert })
    }

    pub fn entropy_at(&self, t: T) -> Result<T> {
        let s = self.state(t)?;
        entropy(&s.u, &self.grid, &s.cert)
    }

    pub fn fisher_at(&self, t: T) -> Result<T> {
        let s = self.state(t)?;
        fisher(&s.u, &self.grid, &s.cert)
    }

    /// Records at the configured times.
    pub fn evolve(&self) -> Result<Vec<TrajectoryRecord<T>>> {
        let times: Vec<T> = self.config.time.points()?.into_iter().map(T::lit).collect();
        self.records_at(&times)
    }

    /// Records at arbitrary non-negative times, in the given order.
    pub fn records_at(&self, times: &[T]) -> Result<Vec<TrajectoryRecord<T>>> {
        let fisher0 = self.fisher_at(T::zero())?;
        times
            .iter()
            .map(|&t| {
                let s = self.state(t)?;
                let fisher = fisher(&s.u, &self.grid, &s.cert)?;
                Ok(TrajectoryRecord {
                    t,
                    mass: mass(&s.u),
                    entropy: entropy(&s.u, &self.grid, &s.cert)?,
                    fisher,
                    bound: (-T::lit(2.0) * t).exp() * fisher0,
                    ratio: (fisher0 > T::zero()).then(|| fisher / fisher0),
                })
            })
            .collect()
    }

    /// Derivative of `g` at `t` with step `h`: central, or second-order
    /// one-sided when `t < h`.
    fn derivative(&self, t: T, h: T, g: impl Fn(T) -> Result<T>) -> Result<T> {
        let two = T::lit(2.0);
        if t >= h {
            Ok((g(t + h)? - g(t - h)?) / (two * h))
        } else {
            Ok((-T::lit(3.0) * g(t)? + T::lit(4.0) * g(t + h)? - g(t + two * h)?) / (two * h))
        }
    }

    /// `-∫ (log u_t) L u_t dγ` and `∫ [(log u_t) L u_t + L u_t] dγ` by quadrature.
    fn generator_integrals(&self, t: T) -> Result<(T, T)> {
        let s = self.state(t)?;
        let u = expansion_to_grid(&s.u, &self.grid)?.into_values();
        let lu = expansion_to_grid(&apply_generator(&s.u, GeneratorPath::Spectral), &self.grid)?.into_values();
        let w = self.grid.weights();
        let production = compensated_sum((0..u.len()).map(|j| -w[j] * u[j].ln() * lu[j]));
        let interchange = compensated_sum((0..u.len()).map(|j| w[j] * (u[j].ln() * lu[j] + lu[j])));
        Ok((production, interchange))
    }

    /// `dEnt(u_t)/dt = fisher(u_t)` at every record time, with the derivative
    /// by finite differences using `h = min(1e-3, Δt/10)`, plus the middle
    /// equality `-∫ log u_t L u_t = fisher(u_t)` by direct quadrature.
    pub fn check_entropy_production(&self, records: &[TrajectoryRecord<T>]) -> Result<Vec<IdentityReport>> {
        if records.len() < 3 {
            return Err(Error::TooFewTimePoints { needed: 3, got: records.len() });
        }
        let h = fd_step(records);
        let mut fd = RatePairs::default();
        let mut paths = RatePairs::default();
        for r in records {
            let d_ent = self.derivative(r.t, h, |s| self.entropy_at(s))?;
            fd.push(d_ent.as_f64(), r.fisher.as_f64());
            let (production, _) = self.generator_integrals(r.t)?;
            paths.push(production.as_f64(), r.fisher.as_f64());
        }
        let tol = &self.config.tolerances;
        Ok(vec![
            fd.into_report("entropy-production", ENTROPY_PRODUCTION, tol.entropy_production, records.len())
                .with_diagnostic("fd_step", h.as_f64()),
            paths.into_report("entropy-production-paths", PRODUCTION_PATHS, tol.production_paths, records.len()),
        ])
    }

    /// `d/dt ∫ u_t log u_t = ∫ [(log u_t) L u_t + L u_t]` at `t`, derivative
    /// by central differences with step `h`.
    pub fn check_interchange(&self, t: T, h: T) -> Result<IdentityReport> {
        let neg_entropy = |s: T| -> Result<T> { Ok(-self.entropy_at(s)?) };
        let fd = self.derivative(t, h, neg_entropy)?;
        let (_, integral) = self.generator_integrals(t)?;
        let mut pairs = RatePairs::default();
        pairs.push(fd.as_f64(), integral.as_f64());
        Ok(pairs
            .into_report("interchange", INTERCHANGE, self.config.tolerances.interchange, 1)
            .with_diagnostic("t", t.as_f64())
            .with_diagnostic("fd_step", h.as_f64()))
    }

    /// Diagnostic for right-continuity of `t ↦ fisher(u_t)` at `0`, sampled at
    /// `t_small`: relative change `|I(t_small) - I(0)| / I(0)`.
    pub fn check_right_continuity(&self, t_small: T) -> Result<IdentityReport> {
        let i0 = self.fisher_at(T::zero())?;
        let it = self.fisher_at(t_small)?;
        let mut pairs = RatePairs::default();
        pairs.push(it.as_f64(), i0.as_f64());
        Ok(pairs
            .into_report("fisher-right-continuity", RIGHT_CONTINUITY, self.config.tolerances.right_continuity, 1)
            .with_diagnostic("t", t_small.as_f64())
            .with_diagnostic("fisher_0", i0.as_f64())
            .with_diagnostic("fisher_t", it.as_f64()))
    }

    /// `‖P_t u_0‖_p ≤ ‖u_0‖_p` for each exponent and record time, and
    /// `Ent(u_0) ≤ 1 - mass(u_0)`.
    pub fn check_inequalities(&self, times: &[T], exponents: &[T]) -> Result<Vec<IdentityReport>> {
        let tol = &self.config.tolerances;
        let mut contraction: Option<IdentityReport> = None;
        for &p in exponents {
            for &t in times {
                let r = check_contraction(&self.initial, p, t, &self.grid, tol.contraction)?;
                match contraction.as_mut() {
                    Some(acc) => acc.absorb(&r),
                    None => contraction = Some(r),
                }
            }
        }
        let mut out = Vec::new();
        if let Some(mut c) = contraction {
            c.diagnostics.clear();
            out.push(c);
        }
        let s = self.state(T::zero())?;
        out.push(check_entropy_bound(&s.u, &self.grid, &s.cert, tol.entropy_bound)?);
        Ok(out)
    }

    /// Mass conservation and monotonicity of entropy and Fisher information.
    pub fn check_trajectory_invariants(&self, records: &[TrajectoryRecord<T>]) -> Vec<IdentityReport> {
        check_trajectory_invariants(records, &self.config.tolerances)
    }
}

pub const ENTROPY_PRODUCTION: &str = "d/dt Ent(u_t) = ∫ |∇u_t|²/u_t dγ (finite-difference derivative)";
pub const PRODUCTION_PATHS: &str = "-∫ (log u_t) L u_t dγ = ∫ |∇u_t|²/u_t dγ";
pub const INTERCHANGE: &str = "d/dt ∫ u_t log u_t dγ = ∫ [(log u_t) L u_t + L u_t] dγ";
pub const RIGHT_CONTINUITY: &str = "t ↦ ∫ |∇u_t|²/u_t dγ is right-continuous at 0 (small-t sample)";
pub const DECAY_BOUND: &str = "∫ |∇u_t|²/u_t dγ ≤ e^{-2t} ∫ |∇u_0|²/u_0 dγ";
pub const TIGHTNESS: &str = "on the first chaos, fisher(u_t)/fisher(u_0) ≈ e^{-2t}";
pub const MASS_CONSERVATION: &str = "∫ u_t dγ = ∫ u_0 dγ along the trajectory";
pub const ENTROPY_MONOTONE: &str = "t ↦ Ent(u_t) is non-decreasing";
pub const FISHER_MONOTONE: &str = "t ↦ ∫ |∇u_t|²/u_t dγ is non-increasing";

fn fd_step<T: Scalar>(records: &[TrajectoryRecord<T>]) -> T {
    let min_gap = records.windows(2).map(|w| (w[1].t - w[0].t).abs()).fold(T::infinity(), |m, g| m.min(g));
    T::lit(1e-3).min(min_gap / T::lit(10.0))
}

// Pairs of rates compared relative to their own magnitude at each point.
#[derive(Default)]
struct RatePairs {
    max_abs: f64,
    max_rel: f64,
}

impl RatePairs {
    fn push(&mut self, a: f64, b: f64) {
        let abs = (a - b).abs();
        let scale = a.abs().max(b.abs());
        let rel = if abs == 0.0 { 0.0 } else if scale > 0.0 { abs / scale } else { f64::INFINITY };
        self.max_abs = nan_max(self.max_abs, abs);
        self.max_rel = nan_max(self.max_rel, rel);
    }

    fn into_report(self, identity: &str, statement: &str, tolerance: f64, nodes: usize) -> IdentityReport {
        IdentityReport {
            identity: identity.into(),
            statement: statement.into(),
            max_abs_residual: self.max_abs,
            max_rel_residual: self.max_rel,
            nodes_checked: nodes,
            tolerance,
            pass: self.max_rel <= tolerance,
            diagnostics: Default::default(),
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

/// `fisher(t) ≤ e^{-2t} fisher(0) (1 + rel_slack)` at every record. The
/// residual is the excess `fisher/bound - 1` beyond zero; `worst_margin` is
/// the largest `fisher/bound - 1` over `t > 0` (negative when every such
/// point has slack).
pub fn check_decay_bound<T: Scalar>(records: &[TrajectoryRecord<T>], rel_slack: f64) -> IdentityReport {
    let mut max_abs = 0.0f64;
    let mut max_rel = 0.0f64;
    let mut worst_margin = f64::NEG_INFINITY;
    for r in records {
        let (f, b) = (r.fisher.as_f64(), r.bound.as_f64());
        max_abs = nan_max(max_abs, (f - b).max(0.0));
        let rel = if f <= b {
            0.0
        } else if b > 0.0 {
            f / b - 1.0
        } else {
            f64::INFINITY
        };
        max_rel = nan_max(max_rel, rel);
        // At t = 0 the bound is attained by definition.
        if b > 0.0 && r.t > T::zero() {
            worst_margin = worst_margin.max(f / b - 1.0);
        }
    }
    let mut report = IdentityReport {
        identity: "decay-bound".into(),
        statement: DECAY_BOUND.into(),
        max_abs_residual: max_abs,
        max_rel_residual: max_rel,
        nodes_checked: records.len(),
        tolerance: rel_slack,
        pass: max_rel <= rel_slack,
        diagnostics: Default::default(),
        seed: None,
    };
    if worst_margin.is_finite() {
        report.diagnostics.insert("worst_margin".into(), worst_margin);
    }
    report
}

/// `|ratio / e^{-2t} - 1| ≤ tolerance` at every record.
pub fn check_first_chaos_tightness<T: Scalar>(records: &[TrajectoryRecord<T>], tolerance: f64) -> IdentityReport {
    let mut r = Residuals::default().with_scale_floor(0.0);
    let mut max_rel = 0.0f64;
    for rec in records {
        let target = (-2.0 * rec.t.as_f64()).exp();
        let ratio = rec.ratio.map_or(f64::NAN, |x| x.as_f64());
        let dev = (ratio / target - 1.0).abs();
        r.push(ratio, target, (ratio - target).abs());
        max_rel = nan_max(max_rel, dev);
    }
    let mut report = r.into_report("first-chaos-tightness", TIGHTNESS, tolerance);
    report.max_rel_residual = max_rel;
    report.pass = max_rel <= tolerance;
    report
}

pub fn check_trajectory_invariants<T: Scalar>(
    records: &[TrajectoryRecord<T>],
    tol: &ExperimentTolerances,
) -> Vec<IdentityReport> {
    let Some(first) = records.first() else { return Vec::new() };
    let mut mass_r = Residuals::default();
    for r in records {
        mass_r.push(r.mass.as_f64(), first.mass.as_f64(), (r.mass - first.mass).abs().as_f64());
    }
    let mut ent = Residuals::default();
    let mut fis = Residuals::default();
    for w in records.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        ent = ent.merge(Residuals::at_most(a.entropy, b.entropy, 1));
        fis = fis.merge(Residuals::at_most(b.fisher, a.fisher, 1));
    }
    vec![
        mass_r.into_report("mass-conservation", MASS_CONSERVATION, tol.mass),
        ent.into_report("entropy-monotone", ENTROPY_MONOTONE, tol.monotonicity),
        fis.into_report("fisher-monotone", FISHER_MONOTONE, tol.monotonicity),
    ]
}

/// Least-squares slope of `log fisher` against `t`, negated.
pub fn fit_decay_rate<T: Scalar>(records: &[TrajectoryRecord<T>]) -> Result<T> {
    if records.len() < 2 {
        return Err(Error::TooFewTimePoints { needed: 2, got: records.len() });
    }
    if let Some(r) = records.iter().find(|r| !(r.fisher > T::zero())) {
        return Err(Error::NonPositiveFisher { t: r.t.as_f64(), value: r.fisher.as_f64() });
    }
    let n = T::from_count(records.len());
    let mean_t = compensated_sum(records.iter().map(|r| r.t)) / n;
    let mean_y = compensated_sum(records.iter().map(|r| r.fisher.ln())) / n;
    let sxy = compensated_sum(records.iter().map(|r| (r.t - mean_t) * (r.fisher.ln() - mean_y)));
    let sxx = compensated_sum(records.iter().map(|r| (r.t - mean_t) * (r.t - mean_t)));
    if !(sxx > T::zero()) {
        return Err(Error::InvalidParameter { name: "time", reason: "fit needs at least two distinct times".into() });
    }
    Ok(-sxy / sxx)
}
