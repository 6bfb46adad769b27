use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use ou_lab_core::experiments::{
    check_decay_bound, check_first_chaos_tightness, fit_decay_rate, Experiment, ExperimentConfig, Preset,
    TrajectoryRecord,
};
use ou_lab_core::verifier::suite::{self, ReportFolder};
use ou_lab_core::verifier::IdentityReport;
use ou_lab_core::Error as CoreError;
use serde::{Deserialize, Serialize};

use crate::config::{node_budget_from_env, Config};
use crate::output::ArtifactWriter;
use crate::report::render_summary;
use crate::CliError;

pub const VERIFY_REPORT: &str = "verify_report.json";
pub const EVOLVE_SUMMARY: &str = "evolve_summary.json";
pub const TRAJECTORY_CSV: &str = "trajectory.csv";
pub const SUMMARY_MD: &str = "summary.md";
pub const CSV_HEADER: &str = "t,mass,entropy,fisher,bound,ratio";
const DEFAULT_OUT: &str = "ou-lab-out";

/// Command-line overrides shared by every subcommand.
#[derive(Clone, Debug)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub tolerance_scale: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { seed: None, out: None, tolerance_scale: 1.0 }
    }
}

impl RunOptions {
    fn validate(&self) -> Result<(), CliError> {
        if !(self.tolerance_scale > 0.0) || !self.tolerance_scale.is_finite() {
            return Err(CliError::Config(format!("--tolerance-scale must be positive, got {}", self.tolerance_scale)));
        }
        Ok(())
    }

    fn out_dir(&self, cfg: Option<&Config>) -> PathBuf {
        self.out
            .clone()
            .or_else(|| cfg.and_then(|c| c.output_dir.as_ref()).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
    }
}

/// What a run produced and whether every check passed.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub pass: bool,
    pub files: Vec<PathBuf>,
    pub reports: Vec<IdentityReport>,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.pass {
            0
        } else {
            1
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub kind: String,
    pub version: String,
    pub seed: u64,
    pub tolerance_scale: f64,
    pub pass: bool,
    pub reports: Vec<IdentityReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolveSummary {
    pub kind: String,
    pub version: String,
    pub seed: Option<u64>,
    pub preset: String,
    pub dimension: usize,
    pub quadrature_order: usize,
    pub time_points: usize,
    /// Negated least-squares slope of `log fisher`; absent when some Fisher value is zero.
    pub fitted_exponent: Option<f64>,
    /// Largest `fisher / bound - 1` over `t > 0`.
    pub worst_bound_margin: Option<f64>,
    /// Largest `|ratio / e^{-2t} - 1|`, reported for first-chaos presets only.
    pub first_chaos_deviation: Option<f64>,
    pub tolerance_scale: f64,
    pub pass: bool,
    pub checks: Vec<IdentityReport>,
}

fn scaled_config(mut cfg: Config, opts: &RunOptions) -> Config {
    cfg.verify.tolerances = cfg.verify.tolerances.scaled(opts.tolerance_scale);
    cfg.evolve.tolerances = cfg.evolve.tolerances.scaled(opts.tolerance_scale);
    cfg
}

/// Randomized identity suites plus the contraction and entropy bounds on the
/// configured presets. Writes `verify_report.json` and `manifest.json`.
pub fn run_verify(config_path: &Path, opts: &RunOptions) -> Result<RunOutcome, CliError> {
    opts.validate()?;
    let raw = Config::load(config_path)?;
    let budget = node_budget_from_env()?;
    let cfg = scaled_config(raw.clone(), opts);

    let mut suite_cfg = cfg.verify.suite.clone();
    suite_cfg.seed = opts.seed.or(cfg.seed).unwrap_or(suite_cfg.seed);
    suite_cfg.node_budget = budget;
    suite_cfg.validate()?;

    let tol = cfg.verify.tolerances;
    let mut experiments = Vec::new();
    for preset in &cfg.verify.presets {
        let mut e = ExperimentConfig { initial: preset.clone(), ..cfg.evolve.clone() };
        e.tolerances.contraction = tol.one_sided;
        e.tolerances.entropy_bound = tol.entropy_bound;
        experiments.push(Experiment::<f64>::with_budget(e, budget)?);
    }

    let mut reports = suite::run_all(&suite_cfg, &tol)?;
    let mut folder = ReportFolder::default();
    for e in &experiments {
        for r in e.check_inequalities(&cfg.verify.contraction_times, &cfg.verify.lp_exponents)? {
            folder.push(r);
        }
    }
    reports.extend(folder.finish(suite_cfg.seed));

    let pass = reports.iter().all(|r| r.pass);
    let report = VerifyReport {
        kind: "verify-report".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        seed: suite_cfg.seed,
        tolerance_scale: opts.tolerance_scale,
        pass,
        reports: reports.clone(),
    };
    let mut w = ArtifactWriter::new(&opts.out_dir(Some(&raw)))?;
    let mut files = vec![w.write_json(VERIFY_REPORT, &report)?];
    files.push(w.finish("verify", Some(suite_cfg.seed), opts.tolerance_scale, budget, config_json(&raw))?);
    Ok(RunOutcome { pass, files, reports })
}

/// Trajectory of the configured initial density with every trajectory check.
/// Writes `trajectory.csv`, `evolve_summary.json` and `manifest.json`.
pub fn run_evolve(config_path: &Path, opts: &RunOptions) -> Result<RunOutcome, CliError> {
    opts.validate()?;
    let raw = Config::load(config_path)?;
    let budget = node_budget_from_env()?;
    let cfg = scaled_config(raw.clone(), opts);
    let seed = opts.seed.or(cfg.seed);

    let exp = Experiment::<f64>::with_budget(cfg.evolve.clone(), budget)?;
    let records = exp.evolve()?;
    let checks = evolve_checks(&exp, &records, &cfg)?;
    let pass = checks.iter().all(|r| r.pass);
    let fitted_exponent = match fit_decay_rate(&records) {
        Ok(rate) => Some(rate),
        Err(CoreError::NonPositiveFisher { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    let summary = EvolveSummary {
        kind: "evolve-summary".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        seed,
        preset: exp.config.initial.label(),
        dimension: exp.config.dimension,
        quadrature_order: exp.grid.order(),
        time_points: records.len(),
        fitted_exponent,
        worst_bound_margin: checks
            .iter()
            .find(|r| r.identity == "decay-bound")
            .and_then(|r| r.diagnostics.get("worst_margin").copied()),
        first_chaos_deviation: matches!(exp.config.initial, Preset::FirstChaos { .. })
            .then(|| check_first_chaos_tightness(&records, exp.config.tolerances.tightness).max_rel_residual),
        tolerance_scale: opts.tolerance_scale,
        pass,
        checks: checks.clone(),
    };

    let mut w = ArtifactWriter::new(&opts.out_dir(Some(&raw)))?;
    let mut files = vec![w.write(TRAJECTORY_CSV, trajectory_csv(&records).as_bytes())?];
    files.push(w.write_json(EVOLVE_SUMMARY, &summary)?);
    files.push(w.finish("evolve", seed, opts.tolerance_scale, budget, config_json(&raw))?);
    Ok(RunOutcome { pass, files, reports: checks })
}

fn evolve_checks(
    exp: &Experiment<f64>,
    records: &[TrajectoryRecord<f64>],
    cfg: &Config,
) -> Result<Vec<IdentityReport>, CliError> {
    let tol = exp.config.tolerances;
    let mut checks = vec![check_decay_bound(records, tol.decay_bound)];
    checks.extend(exp.check_trajectory_invariants(records));
    if records.len() >= 3 {
        checks.extend(exp.check_entropy_production(records)?);
    }
    let h = interchange_step(records);
    let mut folder = ReportFolder::default();
    for r in records {
        let mut report = exp.check_interchange(r.t, h)?;
        report.diagnostics.clear();
        folder.push(report.with_diagnostic("fd_step", h));
    }
    checks.extend(folder.finish(0).into_iter().map(|mut r| {
        r.seed = None;
        r
    }));
    checks.push(exp.check_right_continuity(exp.config.right_continuity_time)?);
    let times: Vec<f64> = records.iter().map(|r| r.t).collect();
    checks.extend(exp.check_inequalities(&times, &cfg.verify.lp_exponents)?);
    Ok(checks)
}

fn interchange_step(records: &[TrajectoryRecord<f64>]) -> f64 {
    let gap = records.windows(2).map(|w| (w[1].t - w[0].t).abs()).fold(f64::INFINITY, f64::min);
    1e-3f64.min(gap / 10.0)
}

/// CSV with shortest round-trip decimals; `ratio` is empty when undefined.
pub fn trajectory_csv(records: &[TrajectoryRecord<f64>]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        let ratio = r.ratio.map(|x| x.to_string()).unwrap_or_default();
        writeln!(out, "{},{},{},{},{},{}", r.t, r.mass, r.entropy, r.fisher, r.bound, ratio).expect("write to String");
    }
    out
}

fn config_json(cfg: &Config) -> serde_json::Value {
    serde_json::to_value(cfg).unwrap_or(serde_json::Value::Null)
}

/// Merges verify reports and evolve summaries into `summary.md`.
pub fn run_report(inputs: &[PathBuf], opts: &RunOptions) -> Result<RunOutcome, CliError> {
    if inputs.is_empty() {
        return Err(CliError::Config("report needs at least one input file".into()));
    }
    let mut docs = Vec::with_capacity(inputs.len());
    for path in inputs {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read report {}: {e}", path.display())))?;
        let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        docs.push((name, crate::report::parse_document(&text, &path.display().to_string())?));
    }
    let (text, pass, reports) = render_summary(&docs);
    let mut w = ArtifactWriter::new(&opts.out_dir(None))?;
    let files = vec![w.write(SUMMARY_MD, text.as_bytes())?];
    Ok(RunOutcome { pass, files, reports })
}
