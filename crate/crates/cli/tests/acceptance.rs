//! Acceptance gate: runs criteria 1-9 and prints one line per criterion.
//! Exits non-zero if any criterion fails. Every tolerance is pinned below.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use ou_lab_core::experiments::{check_decay_bound, fit_decay_rate, Experiment, ExperimentConfig, Preset};
use ou_lab_core::verifier::suite::{algebra_suite, backend_suite, bochner_suite, weitzenbock_suite, SuiteConfig};
use ou_lab_core::verifier::{IdentityReport, Tolerances};

const WEITZENBOCK_TOL: f64 = 1e-10;
const WEITZENBOCK_SAMPLES: usize = 100;
const WEITZENBOCK_LIMIT: Duration = Duration::from_secs(10);
const BOCHNER_TOL: f64 = 1e-8;
const BOCHNER_SAMPLES: usize = 30;
const BOCHNER_TIMES: [f64; 3] = [0.0, 0.25, 1.0];
const BOCHNER_LIMIT: Duration = Duration::from_secs(30);
const PRODUCTION_TIMES: [f64; 3] = [0.25, 0.5, 1.0];
const PRODUCTION_STEP: f64 = 1e-3;
const PRODUCTION_REL: f64 = 1e-4;
const BOUND_SLACK: f64 = 1e-6;
const TIGHTNESS: f64 = 1e-3;
const FIRST_CHAOS_RATE: (f64, f64) = (2.0, 0.01);
const SECOND_CHAOS_RATE: (f64, f64) = (4.0, 0.05);
const ALGEBRA_TOL: f64 = 1e-10;
const COEFFICIENT_TOL: f64 = 1e-12;
const ALGEBRA_SAMPLES: usize = 100;
const BACKEND_TOL: f64 = 1e-10;
const BACKEND_MAX_DEGREE: usize = 6;
const CONTRACTION_TOL: f64 = 1e-12;
const ENTROPY_BOUND_TOL: f64 = 1e-10;

const FIRST: Preset = Preset::FirstChaos { epsilon: 0.01 };
const SECOND: Preset = Preset::SecondChaos { epsilon: 0.01 };
const MIXED: Preset = Preset::Mixed { c0: 1.5, c1: 0.2, c2: 0.1 };

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn tolerances() -> Tolerances {
    Tolerances {
        weitzenbock: WEITZENBOCK_TOL,
        bochner: BOCHNER_TOL,
        integration_by_parts: ALGEBRA_TOL,
        exact: COEFFICIENT_TOL,
        backend: BACKEND_TOL,
        one_sided: CONTRACTION_TOL,
        entropy_bound: ENTROPY_BOUND_TOL,
        ..Tolerances::default()
    }
}

fn experiment(initial: Preset) -> Experiment<f64> {
    Experiment::new(ExperimentConfig { initial, ..Default::default() }).expect("valid preset config")
}

fn find<'a>(reports: &'a [IdentityReport], id: &str) -> Result<&'a IdentityReport, String> {
    reports.iter().find(|r| r.identity == id).ok_or_else(|| format!("no `{id}` report"))
}

fn require(ok: bool, msg: String) -> Verdict {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn criterion_1() -> Verdict {
    let cfg = SuiteConfig { weitzenbock_samples: WEITZENBOCK_SAMPLES, weitzenbock_max_degree: 4, ..Default::default() };
    let start = Instant::now();
    let reports = weitzenbock_suite(&cfg, &tolerances()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let r = find(&reports, "weitzenbock")?;
    let samples = r.diagnostics["samples"] as usize;
    require(
        r.pass && samples == WEITZENBOCK_SAMPLES && elapsed <= WEITZENBOCK_LIMIT,
        format!(
            "{samples} polynomials, max rel residual {:.2e} (tol {WEITZENBOCK_TOL:e}), {} nodes, {:.2?}",
            r.max_rel_residual, r.nodes_checked, elapsed
        ),
    )
}

fn criterion_2() -> Verdict {
    let cfg = SuiteConfig { bochner_samples: BOCHNER_SAMPLES, bochner_times: BOCHNER_TIMES.to_vec(), ..Default::default() };
    let start = Instant::now();
    let reports = bochner_suite(&cfg, &tolerances()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let r = find(&reports, "bochner-entropy")?;
    let fd = find(&reports, "bochner-time-derivative-fd")?;
    let evaluations = r.diagnostics["samples"] as usize;
    require(
        r.pass && evaluations == BOCHNER_SAMPLES * BOCHNER_TIMES.len() && elapsed <= BOCHNER_LIMIT,
        format!(
            "{BOCHNER_SAMPLES} densities x {} times, max rel residual {:.2e} (tol {BOCHNER_TOL:e}), \
             FD time-derivative diagnostic {:.2e}, {:.2?}",
            BOCHNER_TIMES.len(),
            r.max_rel_residual,
            fd.max_rel_residual,
            elapsed
        ),
    )
}

fn criterion_3() -> Verdict {
    let e = experiment(MIXED);
    let records = e.records_at(&PRODUCTION_TIMES).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for r in &records {
        let h = PRODUCTION_STEP;
        let fd = (e.entropy_at(r.t + h).map_err(|e| e.to_string())? - e.entropy_at(r.t - h).map_err(|e| e.to_string())?)
            / (2.0 * h);
        worst = worst.max((fd - r.fisher).abs() / r.fisher);
    }
    let library = e.check_entropy_production(&records).map_err(|e| e.to_string())?;
    let lib_step = library[0].diagnostics["fd_step"];
    require(
        worst <= PRODUCTION_REL && library[0].pass && lib_step == PRODUCTION_STEP,
        format!(
            "mixed(1.5,0.2,0.1) at t = {PRODUCTION_TIMES:?}: max |dEnt/dt - I|/I = {worst:.2e} (tol {PRODUCTION_REL:e}), \
             -∫log u Lu vs I {:.2e}",
            library[1].max_rel_residual
        ),
    )
}

fn criterion_4() -> Verdict {
    let mut parts = Vec::new();
    let mut ok = true;
    for p in [FIRST, SECOND, MIXED] {
        let records = experiment(p.clone()).evolve().map_err(|e| e.to_string())?;
        let r = check_decay_bound(&records, BOUND_SLACK);
        ok &= r.pass && records.len() == 31 && records.last().map(|r| r.t) == Some(3.0);
        parts.push(format!("{} margin {:.2e}", p.label(), r.diagnostics.get("worst_margin").copied().unwrap_or(0.0)));
        if p == FIRST {
            let dev = records
                .iter()
                .map(|r| (r.ratio.unwrap_or(f64::NAN) / (-2.0 * r.t).exp() - 1.0).abs())
                .fold(0.0f64, |m, d| if d.is_nan() { f64::NAN } else { m.max(d) });
            ok &= dev <= TIGHTNESS;
            parts.push(format!("first-chaos ratio deviation {dev:.2e} (tol {TIGHTNESS:e})"));
        }
    }
    require(ok, format!("fisher(t) <= e^-2t fisher(0) (1 + {BOUND_SLACK:e}) on 31 points of [0,3]; {}", parts.join("; ")))
}

fn criterion_5() -> Verdict {
    let rate = |p: Preset| -> Result<f64, String> {
        fit_decay_rate(&experiment(p).evolve().map_err(|e| e.to_string())?).map_err(|e| e.to_string())
    };
    let a = rate(FIRST)?;
    let b = rate(SECOND)?;
    require(
        (a - FIRST_CHAOS_RATE.0).abs() <= FIRST_CHAOS_RATE.1 && (b - SECOND_CHAOS_RATE.0).abs() <= SECOND_CHAOS_RATE.1,
        format!(
            "first-chaos exponent {a:.5} (target {} ± {}), second-chaos exponent {b:.5} (target {} ± {})",
            FIRST_CHAOS_RATE.0, FIRST_CHAOS_RATE.1, SECOND_CHAOS_RATE.0, SECOND_CHAOS_RATE.1
        ),
    )
}

fn criterion_6() -> Verdict {
    let cfg = SuiteConfig { algebra_samples: ALGEBRA_SAMPLES, ..Default::default() };
    let reports = algebra_suite(&cfg, &tolerances()).map_err(|e| e.to_string())?;
    let mut ok = true;
    let mut parts = Vec::new();
    for id in ["generator-paths", "integration-by-parts", "divergence-adjoint"] {
        let r = find(&reports, id)?;
        ok &= r.pass && r.tolerance == ALGEBRA_TOL && r.diagnostics["samples"] as usize == ALGEBRA_SAMPLES;
        parts.push(format!("{id} {:.1e}", r.max_rel_residual));
    }
    for id in ["semigroup-law", "gradient-commutation", "projection-commutes", "mass-invariance"] {
        let r = find(&reports, id)?;
        ok &= r.pass && r.max_abs_residual <= COEFFICIENT_TOL && r.diagnostics["samples"] as usize == ALGEBRA_SAMPLES;
        parts.push(format!("{id} {:.1e}", r.max_abs_residual));
    }
    require(ok, format!("{ALGEBRA_SAMPLES} random pairs: {}", parts.join(", ")))
}

fn criterion_7() -> Verdict {
    let cfg = SuiteConfig {
        backend_max_degree: BACKEND_MAX_DEGREE,
        backend_times: vec![0.1, 0.5, 1.0],
        backend_dimensions: vec![1, 2],
        ..Default::default()
    };
    let reports = backend_suite(&cfg, &tolerances()).map_err(|e| e.to_string())?;
    let r = find(&reports, "backend-agreement")?;
    require(
        r.pass,
        format!(
            "{} polynomials of degree {BACKEND_MAX_DEGREE}, n in {{1,2}}, t in {{0.1,0.5,1}}: max rel difference {:.2e} (tol {BACKEND_TOL:e})",
            r.diagnostics["samples"], r.max_rel_residual
        ),
    )
}

fn criterion_8() -> Verdict {
    let mut ok = true;
    let mut worst = (0.0f64, 0.0f64);
    for p in [Preset::Uniform, FIRST, SECOND, MIXED] {
        let mut cfg = ExperimentConfig { initial: p, ..Default::default() };
        cfg.tolerances.contraction = CONTRACTION_TOL;
        cfg.tolerances.entropy_bound = ENTROPY_BOUND_TOL;
        let e = Experiment::<f64>::new(cfg).map_err(|e| e.to_string())?;
        let reports = e.check_inequalities(&[0.1, 0.5, 1.0, 3.0], &[2.0, 4.0]).map_err(|e| e.to_string())?;
        let c = find(&reports, "contraction")?;
        let b = find(&reports, "entropy-bound")?;
        ok &= c.pass && b.pass && c.tolerance == CONTRACTION_TOL && b.tolerance == ENTROPY_BOUND_TOL;
        worst = (worst.0.max(c.max_rel_residual), worst.1.max(b.max_rel_residual));
    }
    require(
        ok,
        format!(
            "4 presets, p in {{2,4}}: contraction excess {:.1e} (tol {CONTRACTION_TOL:e}), entropy-bound excess {:.1e} (tol {ENTROPY_BOUND_TOL:e})",
            worst.0, worst.1
        ),
    )
}

fn evolve_once(config: &Path, out: &Path) -> Result<Vec<u8>, String> {
    let status = Command::new(env!("CARGO_BIN_EXE_ou-lab"))
        .args(["evolve", config.to_str().unwrap(), "--seed", "42", "--out", out.to_str().unwrap()])
        .env_remove("OU_LAB_NODE_BUDGET")
        .output()
        .map_err(|e| e.to_string())?;
    // Exit 1 (a failed check) still writes the artifacts; determinism is judged on them alone.
    if !matches!(status.status.code(), Some(0 | 1)) {
        return Err(format!("evolve exited with {:?}: {}", status.status.code(), String::from_utf8_lossy(&status.stderr)));
    }
    std::fs::read(out.join("trajectory.csv")).map_err(|e| e.to_string())
}

fn criterion_9() -> Verdict {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = dir.path().join("run.toml");
    std::fs::write(&config, "[evolve]\ndimension = 2\n[evolve.initial]\nkind = \"mixed\"\nc0 = 1.5\nc1 = 0.2\nc2 = 0.1\n")
        .map_err(|e| e.to_string())?;
    let a = evolve_once(&config, &dir.path().join("a"))?;
    let b = evolve_once(&config, &dir.path().join("b"))?;
    let sa = std::fs::read(dir.path().join("a/evolve_summary.json")).map_err(|e| e.to_string())?;
    let sb = std::fs::read(dir.path().join("b/evolve_summary.json")).map_err(|e| e.to_string())?;
    require(
        a == b && sa == sb && a.starts_with(b"t,mass,entropy,fisher,bound,ratio\n"),
        format!("two `evolve` runs: trajectory.csv {} bytes identical = {}, summary identical = {}", a.len(), a == b, sa == sb),
    )
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("Weitzenböck suite", criterion_1),
        ("Bochner-entropy suite", criterion_2),
        ("entropy production", criterion_3),
        ("decay bound", criterion_4),
        ("decay-rate fit", criterion_5),
        ("operator algebra", criterion_6),
        ("backend cross-validation", criterion_7),
        ("contraction and entropy bounds", criterion_8),
        ("determinism", criterion_9),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(msg) => println!("criterion {} PASS  {name}: {msg}", k + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {} FAIL  {name}: {msg}", k + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
