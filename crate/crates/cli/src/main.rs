use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ou_lab::{run_evolve, run_report, run_verify, Config, RunOptions};

/// Ornstein-Uhlenbeck identity checks and entropy-decay experiments.
#[derive(Parser)]
#[command(name = "ou-lab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Seed for the randomized suites; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory; overrides `output_dir` in the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Multiplies every tolerance.
    #[arg(long, global = true, default_value_t = 1.0)]
    tolerance_scale: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Run the identity suites and write verify_report.json.
    Verify { config: PathBuf },
    /// Evolve the configured density and write trajectory.csv and evolve_summary.json.
    Evolve { config: PathBuf },
    /// Merge report files into summary.md.
    Report { files: Vec<PathBuf> },
    /// Print the default configuration as TOML.
    Defaults,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let opts = RunOptions { seed: cli.seed, out: cli.out, tolerance_scale: cli.tolerance_scale };
    let result = match &cli.command {
        Command::Verify { config } => run_verify(config, &opts),
        Command::Evolve { config } => run_evolve(config, &opts),
        Command::Report { files } => run_report(files, &opts),
        Command::Defaults => {
            print!("{}", Config::default().to_toml());
            return ExitCode::SUCCESS;
        }
    };
    match result {
        Ok(outcome) => {
            for r in outcome.reports.iter().filter(|r| !r.pass) {
                eprintln!("FAIL {}: max rel residual {:e} > tolerance {:e}", r.identity, r.max_rel_residual, r.tolerance);
            }
            for f in &outcome.files {
                println!("{}", f.display());
            }
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
