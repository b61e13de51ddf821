use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pullback_lab_cli::config::{ConfigError, ExperimentConfig, TaskKind};
use pullback_lab_cli::report::export_report;
use pullback_lab_cli::runner::{output_dir, run_experiment, TaskStatus};

/// Numerical laboratory for pullback dynamics of non-autonomous
/// reaction-diffusion equations on truncated domains.
///
/// Exit codes: 0 all checks pass, 1 a check failed, 2 configuration error,
/// 3 runtime/solver error.
#[derive(Parser)]
#[command(name = "pullback-lab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory override (defaults to the config's `output.dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Family seed override for reproducibility sweeps.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Cap on concurrently evolved trajectories.
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Execute the configured task list end to end, then write the summary.
    Run,
    /// Integrate the showcase trajectory and export its diagnostics.
    Simulate,
    /// Check the structural conditions of the configured nonlinearity.
    VerifyStructure,
    /// Run every inequality checker against pullback ensembles.
    VerifyEstimates,
    /// Approximate the attractor and verify invariance and attraction.
    Attractor,
    /// Regenerate summary.txt from an existing artifact directory.
    Report,
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, ConfigError> {
    let path = cli.config.clone().ok_or_else(|| ConfigError::Invalid(vec![
        "--config PATH is required for this subcommand".into(),
    ]))?;
    ExperimentConfig::load(&path)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global();
    }

    let only = match cli.command {
        Command::Run => None,
        Command::Simulate => Some(TaskKind::Simulate),
        Command::VerifyStructure => Some(TaskKind::VerifyStructure),
        Command::VerifyEstimates => Some(TaskKind::VerifyEstimates),
        Command::Attractor => Some(TaskKind::Attractor),
        Command::Report => {
            let dir = match (&cli.out, &cli.config) {
                (Some(dir), _) => dir.clone(),
                (None, Some(_)) => match load_config(&cli) {
                    Ok(cfg) => output_dir(&cfg, None),
                    Err(e) => {
                        eprintln!("{e}");
                        return ExitCode::from(2);
                    }
                },
                (None, None) => {
                    eprintln!("report needs --out DIR or --config PATH");
                    return ExitCode::from(2);
                }
            };
            return match export_report(&dir) {
                Ok(text) => {
                    print!("{text}");
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("{e}");
                    ExitCode::from(3)
                }
            };
        }
    };

    let cfg = match load_config(&cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };
    let out = output_dir(&cfg, cli.out.as_deref());
    match run_experiment(&cfg, &out, cli.seed, only) {
        Ok(summary) => {
            for result in &summary.results {
                let verdict = match &result.status {
                    TaskStatus::Passed => "PASS".to_string(),
                    TaskStatus::Failed => "FAIL".to_string(),
                    TaskStatus::Errored(e) => format!("ERROR ({e})"),
                };
                println!("task {:<18} {verdict}  {}", result.name, result.detail);
            }
            let code = summary.exit_code();
            println!(
                "artifacts: {}",
                out.display()
            );
            ExitCode::from(code as u8)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(2)
        }
    }
}
