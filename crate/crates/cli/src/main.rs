//! `iaprox`: run, compare and tune experiments, and run the check suite.
//!
//! Exit codes: 0 success (including runs that hit the iteration cap), 1 bad
//! config or failed check, 2 divergence, 3 tuning failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use iaprox::config::ExperimentConfig;
use iaprox::experiment::{
    compare_csv, compare_experiments, compare_table, run_experiment, tune_experiment, Overrides, RunStatus,
};
use iaprox::inner::InnerOptions;
use iaprox::suite::{run_check_suite, SuiteOptions};
use iaprox::Error;
use log::{info, warn};

const DEFAULT_OUT_DIR: &str = "results";

#[derive(Debug, Parser)]
#[command(
    name = "iaprox",
    version,
    about = "Incremental aggregated proximal and augmented Lagrangian experiments"
)]
struct Cli {
    /// Output directory; overrides the config's `output.dir`.
    #[arg(long, global = true, env = "IAPROX_OUT_DIR")]
    out_dir: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one experiment and write trace.csv and summary.json.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        overrides: OverrideArgs,
    },
    /// Run several experiments over the same instance and tabulate them.
    Compare {
        #[arg(long, num_args = 2.., required = true)]
        config: Vec<PathBuf>,
        #[command(flatten)]
        overrides: OverrideArgs,
    },
    /// Run the built-in check suite; exits nonzero if any check fails.
    Check {
        /// Inner proximal solver tolerance.
        #[arg(long)]
        prox_tol: Option<f64>,
    },
    /// Search for a constant stepsize and report it.
    Tune {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        overrides: OverrideArgs,
    },
}

#[derive(Debug, Args)]
struct OverrideArgs {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    /// Inner proximal solver tolerance.
    #[arg(long)]
    prox_tol: Option<f64>,
}

impl OverrideArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            max_iter: self.max_iter,
            tol: self.tol,
            prox_tol: self.prox_tol,
        }
    }
}

fn load(path: &Path, overrides: &OverrideArgs) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::from_file(path)?;
    overrides.overrides().apply(&mut cfg);
    cfg.validate()?;
    Ok(cfg)
}

fn out_dir(cli: &Option<PathBuf>, cfg: Option<&ExperimentConfig>) -> PathBuf {
    cli.clone()
        .or_else(|| cfg.and_then(|c| c.output.dir.clone()))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

fn run(cli: &Cli) -> anyhow::Result<ExitCode> {
    match &cli.command {
        Command::Run { config, overrides } => {
            let cfg = load(config, overrides)?;
            let outcome = run_experiment(&cfg)?;
            let dir = out_dir(&cli.out_dir, Some(&cfg)).join(cfg.prefix());
            outcome
                .write(&dir)
                .with_context(|| format!("writing results to {}", dir.display()))?;
            let s = &outcome.summary;
            println!(
                "{}: {:?} after {} iterations, final error {}, rho_hat {}",
                s.name,
                s.status,
                s.iterations,
                s.final_error.map_or("-".into(), |e| format!("{e:.3e}")),
                s.rho_hat.map_or("-".into(), |r| format!("{r:.6}")),
            );
            println!("wrote {}", dir.display());
            Ok(match s.status {
                RunStatus::Diverged => ExitCode::from(2),
                RunStatus::MaxIter => {
                    warn!("iteration cap reached before the tolerance");
                    ExitCode::SUCCESS
                }
                RunStatus::Converged => ExitCode::SUCCESS,
            })
        }
        Command::Compare { config, overrides } => {
            let cfgs = config
                .iter()
                .map(|p| load(p, overrides))
                .collect::<anyhow::Result<Vec<_>>>()?;
            let rows = compare_experiments(&cfgs)?;
            let dir = out_dir(&cli.out_dir, cfgs.first());
            std::fs::create_dir_all(&dir)?;
            let path = dir.join("compare.csv");
            std::fs::write(&path, compare_csv(&rows)).with_context(|| format!("writing {}", path.display()))?;
            print!("{}", compare_table(&rows));
            println!("wrote {}", path.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Check { prox_tol } => {
            let inner = prox_tol.map_or_else(InnerOptions::default, |t| InnerOptions::default().with_tol(t));
            let report = run_check_suite(&SuiteOptions { inner });
            let dir = out_dir(&cli.out_dir, None).join("check");
            report.write(&dir)?;
            print!("{}", report.to_text());
            let failed = report.failures().count();
            println!(
                "{} checks, {failed} failed; wrote {}",
                report.checks.len(),
                dir.display()
            );
            Ok(if failed == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Tune { config, overrides } => {
            let cfg = load(config, overrides)?;
            let t = tune_experiment(&cfg)?;
            info!("tuned {} on {}", cfg.algorithm, cfg.prefix());
            println!("alpha {:.6e} rho_hat {:.6} flagged {}", t.alpha, t.rho_hat, t.flagged);
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Diverged { .. }) => 2,
        Some(Error::TuningFailed { .. }) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
