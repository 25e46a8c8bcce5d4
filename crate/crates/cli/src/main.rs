use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use shocklab_cli::{load_config, run_config, run_suite, ExperimentKind, Report, RunError};

/// Numerical experiments on viscous shocks with periodic perturbations.
#[derive(Parser)]
#[command(name = "shocklab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Viscous shock profile and its ratio bounds.
    Profile(Common),
    /// Decay of periodic perturbations.
    Periodic(Common),
    /// Shift ODE, measured shift and the asymptotic shift formula.
    ShockShift(Common),
    /// Burgers coincidence times.
    Coincidence(Common),
    /// Gap-flux counterexample to the inviscid shift.
    Counterexample(Common),
    /// Vanishing-viscosity rate of the periodic shift component.
    Sweep(Common),
    /// Convergence to a rarefaction wave.
    Rarefaction(Common),
    /// Line solver against the exact Burgers solution.
    HopfCheck(Common),
    /// Every experiment with default settings.
    Suite {
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, default_value_t = default_threads())]
        threads: usize,
    },
}

#[derive(Args)]
struct Common {
    /// Scenario file overriding the defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (default: `output.dir` or `out/<kind>`).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = default_threads())]
    threads: usize,
}

fn default_threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn single(kind: ExperimentKind, c: Common) -> Result<Report, RunError> {
    let cfg = load_config(kind, c.config.as_deref())?;
    let out = c
        .out
        .or_else(|| cfg.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(kind.name()));
    let report = run_config(&cfg, &out, c.threads)?;
    eprintln!("outputs in {}", out.display());
    Ok(report)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Profile(c) => single(ExperimentKind::Profile, c).map(|r| vec![r]),
        Command::Periodic(c) => single(ExperimentKind::PeriodicDecay, c).map(|r| vec![r]),
        Command::ShockShift(c) => single(ExperimentKind::ShockShift, c).map(|r| vec![r]),
        Command::Coincidence(c) => single(ExperimentKind::BurgersCoincidence, c).map(|r| vec![r]),
        Command::Counterexample(c) => single(ExperimentKind::Counterexample, c).map(|r| vec![r]),
        Command::Sweep(c) => single(ExperimentKind::ViscositySweep, c).map(|r| vec![r]),
        Command::Rarefaction(c) => single(ExperimentKind::Rarefaction, c).map(|r| vec![r]),
        Command::HopfCheck(c) => single(ExperimentKind::HopfCheck, c).map(|r| vec![r]),
        Command::Suite { out, threads } => run_suite(&out, threads),
    };
    match result {
        Ok(reports) => {
            for r in &reports {
                print!("{}", r.summary());
            }
            if reports.iter().all(Report::all_passed) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(e @ (RunError::Validation(_) | RunError::Config(_))) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
        Err(RunError::Other(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
