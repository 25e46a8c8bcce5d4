//! Experiment runner for shocklab: configuration, validation, runners and
//! reports.

pub mod config;
pub mod experiments;
pub mod report;

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use rayon::prelude::*;

pub use config::{ConfigError, ExperimentKind, ScenarioConfig};
pub use experiments::{validate, Prepared};
pub use report::{Check, Report, Table};

/// Why an experiment did not produce a report.
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Validation(Vec<String>),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Other(#[from] anyhow::Error),
}

/// Maps `f` over `items` on a pool of `threads` workers; results keep the
/// input order.
pub(crate) fn map_ordered<T, R, F>(items: &[T], threads: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    if threads <= 1 {
        return items.iter().map(f).collect();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(|| items.par_iter().map(&f).collect()),
        Err(_) => items.iter().map(f).collect(),
    }
}

/// Loads the configuration for `kind`: defaults, overridden by `path`.
pub fn load_config(kind: ExperimentKind, path: Option<&Path>) -> Result<ScenarioConfig, RunError> {
    match path {
        None => Ok(ScenarioConfig::default_for(kind)),
        Some(p) => {
            let text = fs::read_to_string(p)
                .with_context(|| format!("reading {}", p.display()))?;
            Ok(ScenarioConfig::parse(&text, Some(kind))?)
        }
    }
}

/// Validates and runs `cfg`, writing outputs into `out`.
pub fn run_config(cfg: &ScenarioConfig, out: &Path, threads: usize) -> Result<Report, RunError> {
    let prepared = validate(cfg).map_err(RunError::Validation)?;
    Ok(experiments::run_and_write(&prepared, out, threads)?)
}

/// Runs every experiment with default settings into `out/<kind>/`.
///
/// Experiments run concurrently; each is deterministic, so outputs do not
/// depend on `threads`.
pub fn run_suite(out: &Path, threads: usize) -> Result<Vec<Report>, RunError> {
    let configs: Vec<ScenarioConfig> = ExperimentKind::ALL
        .iter()
        .map(|&k| ScenarioConfig::default_for(k))
        .collect();
    let prepared = configs
        .iter()
        .map(validate)
        .collect::<Result<Vec<_>, _>>()
        .map_err(RunError::Validation)?;
    let inner = (threads / prepared.len()).max(1);
    let reports = map_ordered(&prepared, threads, |p| {
        experiments::run_and_write(p, &out.join(p.cfg.kind.name()), inner)
    });
    let mut summary = String::new();
    let mut done = Vec::with_capacity(reports.len());
    for r in reports {
        let r = r?;
        let status = if r.all_passed() { "pass" } else { "fail" };
        summary.push_str(&format!("{}: {status}\n", r.scenario));
        done.push(r);
    }
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    fs::write(out.join("summary.txt"), summary)
        .with_context(|| format!("writing {}", out.join("summary.txt").display()))?;
    Ok(done)
}
