//! Command-line front end: suites of deficit checks with JSON or CSV reports.

pub mod bundle;
pub mod config;
mod error;
pub mod output;
pub mod suites;

use std::time::Instant;

use rayon::prelude::*;

pub use bundle::{ReportBundle, ReportEntry, Summary, Verdict};
pub use config::{Cli, Command, Format, Inputs, RunConfig};
pub use error::CliError;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "GAUSS_DEFICIT_THREADS";

fn pool() -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(raw) = std::env::var(THREADS_ENV) {
        let n: usize = raw
            .trim()
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got `{raw}`")))?;
        builder = builder.num_threads(n);
    }
    Ok(builder.build()?)
}

/// Runs the suite named by `cfg.command`. Failing checks are recorded, never raised.
pub fn run(cfg: &RunConfig) -> Result<ReportBundle, CliError> {
    let start = Instant::now();
    let plan = suites::plan(cfg)?;
    let seed = cfg.seed;
    // collect keeps item order whatever the completion order
    let reports: Vec<ReportEntry> = pool()?.install(|| {
        plan.jobs
            .par_iter()
            .enumerate()
            .map(|(i, job)| ReportEntry::new(i, job.label.clone(), job.extremiser, job.run(seed, i), job.tol))
            .collect()
    });
    let summary = Summary::of(&reports);
    Ok(ReportBundle {
        config: cfg.clone(),
        reports,
        table: plan.table,
        summary,
        timing_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}
