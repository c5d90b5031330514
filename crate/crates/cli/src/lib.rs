//! Experiment driver: every lab operation as a configured, reproducible run
//! that writes a JSON report and CSV data into its own directory.
//!
//! A run reads one JSON config, validates it completely, computes all
//! results in memory and only then writes files, each through a temporary
//! file and a rename. A config error therefore leaves no output behind.

pub mod commands;
pub mod common;
pub mod config;
pub mod error;
pub mod output;
pub mod suite;

use config::Prepared;
use error::Result;
use output::{write_outputs, Report};

/// Exit status of a run whose assertions all hold.
pub const EXIT_PASS: u8 = 0;
/// Exit status when an assertion failed; the report is still written.
pub const EXIT_FAIL: u8 = 1;
/// Exit status of a config or runtime error; nothing is written.
pub const EXIT_ERROR: u8 = 2;

/// Runs a prepared experiment and writes its artifacts. Returns whether
/// every assertion passed.
pub fn execute(prepared: &Prepared) -> Result<bool> {
    let outcome = prepared.experiment.run(prepared.seed)?;
    let inputs = prepared.experiment.inputs()?;
    let passed = outcome.assertions.iter().all(|a| a.passed);
    let report = Report {
        command: prepared.experiment.command(),
        seed: prepared.seed,
        inputs: &inputs,
        results: &outcome.results,
        assertions: &outcome.assertions,
        passed,
    };
    write_outputs(&prepared.output_dir, &report, &outcome.tables)?;
    Ok(passed)
}

/// Caps the global worker pool from `FSLAB_THREADS`, if set.
pub fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("FSLAB_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| error::invalid(format!("FSLAB_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| error::invalid(format!("cannot size the worker pool: {e}")))
}
