//! Benchmark harness for the multi-objective optimizers in the `mggpo`
//! crate: experiment configuration, batch execution with per-generation
//! JSONL persistence, and tabular post-processing (summaries, paired
//! statistical comparisons, convergence curves).

pub mod analysis;
pub mod config;
pub mod experiment;

/// Formats a float for CSV output with 17 significant digits, enough to
/// reconstruct the exact binary value when re-read.
pub fn csv_float(value: f64) -> String {
    format!("{value:.16e}")
}
