//! Reference evolutionary optimizers used for benchmark comparisons.
//!
//! Both algorithms share the selection and variation machinery of the rest
//! of the crate and report through the same per-generation records, with
//! indicators always computed on the current population's non-dominated
//! front (never on an external archive), so comparisons against the
//! surrogate-assisted optimizer are like for like.

mod mopso;
mod nsga2;

pub use mopso::{mopso_run, MopsoConfig};
pub use nsga2::{nsga2_run, Nsga2Config};

use std::time::Instant;

use crate::error::Result;
use crate::problem::{evaluate_batch, Problem};
use crate::record::{
    extract_front, front_as_objectives, IndicatorContext, RunIdentity, RunRecord, SCHEMA_VERSION,
};
use crate::rng::{RngStream, StreamPurpose};
use crate::types::{DecisionVector, EvalCounter, Individual, Population};

/// Uniform initial population in the unit box, truly evaluated.
fn initial_population(
    problem: &dyn Problem,
    n: usize,
    seed: u64,
    evals: &mut EvalCounter,
) -> Result<Population> {
    let dim = problem.dimension();
    let mut init_rng = RngStream::new(seed, StreamPurpose::Initialization);
    let mut members: Vec<Individual> = (0..n)
        .map(|_| {
            Individual::unevaluated(DecisionVector(
                (0..dim).map(|_| init_rng.uniform()).collect(),
            ))
        })
        .collect();
    evaluate_batch(problem, &mut members, evals)?;
    Ok(Population::new(members, n))
}

/// Emits the record for the population as it stands.
fn emit_record(
    population: &Population,
    generation: u32,
    evals: &EvalCounter,
    identity: &RunIdentity,
    indicators: &IndicatorContext,
    started: Instant,
    observer: &mut dyn FnMut(&RunRecord),
    records: &mut Vec<RunRecord>,
) -> Result<()> {
    let front = extract_front(population)?;
    let (igd, hv) = indicators.indicators(&front_as_objectives(&front))?;
    let record = RunRecord {
        schema_version: SCHEMA_VERSION,
        run_id: identity.run_id.clone(),
        algo: identity.algo.clone(),
        problem: identity.problem.clone(),
        dimension: identity.dimension,
        seed: identity.seed,
        generation,
        eval_count: evals.count(),
        front,
        igd,
        hv,
        kappa: None,
        wall_time_s: started.elapsed().as_secs_f64(),
        warnings: Vec::new(),
    };
    observer(&record);
    records.push(record);
    Ok(())
}
