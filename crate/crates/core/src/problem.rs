//! Problem interface and the true-evaluation boundary.
//!
//! Algorithms work exclusively in the normalized unit box; this module owns
//! the affine maps to and from raw coordinates and the batch evaluator that
//! assigns global evaluation indices and applies the failure policy.

use crate::error::{Error, Result};
use crate::types::{DecisionVector, EvalCounter, Individual, ObjectiveVector};

/// Penalty assigned per objective when an evaluation fails or returns
/// non-finite values. Large enough to be dominated by any genuine point.
pub const FAILURE_PENALTY: f64 = 1e30;

/// A box-constrained multi-objective minimization problem in raw coordinates.
pub trait Problem: Send + Sync {
    fn name(&self) -> &str;
    fn dimension(&self) -> usize;
    fn objectives(&self) -> usize;
    fn lower(&self) -> &[f64];
    fn upper(&self) -> &[f64];

    /// Evaluates one raw-coordinate point. `x.len()` must equal
    /// [`Problem::dimension`].
    fn evaluate(&self, x: &[f64]) -> Result<ObjectiveVector>;
}

/// Checks the structural invariants of a problem definition: bound arrays of
/// the right length with every lower bound strictly below its upper bound.
pub fn validate_problem(problem: &dyn Problem) -> Result<()> {
    let dim = problem.dimension();
    if problem.lower().len() != dim {
        return Err(Error::DimensionMismatch {
            context: "problem lower bounds",
            expected: dim,
            got: problem.lower().len(),
        });
    }
    if problem.upper().len() != dim {
        return Err(Error::DimensionMismatch {
            context: "problem upper bounds",
            expected: dim,
            got: problem.upper().len(),
        });
    }
    for (index, (&lower, &upper)) in problem.lower().iter().zip(problem.upper()).enumerate() {
        if !(lower < upper) {
            return Err(Error::InvalidBounds {
                index,
                lower,
                upper,
            });
        }
    }
    Ok(())
}

/// Maps a raw-coordinate point into the unit box.
pub fn normalize(problem: &dyn Problem, raw: &[f64]) -> Result<DecisionVector> {
    if raw.len() != problem.dimension() {
        return Err(Error::DimensionMismatch {
            context: "normalize",
            expected: problem.dimension(),
            got: raw.len(),
        });
    }
    let x = raw
        .iter()
        .zip(problem.lower())
        .zip(problem.upper())
        .map(|((&v, &lo), &hi)| (v - lo) / (hi - lo))
        .collect();
    Ok(DecisionVector(x))
}

/// Maps a unit-box point back to raw coordinates.
pub fn denormalize(problem: &dyn Problem, x: &DecisionVector) -> Result<Vec<f64>> {
    if x.len() != problem.dimension() {
        return Err(Error::DimensionMismatch {
            context: "denormalize",
            expected: problem.dimension(),
            got: x.len(),
        });
    }
    Ok(x.iter()
        .zip(problem.lower())
        .zip(problem.upper())
        .map(|((&v, &lo), &hi)| lo + v * (hi - lo))
        .collect())
}

/// Truly evaluates a batch of unevaluated individuals in order, assigning
/// each the next global evaluation index.
///
/// A failed evaluation (an error from the problem, or any non-finite
/// objective component) still consumes its evaluation index; the individual
/// receives [`FAILURE_PENALTY`] in every objective and is flagged, so
/// selection pushes it to the worst front instead of aborting the run.
pub fn evaluate_batch(
    problem: &dyn Problem,
    batch: &mut [Individual],
    counter: &mut EvalCounter,
) -> Result<()> {
    for individual in batch.iter() {
        if let Some(index) = individual.eval_index {
            return Err(Error::AlreadyEvaluated(index));
        }
    }
    for individual in batch.iter_mut() {
        let raw = denormalize(problem, &individual.x)?;
        let index = counter.next();
        let outcome = problem.evaluate(&raw);
        let (objectives, failed) = match outcome {
            Ok(f) if f.len() == problem.objectives() && f.iter().all(|v| v.is_finite()) => (f, false),
            _ => (
                ObjectiveVector(vec![FAILURE_PENALTY; problem.objectives()]),
                true,
            ),
        };
        individual.objectives = Some(objectives);
        individual.eval_index = Some(index);
        individual.eval_failed = failed;
    }
    Ok(())
}
