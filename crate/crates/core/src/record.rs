//! Per-generation run records and the indicator context used to fill them.
//!
//! Every optimizer in this crate emits one [`RunRecord`] per generation
//! (including generation 0, the initialization). Records are plain data,
//! serialized to JSON Lines by the benchmark harness; the schema is strict
//! on read so that silently extended or truncated files are caught.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{hypervolume_2d, igd};
use crate::problems::ReferenceFront;
use crate::selection::non_dominated_sort;
use crate::types::{ObjectiveVector, Population};

/// Current record and checkpoint schema version.
pub const SCHEMA_VERSION: u32 = 1;

/// One generation's snapshot of an optimization run.
///
/// `front` is the non-dominated subset of the *current population*, never
/// of any external archive, so algorithms are compared on the same footing.
/// `kappa` is populated only by the surrogate-assisted optimizer; baselines
/// leave it null. `wall_time_s` covers the work since the previous record
/// and is the one field excluded from determinism comparisons.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunRecord {
    pub schema_version: u32,
    pub run_id: String,
    pub algo: String,
    pub problem: String,
    pub dimension: usize,
    pub seed: u64,
    pub generation: u32,
    pub eval_count: u64,
    pub front: Vec<[f64; 2]>,
    pub igd: f64,
    pub hv: f64,
    pub kappa: Option<f64>,
    pub wall_time_s: f64,
    pub warnings: Vec<String>,
}

impl RunRecord {
    /// Rejects records written by an incompatible schema.
    pub fn check_schema(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::SchemaMismatch {
                found: self.schema_version,
                supported: SCHEMA_VERSION,
            });
        }
        Ok(())
    }
}

/// Identity of one run, shared by every record it emits.
#[derive(Clone, Debug)]
pub struct RunIdentity {
    pub run_id: String,
    pub algo: String,
    pub problem: String,
    pub dimension: usize,
    pub seed: u64,
}

/// Everything needed to score a front: the reference front for IGD and the
/// reference point for hypervolume.
#[derive(Clone, Debug)]
pub struct IndicatorContext {
    pub reference_front: ReferenceFront,
    pub reference_point: [f64; 2],
}

impl IndicatorContext {
    /// IGD and hypervolume of a two-objective front.
    pub fn indicators(&self, front: &[ObjectiveVector]) -> Result<(f64, f64)> {
        let igd_value = igd(front, &self.reference_front)?;
        let hv_value = hypervolume_2d(front, &self.reference_point)?;
        Ok((igd_value, hv_value))
    }
}

/// The non-dominated subset of a population's objective vectors, as fixed
/// two-component arrays for serialization. Duplicates on the front are kept;
/// the indicators are insensitive to them.
pub fn extract_front(population: &Population) -> Result<Vec<[f64; 2]>> {
    if population.is_empty() {
        return Err(Error::EmptySet {
            what: "population for front extraction".to_string(),
        });
    }
    let objs = population.objective_vectors();
    for o in &objs {
        if o.len() != 2 {
            return Err(Error::UnsupportedObjectives(o.len()));
        }
    }
    let sorted = non_dominated_sort(&objs)?;
    Ok(sorted.fronts[0]
        .iter()
        .map(|&i| [objs[i][0], objs[i][1]])
        .collect())
}

/// Objective vectors of a serialized front, for feeding back into metrics.
pub fn front_as_objectives(front: &[[f64; 2]]) -> Vec<ObjectiveVector> {
    front.iter().map(|p| ObjectiveVector(p.to_vec())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{DecisionVector, Individual};

    fn evaluated(x: &[f64], f: [f64; 2]) -> Individual {
        let mut ind = Individual::unevaluated(DecisionVector(x.to_vec()));
        ind.objectives = Some(ObjectiveVector(f.to_vec()));
        ind.eval_index = Some(0);
        ind
    }

    #[test]
    fn front_extraction_keeps_only_rank_zero() {
        let pop = Population::new(
            vec![
                evaluated(&[0.1], [1.0, 3.0]),
                evaluated(&[0.2], [2.0, 2.0]),
                evaluated(&[0.3], [3.0, 3.0]),
            ],
            3,
        );
        let front = extract_front(&pop).unwrap();
        assert_eq!(front, vec![[1.0, 3.0], [2.0, 2.0]]);
    }

    #[test]
    fn record_roundtrip_and_schema_check() {
        let record = RunRecord {
            schema_version: SCHEMA_VERSION,
            run_id: "mggpo-zdt1-p30-s7".to_string(),
            algo: "mggpo".to_string(),
            problem: "zdt1".to_string(),
            dimension: 30,
            seed: 7,
            generation: 3,
            eval_count: 320,
            front: vec![[0.25, 0.5]],
            igd: 0.12,
            hv: 0.375,
            kappa: Some(2.0 * 0.85f64.powi(3)),
            wall_time_s: 0.9,
            warnings: vec![],
        };
        let line = serde_json::to_string(&record).unwrap();
        let back: RunRecord = serde_json::from_str(&line).unwrap();
        back.check_schema().unwrap();
        assert_eq!(back, record);

        let mut stale = record;
        stale.schema_version = 99;
        assert!(stale.check_schema().is_err());

        let extended = line.replace("\"warnings\":[]", "\"warnings\":[],\"extra\":1");
        assert!(serde_json::from_str::<RunRecord>(&extended).is_err());
    }
}
