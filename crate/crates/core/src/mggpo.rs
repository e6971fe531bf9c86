//! The surrogate-assisted generational loop.
//!
//! Each generation breeds a large candidate pool from the elite set, scores
//! every candidate on all objectives with the previous generation's Gaussian
//! processes using a lower confidence bound, truly evaluates only the N most
//! promising, and keeps the best N of old elites plus new evaluations. The
//! models are then refit on the latest evaluations together with the
//! surviving elites (at most 2N points, duplicates included).
//!
//! The exploration weight kappa decays geometrically, so early generations
//! chase posterior uncertainty and late generations trust the posterior
//! mean.

use std::fs;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gp::{lcb, GpFitOptions, GpModel, KappaSchedule};
use crate::problem::{denormalize, evaluate_batch, validate_problem, Problem};
use crate::record::{
    extract_front, front_as_objectives, IndicatorContext, RunIdentity, RunRecord, SCHEMA_VERSION,
};
use crate::rng::{RngStream, StreamPurpose};
use crate::selection::select_best;
use crate::types::{DecisionVector, EvalCounter, Individual, ObjectiveVector, Population};
use crate::variation::{generate_candidates, VariationParams};

/// How candidate pools are scored before true evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScoringMode {
    /// Lower confidence bound from the per-objective surrogate models.
    GpLcb,
    /// True objective values, bypassing the models entirely. This turns the
    /// loop into a plain elitist evolutionary algorithm; it exists so the
    /// selection machinery can be validated independently of the surrogates
    /// (scoring evaluations are not counted against the budget).
    TrueObjective,
}

/// Full configuration of one optimizer run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MggpoConfig {
    /// Population size N; also the number of true evaluations per generation.
    pub population_size: usize,
    /// Number of generations after initialization.
    pub generations: u32,
    pub variation: VariationParams,
    /// Initial exploration weight (2 in the benchmark protocol).
    pub kappa_initial: f64,
    /// Per-generation decay factor (0.85 in the benchmark protocol).
    pub kappa_rho: f64,
    pub gp: GpFitOptions,
    pub scoring: ScoringMode,
    pub seed: u64,
}

impl MggpoConfig {
    /// Benchmark-protocol settings for a problem of the given dimension:
    /// N = 80, 20 mutants and 20 crossover children per parent, kappa from
    /// 2 decaying by 0.85, default model-fit options.
    pub fn protocol_defaults(dimension: usize, generations: u32, seed: u64) -> Self {
        Self {
            population_size: 80,
            generations,
            variation: VariationParams::protocol_defaults(dimension),
            kappa_initial: 2.0,
            kappa_rho: 0.85,
            gp: GpFitOptions::default(),
            scoring: ScoringMode::GpLcb,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.population_size < 2 {
            return Err(Error::InvalidParameter {
                name: "population_size",
                message: format!("must be at least 2, got {}", self.population_size),
            });
        }
        if self.variation.m1 + self.variation.m2 == 0 {
            return Err(Error::InvalidParameter {
                name: "variation",
                message: "m1 + m2 must be positive".to_string(),
            });
        }
        if !(self.kappa_initial >= 0.0 && self.kappa_initial.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "kappa_initial",
                message: format!("must be finite and nonnegative, got {}", self.kappa_initial),
            });
        }
        if !(self.kappa_rho > 0.0 && self.kappa_rho <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "kappa_rho",
                message: format!("must lie in (0, 1], got {}", self.kappa_rho),
            });
        }
        if !(0.0..=1.0).contains(&self.variation.p_mut) {
            return Err(Error::InvalidParameter {
                name: "p_mut",
                message: format!("must lie in [0, 1], got {}", self.variation.p_mut),
            });
        }
        Ok(())
    }
}

/// Complete optimizer state between generations. Serializable as a
/// checkpoint; resuming from a checkpoint continues the exact draw sequence
/// of the uninterrupted run.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerationState {
    pub schema_version: u32,
    /// Generation index n; 0 right after initialization.
    pub generation: u32,
    /// The N best evaluated solutions found so far.
    pub elites: Population,
    /// The solutions truly evaluated this generation (empty at n = 0, where
    /// the elites themselves are the latest evaluations).
    pub latest: Population,
    /// One surrogate per objective, trained on latest + elites. Empty in
    /// true-objective scoring mode.
    pub models: Vec<GpModel>,
    pub kappa: KappaSchedule,
    pub evals: EvalCounter,
    pub variation_rng: RngStream,
    pub gp_rng: RngStream,
    /// Warnings accumulated since the last emitted record.
    pub warnings: Vec<String>,
}

/// Fits one model per objective on `train`. When a fit fails and a previous
/// model exists, that model is carried over and a warning is recorded;
/// without a fallback the error propagates.
fn fit_models(
    train: &[Individual],
    objectives: usize,
    opts: &GpFitOptions,
    previous: Option<&[GpModel]>,
    rng: &mut RngStream,
    warnings: &mut Vec<String>,
) -> Result<Vec<GpModel>> {
    let x: Vec<DecisionVector> = train.iter().map(|ind| ind.x.clone()).collect();
    let mut models = Vec::with_capacity(objectives);
    for j in 0..objectives {
        let y: Vec<f64> = train.iter().map(|ind| ind.objectives()[j]).collect();
        let warm = previous.map(|ms| ms[j].params().lengths.clone());
        match GpModel::fit(&x, &y, opts, warm.as_deref(), rng) {
            Ok(model) => models.push(model),
            Err(err) => match previous {
                Some(ms) => {
                    warnings.push(format!(
                        "objective {j}: model refit failed ({err}); keeping previous model"
                    ));
                    models.push(ms[j].clone());
                }
                None => return Err(err),
            },
        }
    }
    Ok(models)
}

/// Draws and evaluates the initial population and fits the first models.
pub fn initialize(problem: &dyn Problem, config: &MggpoConfig) -> Result<GenerationState> {
    validate_problem(problem)?;
    config.validate()?;
    let n = config.population_size;
    let dim = problem.dimension();
    let mut init_rng = RngStream::new(config.seed, StreamPurpose::Initialization);
    let mut members: Vec<Individual> = (0..n)
        .map(|_| {
            Individual::unevaluated(DecisionVector(
                (0..dim).map(|_| init_rng.uniform()).collect(),
            ))
        })
        .collect();
    let mut evals = EvalCounter::new();
    evaluate_batch(problem, &mut members, &mut evals)?;
    let elites = Population::new(members, n);

    let mut gp_rng = RngStream::new(config.seed, StreamPurpose::GpFit);
    let mut warnings = Vec::new();
    let models = match config.scoring {
        ScoringMode::GpLcb => fit_models(
            &elites.members,
            problem.objectives(),
            &config.gp,
            None,
            &mut gp_rng,
            &mut warnings,
        )?,
        ScoringMode::TrueObjective => Vec::new(),
    };

    Ok(GenerationState {
        schema_version: SCHEMA_VERSION,
        generation: 0,
        elites,
        latest: Population::empty(n),
        models,
        kappa: KappaSchedule::new(config.kappa_initial, config.kappa_rho),
        evals,
        variation_rng: RngStream::new(config.seed, StreamPurpose::Variation),
        gp_rng,
        warnings,
    })
}

/// Scores every candidate with an objective-count vector, either from the
/// current models' lower confidence bounds or from the true objectives.
fn score_candidates(
    candidates: &[DecisionVector],
    state: &GenerationState,
    problem: &dyn Problem,
    config: &MggpoConfig,
) -> Result<Vec<ObjectiveVector>> {
    match config.scoring {
        ScoringMode::GpLcb => {
            let mut per_model = Vec::with_capacity(state.models.len());
            for model in &state.models {
                per_model.push(model.predict_batch(candidates)?);
            }
            Ok((0..candidates.len())
                .map(|i| {
                    ObjectiveVector(
                        per_model
                            .iter()
                            .map(|preds| lcb(preds[i].0, preds[i].1, state.kappa.current))
                            .collect(),
                    )
                })
                .collect())
        }
        ScoringMode::TrueObjective => candidates
            .iter()
            .map(|x| {
                let raw = denormalize(problem, x)?;
                problem.evaluate(&raw)
            })
            .collect(),
    }
}

/// Advances the state by one generation.
pub fn step(
    problem: &dyn Problem,
    config: &MggpoConfig,
    state: GenerationState,
) -> Result<GenerationState> {
    let mut s = state;
    let n = config.population_size;
    s.kappa.step();

    // Breed and score the candidate pool with the models fit at the end of
    // the previous generation, then keep the N most promising.
    let candidates = generate_candidates(&s.elites, &config.variation, &mut s.variation_rng);
    let scores = score_candidates(&candidates, &s, problem, config)?;
    let chosen = select_best(&scores, n.min(scores.len()))?;
    let mut latest_members: Vec<Individual> = chosen
        .iter()
        .map(|&i| Individual::unevaluated(candidates[i].clone()))
        .collect();
    evaluate_batch(problem, &mut latest_members, &mut s.evals)?;
    let latest = Population::new(latest_members, n);

    // Environmental selection over old elites plus the new evaluations.
    let union: Vec<Individual> = s
        .elites
        .members
        .iter()
        .chain(latest.members.iter())
        .cloned()
        .collect();
    let union_objs: Vec<ObjectiveVector> = union.iter().map(|m| m.objectives().clone()).collect();
    let keep = select_best(&union_objs, n)?;
    let elites = Population::new(keep.iter().map(|&i| union[i].clone()).collect(), n);

    if config.scoring == ScoringMode::GpLcb {
        let train: Vec<Individual> = latest
            .members
            .iter()
            .chain(elites.members.iter())
            .cloned()
            .collect();
        s.models = fit_models(
            &train,
            problem.objectives(),
            &config.gp,
            Some(&s.models),
            &mut s.gp_rng,
            &mut s.warnings,
        )?;
    }

    s.generation += 1;
    s.elites = elites;
    s.latest = latest;
    Ok(s)
}

fn make_record(
    state: &mut GenerationState,
    identity: &RunIdentity,
    indicators: &IndicatorContext,
    wall_time_s: f64,
) -> Result<RunRecord> {
    let front = extract_front(&state.elites)?;
    let (igd, hv) = indicators.indicators(&front_as_objectives(&front))?;
    Ok(RunRecord {
        schema_version: SCHEMA_VERSION,
        run_id: identity.run_id.clone(),
        algo: identity.algo.clone(),
        problem: identity.problem.clone(),
        dimension: identity.dimension,
        seed: identity.seed,
        generation: state.generation,
        eval_count: state.evals.count(),
        front,
        igd,
        hv,
        kappa: Some(state.kappa.current),
        wall_time_s,
        warnings: std::mem::take(&mut state.warnings),
    })
}

/// Continues a run from an existing state until `config.generations`,
/// emitting one record per completed generation (not for the state passed
/// in, which the original run already reported).
pub fn run_from(
    problem: &dyn Problem,
    config: &MggpoConfig,
    mut state: GenerationState,
    identity: &RunIdentity,
    indicators: &IndicatorContext,
    observer: &mut dyn FnMut(&RunRecord),
) -> Result<Vec<RunRecord>> {
    let mut records = Vec::new();
    while state.generation < config.generations {
        let tick = Instant::now();
        state = step(problem, config, state)?;
        let record = make_record(
            &mut state,
            identity,
            indicators,
            tick.elapsed().as_secs_f64(),
        )?;
        observer(&record);
        records.push(record);
    }
    Ok(records)
}

/// Full run: initialization plus `config.generations` steps. Returns every
/// emitted record; the observer sees each one as soon as it exists.
pub fn run(
    problem: &dyn Problem,
    config: &MggpoConfig,
    identity: &RunIdentity,
    indicators: &IndicatorContext,
    observer: &mut dyn FnMut(&RunRecord),
) -> Result<Vec<RunRecord>> {
    let tick = Instant::now();
    let mut state = initialize(problem, config)?;
    let first = make_record(
        &mut state,
        identity,
        indicators,
        tick.elapsed().as_secs_f64(),
    )?;
    observer(&first);
    let mut records = vec![first];
    records.extend(run_from(
        problem, config, state, identity, indicators, observer,
    )?);
    Ok(records)
}

/// Serializes the state as an indented JSON checkpoint.
pub fn save_checkpoint(state: &GenerationState, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(state).map_err(|source| Error::Format {
        path: path.display().to_string(),
        source,
    })?;
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Loads a checkpoint, rejecting unknown schema versions.
pub fn load_checkpoint(path: &Path) -> Result<GenerationState> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let state: GenerationState =
        serde_json::from_str(&text).map_err(|source| Error::Format {
            path: path.display().to_string(),
            source,
        })?;
    if state.schema_version != SCHEMA_VERSION {
        return Err(Error::SchemaMismatch {
            found: state.schema_version,
            supported: SCHEMA_VERSION,
        });
    }
    Ok(state)
}
