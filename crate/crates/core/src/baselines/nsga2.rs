//! Elitist genetic algorithm with non-dominated sorting: binary tournament
//! mating selection on (rank, crowding), simulated binary crossover,
//! polynomial mutation, and truncation of parents plus offspring.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{evaluate_batch, validate_problem, Problem};
use crate::record::{IndicatorContext, RunIdentity, RunRecord};
use crate::rng::{RngStream, StreamPurpose};
use crate::selection::{non_dominated_sort, select_best};
use crate::types::{EvalCounter, Individual, ObjectiveVector, Population};
use crate::variation::{polynomial_mutation_bound_scaled, sbx_crossover};

use super::{emit_record, initial_population};

/// Benchmark settings: crossover applied to 90% of pairs, both distribution
/// indices 20, mutation probability one over the dimension.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Nsga2Config {
    pub population_size: usize,
    pub generations: u32,
    pub p_crossover: f64,
    pub eta_c: f64,
    pub eta_m: f64,
    pub p_mut: f64,
    pub seed: u64,
}

impl Nsga2Config {
    pub fn protocol_defaults(dimension: usize, generations: u32, seed: u64) -> Self {
        Self {
            population_size: 80,
            generations,
            p_crossover: 0.9,
            eta_c: 20.0,
            eta_m: 20.0,
            p_mut: 1.0 / dimension as f64,
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
        for (name, value) in [("p_crossover", self.p_crossover), ("p_mut", self.p_mut)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::InvalidParameter {
                    name,
                    message: format!("must lie in [0, 1], got {value}"),
                });
            }
        }
        Ok(())
    }
}

/// Binary tournament on (rank ascending, crowding descending); full ties are
/// settled by a coin flip so neither index is structurally favored.
fn tournament(
    rank: &[usize],
    crowding: &[f64],
    rng: &mut RngStream,
) -> usize {
    let a = rng.index(rank.len());
    let b = rng.index(rank.len());
    let coin = rng.uniform() < 0.5;
    if rank[a] != rank[b] {
        if rank[a] < rank[b] {
            a
        } else {
            b
        }
    } else if crowding[a] != crowding[b] {
        if crowding[a] > crowding[b] {
            a
        } else {
            b
        }
    } else if coin {
        a
    } else {
        b
    }
}

/// Full generational run; one record per generation including the initial
/// population.
pub fn nsga2_run(
    problem: &dyn Problem,
    config: &Nsga2Config,
    identity: &RunIdentity,
    indicators: &IndicatorContext,
    observer: &mut dyn FnMut(&RunRecord),
) -> Result<Vec<RunRecord>> {
    validate_problem(problem)?;
    config.validate()?;
    let n = config.population_size;
    let mut evals = EvalCounter::new();
    let mut tick = Instant::now();
    let mut population = initial_population(problem, n, config.seed, &mut evals)?;
    let mut records = Vec::with_capacity(config.generations as usize + 1);
    emit_record(
        &population,
        0,
        &evals,
        identity,
        indicators,
        tick,
        observer,
        &mut records,
    )?;

    // Mating selection draws (tournament indices and tie coins) come from
    // the baseline stream; the variation operators draw from the variation
    // stream, matching the other optimizers.
    let mut select_rng = RngStream::new(config.seed, StreamPurpose::Baseline);
    let mut vary_rng = RngStream::new(config.seed, StreamPurpose::Variation);

    for generation in 1..=config.generations {
        tick = Instant::now();
        let objs = population.objective_vectors();
        let sorted = non_dominated_sort(&objs)?;

        // Fill the mating pool with N tournament winners, then breed pairs.
        let pool: Vec<usize> = (0..n)
            .map(|_| tournament(&sorted.rank, &sorted.crowding, &mut select_rng))
            .collect();
        let mut offspring: Vec<Individual> = Vec::with_capacity(n);
        for pair in pool.chunks(2) {
            let (i, j) = (pair[0], pair[first_partner(pair)]);
            let p1 = &population.members[i].x;
            let p2 = &population.members[j].x;
            let (mut c1, mut c2) = if select_rng.uniform() < config.p_crossover {
                sbx_crossover(p1, p2, config.eta_c, &mut vary_rng)
            } else {
                (p1.clone(), p2.clone())
            };
            c1 = polynomial_mutation_bound_scaled(&c1, config.eta_m, config.p_mut, &mut vary_rng);
            c2 = polynomial_mutation_bound_scaled(&c2, config.eta_m, config.p_mut, &mut vary_rng);
            offspring.push(Individual::unevaluated(c1));
            if offspring.len() < n {
                offspring.push(Individual::unevaluated(c2));
            }
        }
        evaluate_batch(problem, &mut offspring, &mut evals)?;

        // Environmental selection over parents plus offspring.
        let union: Vec<Individual> = population
            .members
            .iter()
            .cloned()
            .chain(offspring)
            .collect();
        let union_objs: Vec<ObjectiveVector> =
            union.iter().map(|m| m.objectives().clone()).collect();
        let keep = select_best(&union_objs, n)?;
        population = Population::new(keep.iter().map(|&k| union[k].clone()).collect(), n);

        emit_record(
            &population,
            generation,
            &evals,
            identity,
            indicators,
            tick,
            observer,
            &mut records,
        )?;
    }
    Ok(records)
}

/// Index of the second parent within a pool chunk: the second entry when the
/// chunk has one (even N), the same entry for a trailing singleton (odd N,
/// self-pairing, crossover then degenerates to copying).
fn first_partner(pair: &[usize]) -> usize {
    if pair.len() > 1 {
        1
    } else {
        0
    }
}
