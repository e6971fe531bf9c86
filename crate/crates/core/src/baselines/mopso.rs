//! Multi-objective particle swarm: inertial velocity updates attracted
//! toward personal bests and archive leaders, with polynomial mutation as a
//! turbulence operator and a crowding-truncated non-dominated archive.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{evaluate_batch, validate_problem, Problem};
use crate::record::{IndicatorContext, RunIdentity, RunRecord};
use crate::rng::{RngStream, StreamPurpose};
use crate::selection::{dominates, non_dominated_sort, select_best};
use crate::types::{DecisionVector, EvalCounter, Individual, ObjectiveVector, Population};
use crate::variation::polynomial_mutation;

use super::{emit_record, initial_population};

/// Benchmark settings: inertia 0.4, both attraction weights 1, mutation
/// probability one over the dimension, archive as large as the swarm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MopsoConfig {
    pub population_size: usize,
    pub generations: u32,
    /// Inertia weight on the previous velocity.
    pub w: f64,
    /// Attraction weight toward the personal best.
    pub r1: f64,
    /// Attraction weight toward the archive leader.
    pub r2: f64,
    pub p_mut: f64,
    /// Polynomial-mutation distribution index.
    pub eta_m: f64,
    /// Per-dimension speed limit in the unit box.
    pub v_max: f64,
    pub archive_capacity: usize,
    pub seed: u64,
}

impl MopsoConfig {
    pub fn protocol_defaults(dimension: usize, generations: u32, seed: u64) -> Self {
        Self {
            population_size: 80,
            generations,
            w: 0.4,
            r1: 1.0,
            r2: 1.0,
            p_mut: 1.0 / dimension as f64,
            eta_m: 20.0,
            v_max: 0.5,
            archive_capacity: 80,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.population_size < 1 {
            return Err(Error::InvalidParameter {
                name: "population_size",
                message: "must be at least 1".to_string(),
            });
        }
        if !(0.0..1.0).contains(&self.w) {
            return Err(Error::InvalidParameter {
                name: "w",
                message: format!("inertia must lie in [0, 1), got {}", self.w),
            });
        }
        if !(0.0..=1.0).contains(&self.p_mut) {
            return Err(Error::InvalidParameter {
                name: "p_mut",
                message: format!("must lie in [0, 1], got {}", self.p_mut),
            });
        }
        if self.archive_capacity < 1 {
            return Err(Error::InvalidParameter {
                name: "archive_capacity",
                message: "must be at least 1".to_string(),
            });
        }
        if !(self.v_max > 0.0) {
            return Err(Error::InvalidParameter {
                name: "v_max",
                message: format!("must be positive, got {}", self.v_max),
            });
        }
        Ok(())
    }
}

/// One swarm member: current (evaluated) position, velocity, personal best.
struct Particle {
    position: Individual,
    velocity: Vec<f64>,
    pbest: Individual,
}

/// Non-dominated subset of `candidates`, crowding-truncated to `capacity`.
fn rebuild_archive(candidates: &[Individual], capacity: usize) -> Result<Vec<Individual>> {
    let objs: Vec<ObjectiveVector> = candidates.iter().map(|m| m.objectives().clone()).collect();
    let sorted = non_dominated_sort(&objs)?;
    let front: Vec<usize> = sorted.fronts[0].clone();
    if front.len() <= capacity {
        return Ok(front.iter().map(|&i| candidates[i].clone()).collect());
    }
    let front_objs: Vec<ObjectiveVector> = front.iter().map(|&i| objs[i].clone()).collect();
    let keep = select_best(&front_objs, capacity)?;
    Ok(keep.iter().map(|&k| candidates[front[k]].clone()).collect())
}

/// Indices of the least-crowded half of a mutually non-dominated archive
/// (ties broken by position), from which leaders are drawn.
fn leader_pool(archive: &[Individual]) -> Result<Vec<usize>> {
    let objs: Vec<ObjectiveVector> = archive.iter().map(|m| m.objectives().clone()).collect();
    let sorted = non_dominated_sort(&objs)?;
    let mut order: Vec<usize> = (0..archive.len()).collect();
    order.sort_by(|&a, &b| {
        sorted.crowding[b]
            .total_cmp(&sorted.crowding[a])
            .then(a.cmp(&b))
    });
    order.truncate(archive.len().div_ceil(2));
    Ok(order)
}

/// Full swarm run; one record per generation including the initial swarm.
/// Indicators are computed on the swarm's own non-dominated front, not on
/// the archive, so the comparison with other algorithms is uniform.
pub fn mopso_run(
    problem: &dyn Problem,
    config: &MopsoConfig,
    identity: &RunIdentity,
    indicators: &IndicatorContext,
    observer: &mut dyn FnMut(&RunRecord),
) -> Result<Vec<RunRecord>> {
    validate_problem(problem)?;
    config.validate()?;
    let n = config.population_size;
    let dim = problem.dimension();
    let mut evals = EvalCounter::new();
    let mut tick = Instant::now();
    let population = initial_population(problem, n, config.seed, &mut evals)?;
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

    let mut particles: Vec<Particle> = population
        .members
        .iter()
        .map(|m| Particle {
            position: m.clone(),
            velocity: vec![0.0; dim],
            pbest: m.clone(),
        })
        .collect();
    let mut archive = rebuild_archive(&population.members, config.archive_capacity)?;

    // Leader choices and attraction draws come from the baseline stream;
    // the mutation operator draws from the variation stream.
    let mut swarm_rng = RngStream::new(config.seed, StreamPurpose::Baseline);
    let mut vary_rng = RngStream::new(config.seed, StreamPurpose::Variation);

    for generation in 1..=config.generations {
        tick = Instant::now();
        let leaders = leader_pool(&archive)?;

        // Move every particle, then evaluate the new positions as one batch.
        let mut moved: Vec<Individual> = Vec::with_capacity(n);
        for particle in &mut particles {
            let gbest = &archive[leaders[swarm_rng.index(leaders.len())]];
            let x = &particle.position.x;
            let mut new_x = Vec::with_capacity(dim);
            for d in 0..dim {
                let u1 = swarm_rng.uniform();
                let u2 = swarm_rng.uniform();
                let v = config.w * particle.velocity[d]
                    + config.r1 * u1 * (particle.pbest.x[d] - x[d])
                    + config.r2 * u2 * (gbest.x[d] - x[d]);
                let v = v.clamp(-config.v_max, config.v_max);
                particle.velocity[d] = v;
                new_x.push((x[d] + v).clamp(0.0, 1.0));
            }
            let mutated = polynomial_mutation(
                &DecisionVector(new_x),
                config.eta_m,
                config.p_mut,
                &mut vary_rng,
            );
            moved.push(Individual::unevaluated(mutated));
        }
        evaluate_batch(problem, &mut moved, &mut evals)?;

        // Personal bests move only on strict dominance; incomparable or
        // equal outcomes keep the incumbent.
        for (particle, new_position) in particles.iter_mut().zip(moved) {
            if dominates(new_position.objectives(), particle.pbest.objectives())? {
                particle.pbest = new_position.clone();
            }
            particle.position = new_position;
        }

        let mut pool: Vec<Individual> = archive;
        pool.extend(particles.iter().map(|p| p.position.clone()));
        archive = rebuild_archive(&pool, config.archive_capacity)?;

        let current = Population::new(
            particles.iter().map(|p| p.position.clone()).collect(),
            n,
        );
        emit_record(
            &current,
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
