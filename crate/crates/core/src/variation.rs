//! Simulated binary crossover, bounded polynomial mutation, and the batch
//! candidate generator.
//!
//! All operators work in the normalized unit box and clip their outputs to
//! it. Draw order is part of the contract: identical RNG state yields an
//! identical candidate batch, which the checkpoint/resume machinery relies
//! on.

use serde::{Deserialize, Serialize};

use crate::rng::RngStream;
use crate::types::{DecisionVector, Population};

/// Two parent coordinates closer than this are treated as identical and
/// copied through crossover unchanged.
const SBX_EPS: f64 = 1e-14;

/// Operator settings for one optimizer configuration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariationParams {
    /// SBX distribution index.
    pub eta_c: f64,
    /// Polynomial-mutation distribution index.
    pub eta_m: f64,
    /// Mutants generated per parent.
    pub m1: usize,
    /// Crossover children generated per parent.
    pub m2: usize,
    /// Per-variable mutation probability.
    pub p_mut: f64,
}

impl VariationParams {
    /// The benchmark protocol settings: both indices 20, twenty mutants and
    /// twenty children per parent, mutation probability 0.3 per variable.
    ///
    /// The mutation probability was chosen by a sensitivity sweep on the
    /// benchmark suite (0.033, 0.1, 0.2, 0.3, 0.5, 0.7, 1.0): with
    /// surrogate screening in the loop, the candidate pool benefits from far
    /// more mutation than a plain evolutionary algorithm would tolerate,
    /// because the screens discard mutants predicted to be poor before any
    /// true evaluation is spent. The conventional 1/dimension rate starves
    /// boundary-seeking transport, while 0.3 sat at or near the optimum for
    /// every suite problem. Baseline algorithms that evaluate every mutant
    /// keep their own 1/dimension rate.
    pub fn protocol_defaults(_dimension: usize) -> Self {
        Self {
            eta_c: 20.0,
            eta_m: 20.0,
            m1: 20,
            m2: 20,
            p_mut: 0.3,
        }
    }
}

/// Draws one spread factor from the SBX distribution with index `eta_c`:
/// density 0.5(η+1)β^η on [0,1] and 0.5(η+1)β^(−η−2) above 1, so the median
/// is exactly 1 and large spreads are rare for large η.
fn sbx_spread(eta_c: f64, rng: &mut RngStream) -> f64 {
    let u = rng.uniform();
    let exponent = 1.0 / (eta_c + 1.0);
    if u <= 0.5 {
        (2.0 * u).powf(exponent)
    } else {
        (1.0 / (2.0 * (1.0 - u))).powf(exponent)
    }
}

/// Simulated binary crossover of two unit-box parents.
///
/// Each variable participates with probability 0.5; a participating pair is
/// replaced by the symmetric pair mean ± β/2·(difference), which preserves
/// the per-variable midpoint before clipping. The two results are then
/// assigned to the children in random order per variable, so each child is
/// a mosaic of both parents rather than a blend biased toward one of them.
/// That per-variable shuffle is what makes the operator recombine: without
/// it, a child inherits the same side of every variable and crossover
/// degenerates into cloning with noise, which visibly stalls convergence.
pub fn sbx_crossover(
    p1: &DecisionVector,
    p2: &DecisionVector,
    eta_c: f64,
    rng: &mut RngStream,
) -> (DecisionVector, DecisionVector) {
    let mut c1 = Vec::with_capacity(p1.len());
    let mut c2 = Vec::with_capacity(p2.len());
    for (&a, &b) in p1.iter().zip(p2.iter()) {
        let apply = rng.uniform() < 0.5;
        if !apply || (a - b).abs() <= SBX_EPS {
            c1.push(a);
            c2.push(b);
            continue;
        }
        let beta = sbx_spread(eta_c, rng);
        let mean = 0.5 * (a + b);
        let half_spread = 0.5 * beta * (b - a);
        let lower = (mean - half_spread).clamp(0.0, 1.0);
        let upper = (mean + half_spread).clamp(0.0, 1.0);
        if rng.uniform() < 0.5 {
            c1.push(upper);
            c2.push(lower);
        } else {
            c1.push(lower);
            c2.push(upper);
        }
    }
    (DecisionVector(c1), DecisionVector(c2))
}

/// Bounded polynomial mutation of a unit-box point.
///
/// Each variable mutates independently with probability `p_mut`. The
/// perturbation is drawn from the symmetric polynomial density with index
/// `eta_m` over the full unit range and the result is clipped into the box.
/// Clipping piles probability mass onto the bounds: a variable sitting near
/// a bound lands exactly on it for roughly half of its draws. That
/// bound-snapping behavior is load-bearing for problems whose optima lie on
/// the boundary of the box, where a mutation scheme that keeps points
/// strictly interior grinds out the last distance to the bound in ever
/// smaller steps instead of just reaching it.
pub fn polynomial_mutation(
    x: &DecisionVector,
    eta_m: f64,
    p_mut: f64,
    rng: &mut RngStream,
) -> DecisionVector {
    let exponent = 1.0 / (eta_m + 1.0);
    let mut y = Vec::with_capacity(x.len());
    for &v in x.iter() {
        if rng.uniform() >= p_mut {
            y.push(v);
            continue;
        }
        let u = rng.uniform();
        let delta = if u < 0.5 {
            (2.0 * u).powf(exponent) - 1.0
        } else {
            1.0 - (2.0 * (1.0 - u)).powf(exponent)
        };
        y.push((v + delta).clamp(0.0, 1.0));
    }
    DecisionVector(y)
}

/// Polynomial mutation variant that rescales each perturbation by the
/// distance to the bound it moves toward, so outputs stay strictly interior
/// (the final clip never fires) and no mass accumulates on the bounds.
///
/// This is the flavor found in the common NSGA-II operator stacks, and the
/// NSGA-II baseline here uses it so its behavior matches those references.
/// It is deliberately not shared with the surrogate-guided optimizer: on
/// boundary-optimal problems the interior-preserving property costs real
/// convergence (see [`polynomial_mutation`]).
pub fn polynomial_mutation_bound_scaled(
    x: &DecisionVector,
    eta_m: f64,
    p_mut: f64,
    rng: &mut RngStream,
) -> DecisionVector {
    let exponent = 1.0 / (eta_m + 1.0);
    let mut y = Vec::with_capacity(x.len());
    for &v in x.iter() {
        if rng.uniform() >= p_mut {
            y.push(v);
            continue;
        }
        let u = rng.uniform();
        let delta = if u < 0.5 {
            let gap = 1.0 - v;
            let val = 2.0 * u + (1.0 - 2.0 * u) * gap.powf(eta_m + 1.0);
            val.powf(exponent) - 1.0
        } else {
            let gap = v;
            let val = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * gap.powf(eta_m + 1.0);
            1.0 - val.powf(exponent)
        };
        y.push((v + delta).clamp(0.0, 1.0));
    }
    DecisionVector(y)
}

/// Produces the generation's candidate pool: for every parent, `m1`
/// polynomial mutants of that parent followed by `m2` SBX children against
/// uniformly drawn partners (one child kept per crossover, chosen by coin).
/// Output length is exactly `(m1 + m2) * parents.len()`.
pub fn generate_candidates(
    parents: &Population,
    params: &VariationParams,
    rng: &mut RngStream,
) -> Vec<DecisionVector> {
    let n = parents.len();
    let mut out = Vec::with_capacity((params.m1 + params.m2) * n);
    for parent in &parents.members {
        for _ in 0..params.m1 {
            out.push(polynomial_mutation(
                &parent.x,
                params.eta_m,
                params.p_mut,
                rng,
            ));
        }
        for _ in 0..params.m2 {
            let partner = &parents.members[rng.index(n)].x;
            let (c1, c2) = sbx_crossover(&parent.x, partner, params.eta_c, rng);
            let keep_second = rng.uniform() < 0.5;
            out.push(if keep_second { c2 } else { c1 });
        }
    }
    out
}
