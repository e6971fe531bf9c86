//! Multi-generation Gaussian-process optimization for multi-objective
//! problems, with evolutionary baselines and benchmark instrumentation.
//!
//! The crate is organized around a small set of contracts:
//!
//! * [`problem::Problem`] describes a box-constrained multi-objective
//!   function; implementations live in [`problems`].
//! * [`selection`] provides non-dominated sorting, crowding distance, and
//!   truncation selection shared by every algorithm here.
//! * [`variation`] provides simulated binary crossover and polynomial
//!   mutation.
//! * [`gp`] fits per-objective Gaussian-process surrogates and scores
//!   candidates with a lower confidence bound.
//! * [`mggpo`] runs the surrogate-assisted generational loop.
//! * [`baselines`] contains NSGA-II and MOPSO reference implementations.
//! * [`metrics`] computes hypervolume, inverted generational distance, and
//!   rank-sum comparisons.
//!
//! All randomness flows through [`rng::RngStream`], so every run is fully
//! reproducible from a single seed and can be checkpointed and resumed
//! bit-exactly.

pub mod baselines;
pub mod error;
pub mod gp;
pub mod metrics;
pub mod mggpo;
pub mod problem;
pub mod problems;
pub mod record;
pub mod rng;
pub mod selection;
pub mod types;
pub mod variation;

pub use error::{Error, Result};
