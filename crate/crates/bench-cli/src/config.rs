//! Experiment configuration: a single JSON file with explicit keys for
//! every protocol setting, validated with field-level messages. The file is
//! the provenance record of an experiment, so unknown keys are rejected and
//! nothing is silently defaulted away from the benchmark protocol values.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use mggpo::baselines::{MopsoConfig, Nsga2Config};
use mggpo::error::{Error, Result};
use mggpo::mggpo::{MggpoConfig, ScoringMode};
use mggpo::problems::problem_by_name;
use mggpo::record::SCHEMA_VERSION;

/// Algorithm selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlgoId {
    Mggpo,
    Nsga2,
    Mopso,
}

impl AlgoId {
    pub fn as_str(&self) -> &'static str {
        match self {
            AlgoId::Mggpo => "mggpo",
            AlgoId::Nsga2 => "nsga2",
            AlgoId::Mopso => "mopso",
        }
    }
}

/// Optional per-algorithm parameter overrides. Every field applies to a
/// specific algorithm (a few are shared); setting a field that the chosen
/// algorithm does not use is a configuration error, not a silent no-op.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AlgoParams {
    // Candidate generation (surrogate-assisted optimizer).
    pub m1: Option<usize>,
    pub m2: Option<usize>,
    pub kappa_initial: Option<f64>,
    pub kappa_rho: Option<f64>,
    // Model-fit options (surrogate-assisted optimizer).
    pub gp_ard: Option<bool>,
    pub gp_length_bounds: Option<[f64; 2]>,
    pub gp_init_length: Option<f64>,
    pub gp_max_evals_per_restart: Option<usize>,
    pub gp_restarts: Option<usize>,
    pub gp_svd_truncation: Option<f64>,
    // Variation operators (shared where meaningful).
    pub eta_c: Option<f64>,
    pub eta_m: Option<f64>,
    pub p_mut: Option<f64>,
    pub p_crossover: Option<f64>,
    // Swarm parameters.
    pub w: Option<f64>,
    pub r1: Option<f64>,
    pub r2: Option<f64>,
    pub v_max: Option<f64>,
    pub archive_capacity: Option<usize>,
}

fn default_repeats() -> usize {
    10
}

fn default_reference_point() -> [f64; 2] {
    [1.0, 1.0]
}

fn default_front_resolution() -> usize {
    1000
}

/// One experiment: an algorithm on a problem instance, repeated over
/// consecutive seeds with a fixed evaluation budget.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub problem: String,
    pub dimension: usize,
    pub algo: AlgoId,
    pub population_size: usize,
    /// Total true evaluations, including the initial population.
    pub budget: u64,
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    /// Seed of the first repeat; repeat k uses base_seed + k.
    pub base_seed: u64,
    /// Evaluation counts at which the summary samples each run (a
    /// checkpoint reads the last generation with eval_count at or below it).
    pub checkpoints: Vec<u64>,
    #[serde(default = "default_reference_point")]
    pub reference_point: [f64; 2],
    /// Resolution of the analytic reference front used for IGD.
    #[serde(default = "default_front_resolution")]
    pub front_resolution: usize,
    /// Output directory; the run subcommand's --out flag takes precedence.
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub params: AlgoParams,
}

impl ExperimentConfig {
    /// Number of generations after initialization implied by the budget.
    pub fn generations(&self) -> u32 {
        (self.budget / self.population_size as u64 - 1) as u32
    }

    pub fn run_id(&self, seed: u64) -> String {
        format!(
            "{}-{}-p{:03}-s{:05}",
            self.algo.as_str(),
            self.problem.to_ascii_lowercase(),
            self.dimension,
            seed
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::SchemaMismatch {
                found: self.schema_version,
                supported: SCHEMA_VERSION,
            });
        }
        // Also checks that the dimension is valid for the problem family.
        problem_by_name(&self.problem, self.dimension)?;
        if self.population_size < 2 {
            return Err(Error::InvalidParameter {
                name: "population_size",
                message: format!("must be at least 2, got {}", self.population_size),
            });
        }
        let n = self.population_size as u64;
        if self.budget < n || (self.budget - n) % n != 0 {
            return Err(Error::InvalidParameter {
                name: "budget",
                message: format!(
                    "budget {} must be the initial population plus a whole number of \
                     generations of {} evaluations",
                    self.budget, n
                ),
            });
        }
        if self.repeats < 1 {
            return Err(Error::InvalidParameter {
                name: "repeats",
                message: "must be at least 1".to_string(),
            });
        }
        if self.checkpoints.is_empty() {
            return Err(Error::InvalidParameter {
                name: "checkpoints",
                message: "at least one evaluation checkpoint is required".to_string(),
            });
        }
        for pair in self.checkpoints.windows(2) {
            if pair[1] <= pair[0] {
                return Err(Error::InvalidParameter {
                    name: "checkpoints",
                    message: format!(
                        "must be strictly increasing, got {} after {}",
                        pair[1], pair[0]
                    ),
                });
            }
        }
        if self.checkpoints[0] < n {
            return Err(Error::InvalidParameter {
                name: "checkpoints",
                message: format!(
                    "first checkpoint {} precedes the initial population of {}",
                    self.checkpoints[0], n
                ),
            });
        }
        if !self.reference_point.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "reference_point",
                message: "components must be finite".to_string(),
            });
        }
        self.check_param_applicability()?;
        // Surface bad parameter values now, as configuration errors, rather
        // than at the first run. Every repeat shares the same parameters.
        match self.algo {
            AlgoId::Mggpo => self.mggpo_config(self.base_seed).validate()?,
            AlgoId::Nsga2 => self.nsga2_config(self.base_seed).validate()?,
            AlgoId::Mopso => self.mopso_config(self.base_seed).validate()?,
        }
        Ok(())
    }

    /// Rejects overrides that the selected algorithm would never read.
    fn check_param_applicability(&self) -> Result<()> {
        const MGGPO: usize = 0;
        const NSGA2: usize = 1;
        const MOPSO: usize = 2;
        let p = &self.params;
        let fields: [(&'static str, bool, [bool; 3]); 19] = [
            ("m1", p.m1.is_some(), [true, false, false]),
            ("m2", p.m2.is_some(), [true, false, false]),
            ("kappa_initial", p.kappa_initial.is_some(), [true, false, false]),
            ("kappa_rho", p.kappa_rho.is_some(), [true, false, false]),
            ("gp_ard", p.gp_ard.is_some(), [true, false, false]),
            ("gp_length_bounds", p.gp_length_bounds.is_some(), [true, false, false]),
            ("gp_init_length", p.gp_init_length.is_some(), [true, false, false]),
            (
                "gp_max_evals_per_restart",
                p.gp_max_evals_per_restart.is_some(),
                [true, false, false],
            ),
            ("gp_restarts", p.gp_restarts.is_some(), [true, false, false]),
            (
                "gp_svd_truncation",
                p.gp_svd_truncation.is_some(),
                [true, false, false],
            ),
            ("eta_c", p.eta_c.is_some(), [true, true, false]),
            ("eta_m", p.eta_m.is_some(), [true, true, true]),
            ("p_mut", p.p_mut.is_some(), [true, true, true]),
            ("p_crossover", p.p_crossover.is_some(), [false, true, false]),
            ("w", p.w.is_some(), [false, false, true]),
            ("r1", p.r1.is_some(), [false, false, true]),
            ("r2", p.r2.is_some(), [false, false, true]),
            ("v_max", p.v_max.is_some(), [false, false, true]),
            (
                "archive_capacity",
                p.archive_capacity.is_some(),
                [false, false, true],
            ),
        ];
        let algo_index = match self.algo {
            AlgoId::Mggpo => MGGPO,
            AlgoId::Nsga2 => NSGA2,
            AlgoId::Mopso => MOPSO,
        };
        for (name, set, applicable) in fields {
            if set && !applicable[algo_index] {
                return Err(Error::InvalidParameter {
                    name,
                    message: format!("does not apply to algorithm {}", self.algo.as_str()),
                });
            }
        }
        Ok(())
    }

    pub fn mggpo_config(&self, seed: u64) -> MggpoConfig {
        let mut c = MggpoConfig::protocol_defaults(self.dimension, self.generations(), seed);
        c.population_size = self.population_size;
        c.scoring = ScoringMode::GpLcb;
        let p = &self.params;
        if let Some(v) = p.m1 {
            c.variation.m1 = v;
        }
        if let Some(v) = p.m2 {
            c.variation.m2 = v;
        }
        if let Some(v) = p.eta_c {
            c.variation.eta_c = v;
        }
        if let Some(v) = p.eta_m {
            c.variation.eta_m = v;
        }
        if let Some(v) = p.p_mut {
            c.variation.p_mut = v;
        }
        if let Some(v) = p.kappa_initial {
            c.kappa_initial = v;
        }
        if let Some(v) = p.kappa_rho {
            c.kappa_rho = v;
        }
        if let Some(v) = p.gp_ard {
            c.gp.ard = v;
        }
        if let Some([lo, hi]) = p.gp_length_bounds {
            c.gp.length_bounds = (lo, hi);
        }
        if let Some(v) = p.gp_init_length {
            c.gp.init_length = v;
        }
        if let Some(v) = p.gp_max_evals_per_restart {
            c.gp.max_evals_per_restart = v;
        }
        if let Some(v) = p.gp_restarts {
            c.gp.restarts = v;
        }
        if let Some(v) = p.gp_svd_truncation {
            c.gp.svd_truncation = v;
        }
        c
    }

    pub fn nsga2_config(&self, seed: u64) -> Nsga2Config {
        let mut c = Nsga2Config::protocol_defaults(self.dimension, self.generations(), seed);
        c.population_size = self.population_size;
        let p = &self.params;
        if let Some(v) = p.p_crossover {
            c.p_crossover = v;
        }
        if let Some(v) = p.eta_c {
            c.eta_c = v;
        }
        if let Some(v) = p.eta_m {
            c.eta_m = v;
        }
        if let Some(v) = p.p_mut {
            c.p_mut = v;
        }
        c
    }

    pub fn mopso_config(&self, seed: u64) -> MopsoConfig {
        let mut c = MopsoConfig::protocol_defaults(self.dimension, self.generations(), seed);
        c.population_size = self.population_size;
        c.archive_capacity = self.population_size;
        let p = &self.params;
        if let Some(v) = p.w {
            c.w = v;
        }
        if let Some(v) = p.r1 {
            c.r1 = v;
        }
        if let Some(v) = p.r2 {
            c.r2 = v;
        }
        if let Some(v) = p.v_max {
            c.v_max = v;
        }
        if let Some(v) = p.eta_m {
            c.eta_m = v;
        }
        if let Some(v) = p.p_mut {
            c.p_mut = v;
        }
        if let Some(v) = p.archive_capacity {
            c.archive_capacity = v;
        }
        c
    }
}

/// Reads and validates a configuration file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let config: ExperimentConfig =
        serde_json::from_str(&text).map_err(|source| Error::Format {
            path: path.display().to_string(),
            source,
        })?;
    config.validate()?;
    Ok(config)
}
