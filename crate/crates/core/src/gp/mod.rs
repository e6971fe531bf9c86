//! Per-objective Gaussian-process surrogate.
//!
//! Squared-exponential kernel with per-dimension length scales, a non-zero
//! prior mean taken from the data, and a pseudoinverse posterior built from
//! a truncated SVD of the kernel matrix. The model is deliberately
//! noise-free; duplicate training rows make K singular and the truncation
//! absorbs that instead of an explicit nugget.
//!
//! Length scales are refit every generation by maximizing the log marginal
//! likelihood with a bounded simplex search (see [`fit`] internals).

mod fit;

pub use fit::log_marginal_likelihood;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::types::DecisionVector;

/// Hard bounds on the signal standard deviation.
pub const SIGMA_F_MIN: f64 = 1e-6;
pub const SIGMA_F_MAX: f64 = 1e6;

/// Squared-exponential kernel hyper-parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    /// Signal standard deviation.
    pub sigma_f: f64,
    /// Per-dimension length scales (normalized decision space).
    pub lengths: Vec<f64>,
}

/// k(x, y) = sigma_f^2 * exp(-1/2 * sum_i ((x_i - y_i) / theta_i)^2).
pub fn kernel(x: &[f64], y: &[f64], params: &KernelParams) -> Result<f64> {
    if x.len() != params.lengths.len() || y.len() != params.lengths.len() {
        return Err(Error::DimensionMismatch {
            context: "kernel",
            expected: params.lengths.len(),
            got: if x.len() != params.lengths.len() {
                x.len()
            } else {
                y.len()
            },
        });
    }
    let mut dist = 0.0;
    for ((&a, &b), &theta) in x.iter().zip(y).zip(&params.lengths) {
        let d = (a - b) / theta;
        dist += d * d;
    }
    Ok(params.sigma_f * params.sigma_f * (-0.5 * dist).exp())
}

/// Settings for the hyper-parameter search.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GpFitOptions {
    /// Per-dimension length scales when true; one shared scale otherwise.
    pub ard: bool,
    /// Closed search interval for every length scale.
    pub length_bounds: (f64, f64),
    /// Isotropic starting guess for the simplex search.
    pub init_length: f64,
    /// Likelihood-evaluation budget per restart.
    pub max_evals_per_restart: usize,
    /// Number of simplex restarts (warm start, isotropic guess, then random
    /// draws, in that order).
    pub restarts: usize,
    /// Relative singular-value cutoff for the pseudoinverse.
    pub svd_truncation: f64,
}

impl Default for GpFitOptions {
    fn default() -> Self {
        Self {
            ard: true,
            length_bounds: (1e-3, 1e1),
            init_length: 0.3,
            max_evals_per_restart: 200,
            restarts: 3,
            svd_truncation: 1e-10,
        }
    }
}

/// Truncated-SVD factorization of the kernel matrix.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SvdFactor {
    u: DMatrix<f64>,
    singular: DVector<f64>,
    v_t: DMatrix<f64>,
    /// Absolute cutoff: singular values at or below this are treated as 0.
    tau: f64,
}

impl SvdFactor {
    fn new(k: DMatrix<f64>, relative_truncation: f64) -> Result<Self> {
        let svd = nalgebra::SVD::try_new(k, true, true, f64::EPSILON, 0)
            .ok_or_else(|| Error::GpFitFailed("SVD did not converge".to_string()))?;
        let singular = svd.singular_values;
        let max_s = singular.iter().cloned().fold(0.0, f64::max);
        Ok(Self {
            u: svd.u.expect("SVD computed with u"),
            v_t: svd.v_t.expect("SVD computed with v_t"),
            singular,
            tau: relative_truncation * max_s,
        })
    }

    /// Explicit pseudoinverse K+ = V * diag(1/s) * U^T with truncation.
    fn pseudoinverse(&self) -> DMatrix<f64> {
        let mut ut = self.u.transpose();
        for (i, mut row) in ut.row_iter_mut().enumerate() {
            let s = self.singular[i];
            let inv = if s > self.tau { 1.0 / s } else { 0.0 };
            row *= inv;
        }
        self.v_t.transpose() * ut
    }
}

/// A fitted Gaussian process for one objective.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GpModel {
    x_train: Vec<DecisionVector>,
    y: Vec<f64>,
    prior_mean: f64,
    params: KernelParams,
    factor: SvdFactor,
    alpha: DVector<f64>,
    #[serde(skip)]
    pinv: OnceLock<DMatrix<f64>>,
}

impl GpModel {
    /// Fits hyper-parameters by maximizing the log marginal likelihood, then
    /// factorizes the resulting kernel matrix.
    ///
    /// `warm_lengths`, when given, seeds the first simplex restart (the
    /// previous generation's optimum). The prior mean and signal deviation
    /// come directly from the targets: their mean and population standard
    /// deviation (floored at [`SIGMA_F_MIN`] for constant data).
    pub fn fit(
        x: &[DecisionVector],
        y: &[f64],
        opts: &GpFitOptions,
        warm_lengths: Option<&[f64]>,
        rng: &mut RngStream,
    ) -> Result<Self> {
        let (prior_mean, sigma_f) = data_statistics(x, y)?;
        let lengths = fit::optimize_lengths(x, y, prior_mean, sigma_f, opts, warm_lengths, rng)?;
        Self::assemble(
            x.to_vec(),
            y.to_vec(),
            prior_mean,
            KernelParams { sigma_f, lengths },
            opts.svd_truncation,
        )
    }

    /// Builds a model with fixed hyper-parameters (no likelihood search).
    /// The prior mean is still the target mean.
    pub fn fit_fixed(
        x: &[DecisionVector],
        y: &[f64],
        params: KernelParams,
        svd_truncation: f64,
    ) -> Result<Self> {
        let (prior_mean, _) = data_statistics(x, y)?;
        Self::assemble(x.to_vec(), y.to_vec(), prior_mean, params, svd_truncation)
    }

    fn assemble(
        x_train: Vec<DecisionVector>,
        y: Vec<f64>,
        prior_mean: f64,
        params: KernelParams,
        svd_truncation: f64,
    ) -> Result<Self> {
        let n = x_train.len();
        let mut k = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = kernel(&x_train[i], &x_train[j], &params)?;
                k[(i, j)] = v;
                k[(j, i)] = v;
            }
        }
        let factor = SvdFactor::new(k, svd_truncation)?;
        let residual = DVector::from_iterator(n, y.iter().map(|&v| v - prior_mean));
        let pinv_mat = factor.pseudoinverse();
        let alpha = &pinv_mat * residual;
        let pinv = OnceLock::new();
        let _ = pinv.set(pinv_mat);
        Ok(Self {
            x_train,
            y,
            prior_mean,
            params,
            factor,
            alpha,
            pinv,
        })
    }

    fn pinv(&self) -> &DMatrix<f64> {
        self.pinv.get_or_init(|| self.factor.pseudoinverse())
    }

    pub fn params(&self) -> &KernelParams {
        &self.params
    }

    pub fn prior_mean(&self) -> f64 {
        self.prior_mean
    }

    pub fn training_len(&self) -> usize {
        self.x_train.len()
    }

    /// Precomputed K+(y - prior_mean).
    pub fn alpha(&self) -> &[f64] {
        self.alpha.as_slice()
    }

    /// Posterior mean and standard deviation at one point.
    ///
    /// mean = k^T K+ (y - mean(y)) + mean(y); sigma^2 = k(x,x) - k^T K+ k,
    /// clamped at zero before the square root (truncation can push it
    /// slightly negative).
    pub fn predict(&self, x: &[f64]) -> Result<(f64, f64)> {
        if x.len() != self.params.lengths.len() {
            return Err(Error::DimensionMismatch {
                context: "gp predict",
                expected: self.params.lengths.len(),
                got: x.len(),
            });
        }
        let n = self.x_train.len();
        let k = DVector::from_iterator(
            n,
            self.x_train
                .iter()
                .map(|xi| kernel(xi, x, &self.params).expect("dimensions already checked")),
        );
        let mean = k.dot(&self.alpha) + self.prior_mean;
        let t = self.pinv() * &k;
        let var = (self.params.sigma_f * self.params.sigma_f - k.dot(&t)).max(0.0);
        Ok((mean, var.sqrt()))
    }

    /// Batched prediction. Delegates to the single-point path per input so
    /// batch and pointwise results are bit-identical; the kernel matrices
    /// here are ill-conditioned enough that mixing matrix-matrix and
    /// matrix-vector products would reorder sums and visibly perturb the
    /// variance, which must not depend on how callers group their queries.
    pub fn predict_batch(&self, xs: &[DecisionVector]) -> Result<Vec<(f64, f64)>> {
        xs.iter().map(|x| self.predict(x)).collect()
    }
}

/// Mean and clamped population standard deviation of the targets.
fn data_statistics(x: &[DecisionVector], y: &[f64]) -> Result<(f64, f64)> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::EmptySet {
            what: "GP training set".to_string(),
        });
    }
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            context: "gp fit targets",
            expected: x.len(),
            got: y.len(),
        });
    }
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    let var = y.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let sigma_f = var.sqrt().clamp(SIGMA_F_MIN, SIGMA_F_MAX);
    Ok((mean, sigma_f))
}

/// Lower confidence bound: mean - kappa * sigma.
pub fn lcb(mean: f64, sigma: f64, kappa: f64) -> f64 {
    mean - kappa * sigma
}

/// Geometric decay schedule for the LCB exploration weight.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KappaSchedule {
    pub initial: f64,
    pub rho: f64,
    pub current: f64,
}

impl KappaSchedule {
    pub fn new(initial: f64, rho: f64) -> Self {
        Self {
            initial,
            rho,
            current: initial,
        }
    }

    /// One generation's update: kappa <- rho * kappa.
    pub fn step(&mut self) {
        self.current *= self.rho;
    }
}
