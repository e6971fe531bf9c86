//! Hyper-parameter search for the Gaussian process.
//!
//! Only the length scales are searched; the prior mean and signal deviation
//! come from data statistics. The objective is the standard log marginal
//! likelihood, evaluated through a Cholesky factorization with an escalating
//! diagonal regularizer (duplicate training rows make the pure kernel matrix
//! singular; the final model handles that with SVD truncation instead, so
//! the regularizer here only needs to keep the search finite). The search
//! itself is a bounded Nelder-Mead simplex in log-length space, restarted
//! from the previous generation's optimum, an isotropic guess, and random
//! draws.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::types::DecisionVector;

use super::{kernel, GpFitOptions, KernelParams};

/// Relative diagonal regularizers tried in order during the search.
const JITTER_LADDER: [f64; 3] = [1e-10, 1e-8, 1e-6];

/// Convergence tolerance on the simplex objective spread.
const SIMPLEX_F_TOL: f64 = 1e-8;

/// Per-dimension squared coordinate differences for every unordered training
/// pair, laid out so one matrix-vector product yields all kernel exponents.
struct PairTable {
    n: usize,
    d2: DMatrix<f64>,
}

impl PairTable {
    fn new(x: &[DecisionVector]) -> Self {
        let n = x.len();
        let dim = x[0].len();
        let pairs = n * (n - 1) / 2;
        let mut d2 = DMatrix::zeros(pairs, dim);
        let mut row = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                for d in 0..dim {
                    let diff = x[i][d] - x[j][d];
                    d2[(row, d)] = diff * diff;
                }
                row += 1;
            }
        }
        Self { n, d2 }
    }

    /// Kernel matrix for weights w_d = 1 / theta_d^2.
    fn kernel_matrix(&self, sigma_f2: f64, weights: &DVector<f64>) -> DMatrix<f64> {
        let z = &self.d2 * weights;
        let mut k = DMatrix::from_element(self.n, self.n, sigma_f2);
        let mut row = 0;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let v = sigma_f2 * (-0.5 * z[row]).exp();
                k[(i, j)] = v;
                k[(j, i)] = v;
                row += 1;
            }
        }
        k
    }
}

/// Log marginal likelihood of the residual under N(0, K), via Cholesky with
/// the jitter ladder. `None` when K is numerically indefinite even at the
/// largest regularizer.
fn log_ml(k: &DMatrix<f64>, residual: &DVector<f64>, sigma_f2: f64) -> Option<f64> {
    let n = k.nrows();
    for &eps in &JITTER_LADDER {
        let mut kj = k.clone_owned();
        let bump = eps * sigma_f2;
        for i in 0..n {
            kj[(i, i)] += bump;
        }
        if let Some(chol) = Cholesky::new(kj) {
            let alpha = chol.solve(residual);
            let log_det_half: f64 = chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum();
            let ll = -0.5 * residual.dot(&alpha)
                - log_det_half
                - 0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln();
            if ll.is_finite() {
                return Some(ll);
            }
        }
    }
    None
}

/// Log marginal likelihood of targets `y` under the given hyper-parameters
/// (same regularized evaluation the fit uses, so fit results can be compared
/// against alternative parameter choices consistently).
pub fn log_marginal_likelihood(
    x: &[DecisionVector],
    y: &[f64],
    prior_mean: f64,
    params: &KernelParams,
) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::EmptySet {
            what: "GP training set".to_string(),
        });
    }
    let n = x.len();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = kernel(&x[i], &x[j], params)?;
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    let residual = DVector::from_iterator(n, y.iter().map(|&v| v - prior_mean));
    log_ml(&k, &residual, params.sigma_f * params.sigma_f).ok_or_else(|| {
        Error::GpFitFailed("kernel matrix indefinite at all regularizations".to_string())
    })
}

/// A restart's starting point in log-length space: a full per-dimension
/// vector (the previous generation's optimum) or a single shared scale (the
/// isotropic guess and random draws).
enum SearchStart {
    Full(Vec<f64>),
    Shared(f64),
}

/// Maximizes the log marginal likelihood over length scales within bounds.
/// Returns the best lengths found across all restarts (never worse than any
/// restart's starting point, since every evaluated vertex competes).
///
/// A restart that begins from a shared scale is staged: a one-dimensional
/// simplex first finds the best single scale, then the per-dimension search
/// continues from there on the remaining budget. This matters because a
/// simplex in `dim` dimensions spends `dim + 1` evaluations just assembling
/// its initial simplex and crawls toward a distant optimum one vertex at a
/// time; locating the right order of magnitude in the cheap shared subspace
/// first turns the expensive stage into local refinement. Without the
/// staging, the searched lengths barely leave the initial guess at realistic
/// budgets, the surrogate misses the global trend of the objectives, and
/// optimizer convergence degrades by an order of magnitude.
pub(super) fn optimize_lengths(
    x: &[DecisionVector],
    y: &[f64],
    prior_mean: f64,
    sigma_f: f64,
    opts: &GpFitOptions,
    warm_lengths: Option<&[f64]>,
    rng: &mut RngStream,
) -> Result<Vec<f64>> {
    let dim = x[0].len();
    let (lo, hi) = (opts.length_bounds.0.ln(), opts.length_bounds.1.ln());
    let table = PairTable::new(x);
    let residual = DVector::from_iterator(x.len(), y.iter().map(|&v| v - prior_mean));
    let sigma_f2 = sigma_f * sigma_f;

    let neg_ll = |weights: &DVector<f64>| -> f64 {
        let k = table.kernel_matrix(sigma_f2, weights);
        match log_ml(&k, &residual, sigma_f2) {
            Some(ll) => -ll,
            None => f64::INFINITY,
        }
    };
    let mut full_objective = |z: &[f64]| -> f64 {
        let weights = DVector::from_iterator(dim, z.iter().map(|v| (-2.0 * v).exp()));
        neg_ll(&weights)
    };
    let mut shared_objective = |z: &[f64]| -> f64 {
        let weights = DVector::from_element(dim, (-2.0 * z[0]).exp());
        neg_ll(&weights)
    };

    let mut starts: Vec<SearchStart> = Vec::new();
    if let Some(w) = warm_lengths {
        if opts.ard {
            starts.push(SearchStart::Full(
                w.iter().map(|t| t.ln().clamp(lo, hi)).collect(),
            ));
        } else {
            starts.push(SearchStart::Shared(w[0].ln().clamp(lo, hi)));
        }
    }
    starts.push(SearchStart::Shared(opts.init_length.ln().clamp(lo, hi)));
    let total = opts.restarts.max(1);
    while starts.len() < total {
        starts.push(SearchStart::Shared(rng.uniform_range(lo, hi)));
    }
    starts.truncate(total);

    let cap = opts.max_evals_per_restart.max(1);
    let mut best: Option<(Vec<f64>, f64)> = None;
    for start in &starts {
        let (z, f) = match start {
            SearchStart::Full(z0) => {
                let (z, f, _) = nelder_mead(&mut full_objective, z0, 0.5, (lo, hi), cap);
                (z, f)
            }
            SearchStart::Shared(s0) if !opts.ard => {
                let (z, f, _) = nelder_mead(&mut shared_objective, &[*s0], 0.5, (lo, hi), cap);
                (vec![z[0]; dim], f)
            }
            SearchStart::Shared(s0) => {
                // Stage 1: shared scale only. Stage 2: per-dimension
                // refinement from the staged optimum on what remains.
                let stage_budget = (cap / 4).clamp(1, 40);
                let (ziso, fiso, used) =
                    nelder_mead(&mut shared_objective, &[*s0], 0.5, (lo, hi), stage_budget);
                let remaining = cap - used;
                if remaining == 0 {
                    (vec![ziso[0]; dim], fiso)
                } else {
                    let z0 = vec![ziso[0]; dim];
                    let (z, f, _) =
                        nelder_mead(&mut full_objective, &z0, 0.5, (lo, hi), remaining);
                    if fiso < f {
                        (vec![ziso[0]; dim], fiso)
                    } else {
                        (z, f)
                    }
                }
            }
        };
        if best.as_ref().map_or(true, |(_, bf)| f < *bf) {
            best = Some((z, f));
        }
    }
    let (z, f) = best.expect("at least one restart");
    if !f.is_finite() {
        return Err(Error::GpFitFailed(
            "likelihood not finite at any searched length scale".to_string(),
        ));
    }
    Ok(z.iter().map(|v| v.exp()).collect())
}

/// Bounded Nelder-Mead minimization: vertices are projected into the box
/// before evaluation. Returns the best point ever evaluated (including the
/// start), its objective value, and the number of evaluations spent. Stops
/// on the evaluation budget or when the simplex objective spread collapses.
fn nelder_mead(
    f: &mut dyn FnMut(&[f64]) -> f64,
    x0: &[f64],
    init_step: f64,
    bounds: (f64, f64),
    max_evals: usize,
) -> (Vec<f64>, f64, usize) {
    let (lo, hi) = bounds;
    let d = x0.len();
    let project = |x: &mut Vec<f64>| {
        for v in x.iter_mut() {
            *v = v.clamp(lo, hi);
        }
    };

    let mut evals = 0usize;
    let mut best: (Vec<f64>, f64) = (x0.to_vec(), f64::INFINITY);
    let mut try_eval = |x: &Vec<f64>, evals: &mut usize, best: &mut (Vec<f64>, f64)| -> f64 {
        *evals += 1;
        let v = f(x);
        if v < best.1 {
            *best = (x.clone(), v);
        }
        v
    };

    // Initial simplex: x0 plus one step along each axis, flipped when the
    // step would leave the box.
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(d + 1);
    let mut v0 = x0.to_vec();
    project(&mut v0);
    let f0 = try_eval(&v0, &mut evals, &mut best);
    simplex.push((v0, f0));
    for i in 0..d {
        if evals >= max_evals {
            return (best.0, best.1, evals);
        }
        let mut v = x0.to_vec();
        v[i] = if v[i] + init_step <= hi {
            v[i] + init_step
        } else {
            v[i] - init_step
        };
        project(&mut v);
        let fv = try_eval(&v, &mut evals, &mut best);
        simplex.push((v, fv));
    }

    const ALPHA: f64 = 1.0; // reflection
    const GAMMA: f64 = 2.0; // expansion
    const RHO: f64 = 0.5; // contraction
    const SIGMA: f64 = 0.5; // shrink

    while evals < max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let f_best = simplex[0].1;
        let f_worst = simplex[d].1;
        if f_worst.is_finite() && (f_worst - f_best).abs() <= SIMPLEX_F_TOL * (1.0 + f_best.abs())
        {
            break;
        }

        let mut centroid = vec![0.0; d];
        for (v, _) in &simplex[..d] {
            for (c, &vi) in centroid.iter_mut().zip(v) {
                *c += vi;
            }
        }
        for c in centroid.iter_mut() {
            *c /= d as f64;
        }
        let worst = simplex[d].0.clone();

        let mut reflected: Vec<f64> = centroid
            .iter()
            .zip(&worst)
            .map(|(&c, &w)| c + ALPHA * (c - w))
            .collect();
        project(&mut reflected);
        let f_reflected = try_eval(&reflected, &mut evals, &mut best);

        if f_reflected < simplex[0].1 && evals < max_evals {
            let mut expanded: Vec<f64> = centroid
                .iter()
                .zip(&worst)
                .map(|(&c, &w)| c + GAMMA * (c - w))
                .collect();
            project(&mut expanded);
            let f_expanded = try_eval(&expanded, &mut evals, &mut best);
            simplex[d] = if f_expanded < f_reflected {
                (expanded, f_expanded)
            } else {
                (reflected, f_reflected)
            };
        } else if f_reflected < simplex[d - 1].1 {
            simplex[d] = (reflected, f_reflected);
        } else {
            if evals >= max_evals {
                break;
            }
            let outside = f_reflected < simplex[d].1;
            let toward = if outside { &reflected } else { &worst };
            let mut contracted: Vec<f64> = centroid
                .iter()
                .zip(toward)
                .map(|(&c, &t)| c + RHO * (t - c))
                .collect();
            project(&mut contracted);
            let f_contracted = try_eval(&contracted, &mut evals, &mut best);
            let accept = if outside {
                f_contracted <= f_reflected
            } else {
                f_contracted < simplex[d].1
            };
            if accept {
                simplex[d] = (contracted, f_contracted);
            } else {
                // Shrink toward the best vertex.
                let anchor = simplex[0].0.clone();
                for vertex in simplex.iter_mut().skip(1) {
                    if evals >= max_evals {
                        return (best.0, best.1, evals);
                    }
                    let mut v: Vec<f64> = anchor
                        .iter()
                        .zip(&vertex.0)
                        .map(|(&a, &b)| a + SIGMA * (b - a))
                        .collect();
                    project(&mut v);
                    let fv = try_eval(&v, &mut evals, &mut best);
                    *vertex = (v, fv);
                }
            }
        }
    }
    (best.0, best.1, evals)
}
