//! Accelerated proximal-gradient minimization of
//! `(lambda / 2) * ksup_norm(beta, k)^2 + loss(beta, X, y)`.
//!
//! Fixed step `1 / L` with the per-loss Lipschitz constant, momentum
//! coefficient `(t - 1) / (t + 2)`, cold start at zero, and a relative
//! objective-change stopping rule. The method is not monotone, so the
//! returned coefficients are the best iterate visited rather than the last.

use ndarray::{Array1, ArrayView1, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::losses::{lipschitz_constant, loss_gradient, loss_value, LossSpec};
use crate::norms::{ksup_norm, prox_ksup_sq};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub max_iter: usize,
    /// Relative objective-change tolerance.
    pub tol: f64,
    /// Replaces the per-loss Lipschitz constant when set; mainly an escape
    /// hatch for the exponential loss, whose constant is heuristic.
    pub lipschitz_override: Option<f64>,
    pub record_trace: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iter: 10_000,
            tol: 1e-8,
            lipschitz_override: None,
            record_trace: false,
        }
    }
}

impl SolverConfig {
    fn validate(&self) -> Result<()> {
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be at least 1".into()));
        }
        if self.tol <= 0.0 || !self.tol.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "tol must be positive and finite, got {}",
                self.tol
            )));
        }
        if let Some(l) = self.lipschitz_override {
            if l <= 0.0 || !l.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "lipschitz_override must be positive and finite, got {l}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    /// Iterate with the lowest recorded objective.
    pub beta: Array1<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective value after each iteration, when recording was requested.
    pub trace: Option<Vec<f64>>,
}

/// Power-iteration estimate of the largest eigenvalue of `X^T X`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralEstimate {
    pub gamma: f64,
    /// False when the iteration budget ran out; `gamma` is then the best
    /// estimate so far.
    pub converged: bool,
}

/// Largest eigenvalue of `X^T X` by power iteration, applied as `X` then
/// `X^T` so the `d x d` product is never formed.
///
/// Starts from the all-ones direction; if that maps to zero (it sits in the
/// null space) the start is re-randomized once from a fixed seed, and a
/// second collapse means the matrix itself is zero.
pub fn spectral_norm_sq(x: ArrayView2<'_, f64>, tol: f64, max_iter: usize) -> SpectralEstimate {
    let d = x.ncols();
    if d == 0 || x.nrows() == 0 {
        return SpectralEstimate { gamma: 0.0, converged: true };
    }
    let mut u = Array1::from_elem(d, 1.0 / (d as f64).sqrt());
    let mut gamma = {
        let xu = x.dot(&u);
        xu.dot(&xu)
    };
    let mut rerandomized = false;
    for _ in 0..max_iter {
        let v = x.t().dot(&x.dot(&u));
        let norm = v.dot(&v).sqrt();
        if norm <= 1e-300 {
            if rerandomized {
                return SpectralEstimate { gamma: 0.0, converged: true };
            }
            let mut rng = ChaCha8Rng::seed_from_u64(0x9e3779b97f4a7c15);
            u = Array1::from_iter((0..d).map(|_| rng.sample::<f64, _>(StandardNormal)));
            let n = u.dot(&u).sqrt();
            u.mapv_inplace(|t| t / n);
            gamma = {
                let xu = x.dot(&u);
                xu.dot(&xu)
            };
            rerandomized = true;
            continue;
        }
        u = v / norm;
        let xu = x.dot(&u);
        let next = xu.dot(&xu);
        let done = (next - gamma).abs() <= tol * next.abs().max(1e-300);
        gamma = next;
        if done {
            return SpectralEstimate { gamma, converged: true };
        }
    }
    SpectralEstimate { gamma, converged: false }
}

/// The composite objective `(lambda / 2) * ksup_norm(beta, k)^2 + loss`.
pub fn objective(
    beta: ArrayView1<'_, f64>,
    data: &Dataset,
    spec: &LossSpec,
    k: usize,
    lambda: f64,
) -> Result<f64> {
    let norm = ksup_norm(beta, k)?;
    let loss = loss_value(spec, beta, data.x(), data.y())?;
    Ok(0.5 * lambda * norm * norm + loss)
}

/// Minimize the regularized empirical risk.
///
/// Each iteration takes a gradient step at the momentum point, applies the
/// squared-norm prox with weight `lambda / L`, and stops when the objective
/// change falls below `tol` relative or the iteration cap is reached. A
/// non-finite objective (the exponential loss past its overflow guard)
/// aborts with [`Error::Diverged`] carrying the iterate.
pub fn fit(
    data: &Dataset,
    spec: &LossSpec,
    k: usize,
    lambda: f64,
    cfg: &SolverConfig,
) -> Result<FitResult> {
    cfg.validate()?;
    let d = data.d();
    if k < 1 || k > d {
        return Err(Error::InvalidParameter(format!(
            "k must satisfy 1 <= k <= {d}, got {k}"
        )));
    }
    if lambda < 0.0 || !lambda.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "lambda must be nonnegative and finite, got {lambda}"
        )));
    }
    if spec.kind().is_classification() && data.target_kind() != crate::data::TargetKind::Binary {
        return Err(Error::InvalidInput(format!(
            "{} requires a binary dataset",
            spec.kind()
        )));
    }

    let x = data.x();
    let y = data.y();
    let lip = match cfg.lipschitz_override {
        Some(l) => l,
        None => {
            let gamma = spectral_norm_sq(x, 1e-10, 1000).gamma;
            lipschitz_constant(spec, gamma)
        }
    };
    let tau = lambda / lip;

    let mut beta = Array1::zeros(d);
    let mut beta_prev = beta.clone();
    let mut alpha = beta.clone();
    let mut best_beta = beta.clone();
    let mut best_obj = objective(beta.view(), data, spec, k, lambda)?;
    let mut prev_obj = best_obj;
    let mut trace = cfg.record_trace.then(Vec::new);
    let mut iterations = 0;
    let mut converged = false;

    for t in 1..=cfg.max_iter {
        let grad = loss_gradient(spec, alpha.view(), x, y)?;
        let z = &alpha - &(grad / lip);
        beta = if tau > 0.0 {
            prox_ksup_sq(z.view(), k, tau)?
        } else {
            z
        };
        let obj = objective(beta.view(), data, spec, k, lambda)?;
        if !obj.is_finite() {
            return Err(Error::Diverged {
                iteration: t,
                beta: beta.to_vec(),
            });
        }
        iterations = t;
        if let Some(tr) = trace.as_mut() {
            tr.push(obj);
        }
        if obj < best_obj {
            best_obj = obj;
            best_beta = beta.clone();
        }
        if (obj - prev_obj).abs() <= cfg.tol * prev_obj.abs().max(1.0) {
            converged = true;
            break;
        }
        let momentum = (t as f64 - 1.0) / (t as f64 + 2.0);
        alpha = &beta + &((&beta - &beta_prev) * momentum);
        beta_prev = beta;
        prev_obj = obj;
    }

    Ok(FitResult {
        beta: best_beta,
        objective: best_obj,
        iterations,
        converged,
        trace,
    })
}
