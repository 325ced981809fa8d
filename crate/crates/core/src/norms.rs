//! The k-support norm, its sorted-magnitude decomposition, and the proximal
//! operator of the squared norm.
//!
//! For a vector of magnitudes sorted in nonincreasing order, the norm splits
//! the entries into a head of the `k - r - 1` largest values, which enter as
//! squares, and a tail whose sum enters through its average over `r + 1`
//! slots:
//!
//! ```text
//! norm^2 = sum_{i < k-r-1} w_i^2  +  (sum_{i >= k-r-1} w_i)^2 / (r + 1)
//! ```
//!
//! `r` is the unique split in `{0, ..., k-1}` for which the head entries all
//! exceed the tail average and the tail average dominates the first tail
//! entry. `k = 1` recovers the l1 norm and `k = d` the l2 norm; in between
//! the norm interpolates, which is what makes it useful as a regularizer for
//! correlated sparsity.

use ndarray::{Array1, ArrayView1};

use crate::error::{Error, Result};

/// Relative slack for the split-index scan and the prox candidate
/// conditions. Exact ties sit on branch boundaries where adjacent splits
/// produce the same value, so the first branch to pass wins.
const SPLIT_TOL: f64 = 1e-12;

fn band(a: f64, b: f64) -> f64 {
    SPLIT_TOL * a.abs().max(b.abs())
}

fn gt_tol(a: f64, b: f64) -> bool {
    a > b - band(a, b)
}

fn ge_tol(a: f64, b: f64) -> bool {
    a >= b - band(a, b)
}

fn validate_vector(v: ArrayView1<'_, f64>) -> Result<()> {
    if v.is_empty() {
        return Err(Error::InvalidInput("vector must have at least one entry".into()));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("vector has non-finite entries".into()));
    }
    Ok(())
}

fn validate_k(k: usize, d: usize) -> Result<()> {
    if k < 1 || k > d {
        return Err(Error::InvalidParameter(format!(
            "k must satisfy 1 <= k <= {d}, got {k}"
        )));
    }
    Ok(())
}

/// Sorted-magnitude view of a vector for k-support computations.
///
/// Keeps the magnitudes in nonincreasing order together with the permutation
/// and signs needed to rebuild the original layout, plus the split index and
/// the head/tail aggregates that define the norm value.
#[derive(Debug, Clone)]
pub struct KSupportDecomposition {
    k: usize,
    r: usize,
    sorted_abs: Vec<f64>,
    order: Vec<usize>,
    signs: Vec<f64>,
    head_sq_sum: f64,
    tail_sum: f64,
}

impl KSupportDecomposition {
    pub fn new(beta: ArrayView1<'_, f64>, k: usize) -> Result<Self> {
        validate_vector(beta)?;
        validate_k(k, beta.len())?;
        let d = beta.len();
        let mut order: Vec<usize> = (0..d).collect();
        // Stable sort so equal magnitudes keep their original relative order
        // and downstream output is deterministic.
        order.sort_by(|&i, &j| beta[j].abs().partial_cmp(&beta[i].abs()).unwrap());
        let sorted_abs: Vec<f64> = order.iter().map(|&i| beta[i].abs()).collect();
        let signs: Vec<f64> = beta
            .iter()
            .map(|&v| if v < 0.0 { -1.0 } else { 1.0 })
            .collect();
        let r = find_r(&sorted_abs, k)?;
        let head = k - r - 1;
        let head_sq_sum = sorted_abs[..head].iter().map(|v| v * v).sum();
        let tail_sum = sorted_abs[head..].iter().sum();
        Ok(Self {
            k,
            r,
            sorted_abs,
            order,
            signs,
            head_sq_sum,
            tail_sum,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Split index: the tail spans the `r + 1` smallest of the top-k slots
    /// plus everything below them.
    pub fn r(&self) -> usize {
        self.r
    }

    /// Magnitudes in nonincreasing order.
    pub fn sorted_abs(&self) -> &[f64] {
        &self.sorted_abs
    }

    /// `order()[j]` is the original index of the j-th largest magnitude.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Sign of each original entry, with +1 for zero.
    pub fn signs(&self) -> &[f64] {
        &self.signs
    }

    /// Sum of squares over the head block.
    pub fn head_sq_sum(&self) -> f64 {
        self.head_sq_sum
    }

    /// Plain sum over the tail block.
    pub fn tail_sum(&self) -> f64 {
        self.tail_sum
    }

    pub fn norm_sq(&self) -> f64 {
        self.head_sq_sum + self.tail_sum * self.tail_sum / (self.r as f64 + 1.0)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Scatter values given in sorted positions back to the original layout,
    /// restoring signs. `restore(sorted_abs())` rebuilds the input vector.
    pub fn restore(&self, sorted_values: &[f64]) -> Array1<f64> {
        let mut out = Array1::zeros(self.sorted_abs.len());
        for (j, &i) in self.order.iter().enumerate() {
            out[i] = self.signs[i] * sorted_values[j];
        }
        out
    }
}

/// Locate the split index `r` in `{0, ..., k-1}` for a nonincreasing,
/// nonnegative magnitude vector.
///
/// Scans from `r = 0` upward and returns the first index where the last head
/// entry strictly exceeds the tail average and the tail average dominates the
/// first tail entry; the head condition is vacuous when the head is empty.
/// Comparisons carry a relative slack of 1e-12 so floating-point ties on
/// branch boundaries (where adjacent splits give equal norms) resolve
/// deterministically. The all-zero vector lands on `r = k - 1`.
pub fn find_r(sorted_abs: &[f64], k: usize) -> Result<usize> {
    let d = sorted_abs.len();
    validate_k(k, d)?;
    if sorted_abs.iter().any(|&v| v < 0.0 || !v.is_finite()) {
        return Err(Error::InvalidInput(
            "find_r expects nonnegative finite magnitudes".into(),
        ));
    }
    if sorted_abs.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::InvalidInput(
            "find_r expects a nonincreasing vector".into(),
        ));
    }
    let mut tail: f64 = sorted_abs[(k - 1)..].iter().sum();
    for r in 0..k {
        let head = k - r - 1;
        let mean = tail / (r as f64 + 1.0);
        let left_ok = head == 0 || gt_tol(sorted_abs[head - 1], mean);
        let right_ok = ge_tol(mean, sorted_abs[head]);
        if left_ok && right_ok {
            return Ok(r);
        }
        if r + 1 < k {
            tail += sorted_abs[head - 1];
        }
    }
    // Unreachable for valid input: the exact split always passes the
    // slackened scan. Kept as a defined answer rather than a panic.
    Ok(k - 1)
}

/// The k-support norm of `beta`.
pub fn ksup_norm(beta: ArrayView1<'_, f64>, k: usize) -> Result<f64> {
    validate_vector(beta)?;
    validate_k(k, beta.len())?;
    if beta.iter().all(|&v| v == 0.0) {
        return Ok(0.0);
    }
    Ok(KSupportDecomposition::new(beta, k)?.norm())
}

/// Proximal operator of `x -> (tau / 2) * ksup_norm(x, k)^2`: the unique
/// minimizer of `(1/2) ||x - v||^2 + (tau / 2) ksup_norm(x, k)^2`.
///
/// Works on the sorted magnitudes `w` of `v` and searches split/support
/// pairs `(r, l)`. A candidate keeps the `k - r - 1` head entries shrunk by
/// `1 / (1 + tau)`, subtracts a constant `mu` from the active tail
/// `w[k-r-1..l]`, and zeroes everything past `l`, where
///
/// ```text
/// mu = tau * T / (r + 1 + tau * m),   T = sum of the active tail of w,
///                                     m = active tail length.
/// ```
///
/// The pair is accepted when the implied solution satisfies its own split
/// conditions and the support boundary brackets `mu`; in exact arithmetic
/// exactly one pair passes. Signs and ordering of `v` are restored on the
/// way out.
pub fn prox_ksup_sq(v: ArrayView1<'_, f64>, k: usize, tau: f64) -> Result<Array1<f64>> {
    validate_vector(v)?;
    validate_k(k, v.len())?;
    if tau <= 0.0 || !tau.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "tau must be positive and finite, got {tau}"
        )));
    }
    let d = v.len();
    if v.iter().all(|&x| x == 0.0) {
        return Ok(Array1::zeros(d));
    }
    let dec = KSupportDecomposition::new(v, k)?;
    let w = dec.sorted_abs();
    let mut prefix = vec![0.0; d + 1];
    for i in 0..d {
        prefix[i + 1] = prefix[i] + w[i];
    }
    let shrink = 1.0 / (1.0 + tau);
    let build = |head: usize, l: usize, mu: f64| -> Vec<f64> {
        let mut q = vec![0.0; d];
        for j in 0..head {
            q[j] = w[j] * shrink;
        }
        for j in head..l {
            q[j] = (w[j] - mu).max(0.0);
        }
        q
    };

    for r in 0..k {
        let head = k - r - 1;
        for l in head..=d {
            let m = l - head;
            let t = prefix[l] - prefix[head];
            let tail_mean = t / (r as f64 + 1.0 + tau * m as f64);
            let mu = tau * tail_mean;
            let left_ok = head == 0 || gt_tol(w[head - 1] * shrink, tail_mean);
            let right_ok = m == 0 || ge_tol(tail_mean, w[head] - mu);
            let support_in = m == 0 || gt_tol(w[l - 1], mu);
            let support_out = l == d || ge_tol(mu, w[l]);
            if left_ok && right_ok && support_in && support_out {
                return Ok(dec.restore(&build(head, l, mu)));
            }
        }
    }

    // Floating-point corner: no pair passed the slackened conditions.
    // Fall back to the candidate with the lowest true objective.
    let mut best: Option<(f64, Vec<f64>)> = None;
    for r in 0..k {
        let head = k - r - 1;
        for l in head..=d {
            let m = l - head;
            let t = prefix[l] - prefix[head];
            let mu = tau * t / (r as f64 + 1.0 + tau * m as f64);
            let q = build(head, l, mu);
            let qv = Array1::from_vec(q.clone());
            let dist: f64 = q.iter().zip(w).map(|(qi, wi)| (qi - wi) * (qi - wi)).sum();
            let obj = 0.5 * dist + 0.5 * tau * ksup_norm(qv.view(), k)?.powi(2);
            if best.as_ref().is_none_or(|(b, _)| obj < *b) {
                best = Some((obj, q));
            }
        }
    }
    let (_, q) = best.expect("candidate set is nonempty");
    Ok(dec.restore(&q))
}

/// Reference minimizer of the prox objective by subgradient descent with a
/// geometrically decaying step, for cross-checking `prox_ksup_sq` on small
/// problems (`d <= 4`).
///
/// Stops once the objective change stays below 1e-12 (relative) for a run of
/// consecutive steps and returns the best iterate seen; exhausting `steps`
/// first is an error, not a silent fallback.
pub fn prox_oracle(
    v: ArrayView1<'_, f64>,
    k: usize,
    tau: f64,
    steps: usize,
    step_size: f64,
) -> Result<Array1<f64>> {
    validate_vector(v)?;
    validate_k(k, v.len())?;
    if v.len() > 4 {
        return Err(Error::InvalidParameter(format!(
            "prox_oracle is restricted to d <= 4, got d = {}",
            v.len()
        )));
    }
    if tau <= 0.0 || !tau.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "tau must be positive and finite, got {tau}"
        )));
    }
    if step_size <= 0.0 || !step_size.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "step_size must be positive and finite, got {step_size}"
        )));
    }
    if steps == 0 {
        return Err(Error::InvalidParameter("steps must be at least 1".into()));
    }
    let d = v.len();
    if v.iter().all(|&x| x == 0.0) {
        return Ok(Array1::zeros(d));
    }

    let objective = |x: &Array1<f64>| -> f64 {
        let dist: f64 = x.iter().zip(v.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
        let norm_sq = if x.iter().all(|&t| t == 0.0) {
            0.0
        } else {
            KSupportDecomposition::new(x.view(), k)
                .expect("finite iterate")
                .norm_sq()
        };
        0.5 * dist + 0.5 * tau * norm_sq
    };

    let mut x = v.to_owned();
    let mut f_prev = objective(&x);
    let mut best = x.clone();
    let mut f_best = f_prev;
    // Decay chosen so the step shrinks sixteen orders of magnitude over the
    // full budget; the quiet rule normally fires long before that.
    let decay = 1e-16_f64.powf(1.0 / steps as f64);
    let mut eta = step_size;
    let mut quiet = 0usize;
    for _ in 0..steps {
        let g = half_norm_sq_subgradient(&x, k);
        for i in 0..d {
            x[i] -= eta * ((x[i] - v[i]) + tau * g[i]);
        }
        let f = objective(&x);
        if f < f_best {
            f_best = f;
            best = x.clone();
        }
        if (f - f_prev).abs() <= 1e-12 * f_prev.abs().max(1.0) {
            quiet += 1;
            if quiet >= 25 {
                return Ok(best);
            }
        } else {
            quiet = 0;
        }
        f_prev = f;
        eta *= decay;
    }
    Err(Error::OracleBudgetExhausted { steps })
}

/// A subgradient of `x -> (1/2) ksup_norm(x, k)^2`: head entries pass
/// through, active tail entries contribute the signed tail average, zero
/// entries contribute zero.
fn half_norm_sq_subgradient(x: &Array1<f64>, k: usize) -> Array1<f64> {
    if x.iter().all(|&t| t == 0.0) {
        return Array1::zeros(x.len());
    }
    let dec = KSupportDecomposition::new(x.view(), k).expect("finite iterate");
    let head = dec.k() - dec.r() - 1;
    let tail_mean = dec.tail_sum() / (dec.r() as f64 + 1.0);
    let g: Vec<f64> = dec
        .sorted_abs()
        .iter()
        .enumerate()
        .map(|(j, &w)| {
            if j < head {
                w
            } else if w > 0.0 {
                tail_mean
            } else {
                0.0
            }
        })
        .collect();
    dec.restore(&g)
}
