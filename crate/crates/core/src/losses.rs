//! The seven smooth(ed) convex losses under one interface: value, gradient,
//! and a step-size constant for each.
//!
//! Classification kinds score the margin `y * <beta, x>` against +-1 targets.
//! `Squared` and the two Huber-smoothed regression kinds work on the residual
//! `y - <beta, x>` and accept real targets. All values are sums over samples
//! with no averaging and no intercept term; append a constant column to the
//! design matrix if a bias is wanted.

use ndarray::{Array1, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default Huber smoothing width.
pub const DEFAULT_HUBER: f64 = 0.1;
/// Default insensitivity width for [`LossKind::EpsInsensitive`].
pub const DEFAULT_EPS: f64 = 1.0;

/// Exponent arguments are clamped here before exponentiation; a sample whose
/// unclamped exponent exceeds it marks the loss value as diverged.
const EXP_CLAMP: f64 = 500.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LossKind {
    Squared,
    OneSidedSquared,
    HuberHinge,
    Logistic,
    Exponential,
    Absolute,
    EpsInsensitive,
}

impl LossKind {
    /// Every kind, in reporting order.
    pub const ALL: [LossKind; 7] = [
        LossKind::Squared,
        LossKind::OneSidedSquared,
        LossKind::HuberHinge,
        LossKind::Logistic,
        LossKind::Exponential,
        LossKind::Absolute,
        LossKind::EpsInsensitive,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            LossKind::Squared => "squared",
            LossKind::OneSidedSquared => "one-sided-squared",
            LossKind::HuberHinge => "hinge",
            LossKind::Logistic => "logistic",
            LossKind::Exponential => "exponential",
            LossKind::Absolute => "absolute",
            LossKind::EpsInsensitive => "eps-insensitive",
        }
    }

    /// Kinds that require +-1 targets.
    pub fn is_classification(&self) -> bool {
        matches!(
            self,
            LossKind::OneSidedSquared
                | LossKind::HuberHinge
                | LossKind::Logistic
                | LossKind::Exponential
        )
    }

    pub fn uses_huber(&self) -> bool {
        matches!(
            self,
            LossKind::HuberHinge | LossKind::Absolute | LossKind::EpsInsensitive
        )
    }
}

impl std::fmt::Display for LossKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LossKind::ALL
            .iter()
            .copied()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "unknown loss {s:?}; expected one of squared, one-sided-squared, hinge, \
                     logistic, exponential, absolute, eps-insensitive"
                ))
            })
    }
}

/// A fully specified loss: the kind plus its Huber width `h` and
/// insensitivity `eps` where those apply.
///
/// `Absolute` is the `eps = 0` special case of `EpsInsensitive` and shares
/// its code path, so the two agree bit for bit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossSpec {
    kind: LossKind,
    h: Option<f64>,
    eps: Option<f64>,
}

impl LossSpec {
    /// Build a spec, filling in defaults (`h = 0.1`, `eps = 1`) and rejecting
    /// parameters the kind does not take. `eps < 0` is rejected outright: it
    /// only shifts the objective by a constant, and a silently shifted
    /// objective is worse than an error.
    pub fn new(kind: LossKind, h: Option<f64>, eps: Option<f64>) -> Result<Self> {
        let h = match (kind.uses_huber(), h) {
            (true, Some(v)) if v > 0.0 && v.is_finite() => Some(v),
            (true, Some(v)) => {
                return Err(Error::InvalidParameter(format!(
                    "h must be positive and finite, got {v}"
                )))
            }
            (true, None) => Some(DEFAULT_HUBER),
            (false, Some(_)) => {
                return Err(Error::InvalidParameter(format!(
                    "{kind} does not take a Huber parameter"
                )))
            }
            (false, None) => None,
        };
        let eps = match kind {
            LossKind::EpsInsensitive => match eps {
                Some(v) if v >= 0.0 && v.is_finite() => Some(v),
                Some(v) => {
                    return Err(Error::InvalidParameter(format!(
                        "eps must be nonnegative and finite, got {v}"
                    )))
                }
                None => Some(DEFAULT_EPS),
            },
            LossKind::Absolute => match eps {
                None | Some(0.0) => Some(0.0),
                Some(v) => {
                    return Err(Error::InvalidParameter(format!(
                        "absolute loss fixes eps = 0, got {v}"
                    )))
                }
            },
            _ => {
                if eps.is_some() {
                    return Err(Error::InvalidParameter(format!(
                        "{kind} does not take an insensitivity parameter"
                    )));
                }
                None
            }
        };
        Ok(Self { kind, h, eps })
    }

    pub fn squared() -> Self {
        Self { kind: LossKind::Squared, h: None, eps: None }
    }

    pub fn one_sided_squared() -> Self {
        Self { kind: LossKind::OneSidedSquared, h: None, eps: None }
    }

    pub fn logistic() -> Self {
        Self { kind: LossKind::Logistic, h: None, eps: None }
    }

    pub fn exponential() -> Self {
        Self { kind: LossKind::Exponential, h: None, eps: None }
    }

    pub fn huber_hinge(h: f64) -> Result<Self> {
        Self::new(LossKind::HuberHinge, Some(h), None)
    }

    pub fn absolute(h: f64) -> Result<Self> {
        Self::new(LossKind::Absolute, Some(h), None)
    }

    pub fn eps_insensitive(h: f64, eps: f64) -> Result<Self> {
        Self::new(LossKind::EpsInsensitive, Some(h), Some(eps))
    }

    pub fn kind(&self) -> LossKind {
        self.kind
    }

    pub fn h(&self) -> Option<f64> {
        self.h
    }

    pub fn eps(&self) -> Option<f64> {
        self.eps
    }

    /// With +-1 targets the insensitive loss only separates the classes when
    /// `eps - h < 1`; outside that range a fit can be vacuous. Surfaced as a
    /// warning, never an error, since the regression use is unaffected.
    pub fn classification_consistency_warning(&self) -> Option<String> {
        match (self.kind, self.eps, self.h) {
            (LossKind::EpsInsensitive | LossKind::Absolute, Some(eps), Some(h))
                if eps - h >= 1.0 =>
            {
                Some(format!(
                    "eps - h = {} >= 1: the insensitive band swallows the +-1 margin, \
                     so classification fits may be vacuous",
                    eps - h
                ))
            }
            _ => None,
        }
    }

    fn huber(&self) -> f64 {
        self.h.expect("validated at construction")
    }
}

/// Loss value and gradient at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct LossEvaluation {
    pub value: f64,
    pub gradient: Array1<f64>,
}

fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Per-sample loss and its derivative with respect to the score
/// `s = <beta, x>`. Branch boundaries belong to the branch written with a
/// closed comparison; Huber smoothing makes both sides agree there, so this
/// is a determinism convention rather than a numerical one.
fn score_curve(spec: &LossSpec, score: f64, target: f64) -> (f64, f64) {
    match spec.kind {
        LossKind::Squared => {
            let r = score - target;
            (r * r, 2.0 * r)
        }
        LossKind::OneSidedSquared => {
            let margin = target * score;
            if margin > 1.0 {
                (0.0, 0.0)
            } else {
                let gap = 1.0 - margin;
                (gap * gap, 2.0 * (score - target))
            }
        }
        LossKind::HuberHinge => {
            let h = spec.huber();
            let margin = target * score;
            if margin > 1.0 + h {
                (0.0, 0.0)
            } else if (1.0 - margin).abs() <= h {
                let gap = 1.0 + h - margin;
                (gap * gap / (4.0 * h), (score - (1.0 + h) * target) / (2.0 * h))
            } else {
                (1.0 - margin, -target)
            }
        }
        LossKind::Logistic => {
            let margin = target * score;
            (softplus(-margin), -target * sigmoid(-margin))
        }
        LossKind::Exponential => {
            let arg = -target * score;
            let value = if arg > EXP_CLAMP { f64::INFINITY } else { arg.exp() };
            (value, -target * arg.min(EXP_CLAMP).exp())
        }
        LossKind::Absolute | LossKind::EpsInsensitive => {
            let h = spec.huber();
            let eps = self_eps(spec);
            let u = target - score;
            // lower-side hinge, active when the residual falls below -eps
            let (v1, g1) = if u > -eps + h {
                (0.0, 0.0)
            } else if (u + eps).abs() <= h {
                let gap = u + eps - h;
                (gap * gap / (4.0 * h), (-u + h - eps) / (2.0 * h))
            } else {
                (-u - eps, 1.0)
            };
            // upper-side hinge, active when the residual exceeds +eps
            let (v2, g2) = if u < eps - h {
                (0.0, 0.0)
            } else if (u - eps).abs() <= h {
                let gap = u - eps + h;
                (gap * gap / (4.0 * h), (-u + eps - h) / (2.0 * h))
            } else {
                (u - eps, -1.0)
            };
            (v1 + v2, g1 + g2)
        }
    }
}

fn self_eps(spec: &LossSpec) -> f64 {
    spec.eps.expect("validated at construction")
}

fn check_inputs(
    spec: &LossSpec,
    beta: ArrayView1<'_, f64>,
    x: ArrayView2<'_, f64>,
    y: ArrayView1<'_, f64>,
) -> Result<()> {
    if x.nrows() == 0 || x.ncols() == 0 {
        return Err(Error::InvalidInput("design matrix must be nonempty".into()));
    }
    if x.ncols() != beta.len() {
        return Err(Error::DimensionMismatch(format!(
            "design matrix has {} columns but beta has {} entries",
            x.ncols(),
            beta.len()
        )));
    }
    if x.nrows() != y.len() {
        return Err(Error::DimensionMismatch(format!(
            "design matrix has {} rows but y has {} entries",
            x.nrows(),
            y.len()
        )));
    }
    if beta.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("beta has non-finite entries".into()));
    }
    if spec.kind.is_classification() && y.iter().any(|&t| t != 1.0 && t != -1.0) {
        return Err(Error::InvalidInput(format!(
            "{} requires targets in {{-1, +1}}",
            spec.kind
        )));
    }
    Ok(())
}

/// Loss value summed over samples, in index order.
///
/// The exponential kind returns `f64::INFINITY` as a diverged sentinel when
/// any sample's exponent exceeds the overflow guard.
pub fn loss_value(
    spec: &LossSpec,
    beta: ArrayView1<'_, f64>,
    x: ArrayView2<'_, f64>,
    y: ArrayView1<'_, f64>,
) -> Result<f64> {
    check_inputs(spec, beta, x, y)?;
    let scores = x.dot(&beta);
    Ok(scores
        .iter()
        .zip(y.iter())
        .map(|(&s, &t)| score_curve(spec, s, t).0)
        .sum())
}

/// Analytic gradient summed over samples.
pub fn loss_gradient(
    spec: &LossSpec,
    beta: ArrayView1<'_, f64>,
    x: ArrayView2<'_, f64>,
    y: ArrayView1<'_, f64>,
) -> Result<Array1<f64>> {
    check_inputs(spec, beta, x, y)?;
    let scores = x.dot(&beta);
    let coeffs = Array1::from_iter(
        scores
            .iter()
            .zip(y.iter())
            .map(|(&s, &t)| score_curve(spec, s, t).1),
    );
    Ok(x.t().dot(&coeffs))
}

/// Value and gradient in one pass over the samples.
pub fn evaluate(
    spec: &LossSpec,
    beta: ArrayView1<'_, f64>,
    x: ArrayView2<'_, f64>,
    y: ArrayView1<'_, f64>,
) -> Result<LossEvaluation> {
    check_inputs(spec, beta, x, y)?;
    let scores = x.dot(&beta);
    let mut value = 0.0;
    let coeffs = Array1::from_iter(scores.iter().zip(y.iter()).map(|(&s, &t)| {
        let (v, g) = score_curve(spec, s, t);
        value += v;
        g
    }));
    Ok(LossEvaluation {
        value,
        gradient: x.t().dot(&coeffs),
    })
}

/// Per-sample loss and coefficient derivative for a unit sample, used to emit
/// plot curves: `z` is the margin for classification kinds (target fixed at
/// +1) and the residual `y - <beta, x>` otherwise.
pub fn curve_point(spec: &LossSpec, z: f64) -> (f64, f64) {
    if spec.kind.is_classification() {
        score_curve(spec, z, 1.0)
    } else {
        score_curve(spec, 0.0, z)
    }
}

/// Lipschitz constant of the loss gradient as a function of the largest
/// eigenvalue `gamma` of `X^T X`, floored at 1e-12 so a degenerate all-zero
/// design still yields a finite step.
///
/// The exponential loss is not globally Lipschitz; its constant is a
/// conservative heuristic of `50 * gamma` and can be overridden through the
/// solver configuration.
pub fn lipschitz_constant(spec: &LossSpec, gamma: f64) -> f64 {
    debug_assert!(gamma >= 0.0);
    let l = match spec.kind {
        LossKind::Squared | LossKind::OneSidedSquared => 2.0 * gamma,
        LossKind::HuberHinge => gamma / (2.0 * spec.huber()),
        LossKind::Logistic => gamma / 4.0,
        LossKind::Exponential => 50.0 * gamma,
        // the eps = 0 curvature doubles where the two hinge components
        // overlap, hence twice the one-sided hinge constant
        LossKind::Absolute | LossKind::EpsInsensitive => gamma / spec.huber(),
    };
    l.max(1e-12)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn squared_at_origin_is_target_norm() {
        let x = array![[1.0, 2.0], [0.5, -1.0], [2.0, 0.0]];
        let y = array![1.0, -2.0, 0.5];
        let beta = array![0.0, 0.0];
        let spec = LossSpec::squared();
        let v = loss_value(&spec, beta.view(), x.view(), y.view()).unwrap();
        assert!(close(v, y.iter().map(|t| t * t).sum(), 1e-14));
        let g = loss_gradient(&spec, beta.view(), x.view(), y.view()).unwrap();
        let expect = x.t().dot(&y) * -2.0;
        for (a, b) in g.iter().zip(expect.iter()) {
            assert!(close(*a, *b, 1e-14));
        }
    }

    #[test]
    fn logistic_at_origin() {
        let x = array![[1.0], [2.0], [3.0], [4.0]];
        let y = array![1.0, -1.0, 1.0, -1.0];
        let beta = array![0.0];
        let spec = LossSpec::logistic();
        let v = loss_value(&spec, beta.view(), x.view(), y.view()).unwrap();
        assert!(close(v, 4.0 * 2.0_f64.ln(), 1e-12));
        let g = loss_gradient(&spec, beta.view(), x.view(), y.view()).unwrap();
        let expect = x.t().dot(&y) * -0.5;
        assert!(close(g[0], expect[0], 1e-12));
    }

    #[test]
    fn hinge_quadratic_branch_at_unit_margin() {
        // single sample with margin exactly 1 sits in the quadratic branch:
        // (1 + h - 1)^2 / (4h) = h / 4
        let x = array![[1.0]];
        let y = array![1.0];
        let beta = array![1.0];
        let spec = LossSpec::huber_hinge(0.5).unwrap();
        let v = loss_value(&spec, beta.view(), x.view(), y.view()).unwrap();
        assert!(close(v, 0.125, 1e-15));
    }

    #[test]
    fn hinge_zero_branch_has_zero_gradient() {
        let x = array![[2.0], [3.0]];
        let y = array![1.0, 1.0];
        let beta = array![5.0]; // margins 10 and 15, far above 1 + h
        let spec = LossSpec::huber_hinge(0.1).unwrap();
        assert_eq!(
            loss_value(&spec, beta.view(), x.view(), y.view()).unwrap(),
            0.0
        );
        let g = loss_gradient(&spec, beta.view(), x.view(), y.view()).unwrap();
        assert_eq!(g[0], 0.0);
    }

    #[test]
    fn eps_insensitive_zero_inside_band() {
        let x = array![[1.0]];
        let y = array![2.0];
        let beta = array![2.0]; // residual 0, inside the band for eps = 1
        let spec = LossSpec::eps_insensitive(0.5, 1.0).unwrap();
        assert_eq!(
            loss_value(&spec, beta.view(), x.view(), y.view()).unwrap(),
            0.0
        );
        let g = loss_gradient(&spec, beta.view(), x.view(), y.view()).unwrap();
        assert_eq!(g[0], 0.0);
    }

    #[test]
    fn exponential_at_origin_counts_samples() {
        let x = array![[1.0], [2.0], [3.0]];
        let y = array![1.0, -1.0, 1.0];
        let beta = array![0.0];
        let spec = LossSpec::exponential();
        let v = loss_value(&spec, beta.view(), x.view(), y.view()).unwrap();
        assert!(close(v, 3.0, 1e-14));
    }

    #[test]
    fn exponential_overflow_sentinel() {
        let x = array![[1.0]];
        let y = array![1.0];
        let beta = array![-600.0]; // exponent 600 > clamp
        let spec = LossSpec::exponential();
        let v = loss_value(&spec, beta.view(), x.view(), y.view()).unwrap();
        assert!(v.is_infinite());
        // gradient stays finite thanks to the clamp
        let g = loss_gradient(&spec, beta.view(), x.view(), y.view()).unwrap();
        assert!(g[0].is_finite());
    }

    #[test]
    fn lipschitz_constants() {
        assert_eq!(lipschitz_constant(&LossSpec::squared(), 4.0), 8.0);
        assert_eq!(lipschitz_constant(&LossSpec::one_sided_squared(), 4.0), 8.0);
        assert_eq!(
            lipschitz_constant(&LossSpec::huber_hinge(0.1).unwrap(), 4.0),
            20.0
        );
        assert_eq!(lipschitz_constant(&LossSpec::logistic(), 4.0), 1.0);
        assert_eq!(lipschitz_constant(&LossSpec::exponential(), 4.0), 200.0);
        assert_eq!(
            lipschitz_constant(&LossSpec::absolute(0.1).unwrap(), 4.0),
            40.0
        );
        assert_eq!(
            lipschitz_constant(&LossSpec::eps_insensitive(0.1, 1.0).unwrap(), 4.0),
            40.0
        );
        // degenerate design floors the constant
        assert_eq!(lipschitz_constant(&LossSpec::logistic(), 0.0), 1e-12);
    }

    #[test]
    fn spec_validation() {
        assert!(LossSpec::huber_hinge(0.0).is_err());
        assert!(LossSpec::huber_hinge(-0.5).is_err());
        assert!(LossSpec::eps_insensitive(0.1, -1.0).is_err());
        assert!(LossSpec::new(LossKind::Squared, Some(0.1), None).is_err());
        assert!(LossSpec::new(LossKind::Logistic, None, Some(1.0)).is_err());
        assert!(LossSpec::new(LossKind::Absolute, Some(0.1), Some(0.5)).is_err());
        // defaults fill in
        let spec = LossSpec::new(LossKind::HuberHinge, None, None).unwrap();
        assert_eq!(spec.h(), Some(DEFAULT_HUBER));
        let spec = LossSpec::new(LossKind::EpsInsensitive, None, None).unwrap();
        assert_eq!(spec.eps(), Some(DEFAULT_EPS));
        let spec = LossSpec::absolute(0.2).unwrap();
        assert_eq!(spec.eps(), Some(0.0));
    }

    #[test]
    fn classification_targets_validated() {
        let x = array![[1.0], [2.0]];
        let y = array![1.0, 0.5];
        let beta = array![0.0];
        for spec in [
            LossSpec::one_sided_squared(),
            LossSpec::logistic(),
            LossSpec::exponential(),
            LossSpec::huber_hinge(0.1).unwrap(),
        ] {
            assert!(matches!(
                loss_value(&spec, beta.view(), x.view(), y.view()),
                Err(Error::InvalidInput(_))
            ));
        }
        // regression kinds accept real targets
        assert!(loss_value(&LossSpec::squared(), beta.view(), x.view(), y.view()).is_ok());
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let x = Array2::<f64>::zeros((3, 2));
        let y = array![1.0, -1.0, 1.0];
        let beta = array![0.0, 0.0, 0.0];
        assert!(matches!(
            loss_value(&LossSpec::squared(), beta.view(), x.view(), y.view()),
            Err(Error::DimensionMismatch(_))
        ));
        let y_short = array![1.0];
        let beta_ok = array![0.0, 0.0];
        assert!(matches!(
            loss_value(&LossSpec::squared(), beta_ok.view(), x.view(), y_short.view()),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn loss_names_round_trip() {
        for kind in LossKind::ALL {
            let parsed: LossKind = kind.as_str().parse().unwrap();
            assert_eq!(parsed, kind);
        }
        assert!("huber".parse::<LossKind>().is_err());
    }

    #[test]
    fn curve_point_conventions() {
        let hinge = LossSpec::huber_hinge(0.5).unwrap();
        let (v, _) = curve_point(&hinge, 1.0);
        assert!(close(v, 0.125, 1e-15));
        let eps = LossSpec::eps_insensitive(0.5, 2.0).unwrap();
        assert_eq!(curve_point(&eps, 0.0), (0.0, 0.0));
        // squared treats the input as a residual
        let (v, g) = curve_point(&LossSpec::squared(), 3.0);
        assert!(close(v, 9.0, 1e-15));
        assert!(close(g, -6.0, 1e-15));
    }

    #[test]
    fn evaluate_bundles_value_and_gradient() {
        let x = array![[1.0, -0.5], [0.3, 2.0], [-1.0, 0.7]];
        let y = array![1.0, -1.0, 1.0];
        let beta = array![0.4, -0.2];
        for spec in [
            LossSpec::squared(),
            LossSpec::logistic(),
            LossSpec::huber_hinge(0.2).unwrap(),
            LossSpec::eps_insensitive(0.2, 0.5).unwrap(),
        ] {
            let eval = evaluate(&spec, beta.view(), x.view(), y.view()).unwrap();
            assert!(eval.value >= 0.0);
            let v = loss_value(&spec, beta.view(), x.view(), y.view()).unwrap();
            let g = loss_gradient(&spec, beta.view(), x.view(), y.view()).unwrap();
            assert_eq!(eval.value.to_bits(), v.to_bits());
            for (a, b) in eval.gradient.iter().zip(g.iter()) {
                assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }

    #[test]
    fn consistency_warning_boundary() {
        let ok = LossSpec::eps_insensitive(0.5, 1.0).unwrap();
        assert!(ok.classification_consistency_warning().is_none());
        let bad = LossSpec::eps_insensitive(0.5, 1.5).unwrap();
        assert!(bad.classification_consistency_warning().is_some());
    }
}
