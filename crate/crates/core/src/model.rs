//! Fitted-model container and its JSON form.

use std::path::Path;

use ndarray::{Array1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::data::{predict_scores, write_text_atomic};
use crate::error::{io_err, Error, Result};
use crate::losses::{LossKind, LossSpec};
use crate::solver::FitResult;

/// A fitted coefficient vector with the settings that produced it, ready for
/// prediction and (de)serialization. The JSON layout is stable:
/// `{"beta": [..], "k": int, "lambda": float, "loss": string, "h": float|null,
///   "eps": float|null, "objective": float, "iterations": int,
///   "converged": bool, "version": string}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub beta: Vec<f64>,
    pub k: usize,
    pub lambda: f64,
    pub loss: String,
    pub h: Option<f64>,
    pub eps: Option<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub version: String,
}

impl Model {
    pub fn from_fit(spec: &LossSpec, k: usize, lambda: f64, fit: &FitResult) -> Self {
        Self {
            beta: fit.beta.to_vec(),
            k,
            lambda,
            loss: spec.kind().to_string(),
            h: spec.h(),
            eps: spec.eps(),
            objective: fit.objective,
            iterations: fit.iterations,
            converged: fit.converged,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    /// Rebuild the loss specification this model was trained with.
    pub fn loss_spec(&self) -> Result<LossSpec> {
        let kind: LossKind = self.loss.parse()?;
        LossSpec::new(kind, self.h, self.eps)
    }

    pub fn predict(&self, x: ArrayView2<'_, f64>) -> Result<Array1<f64>> {
        predict_scores(Array1::from_vec(self.beta.clone()).view(), x)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_text_atomic(path.as_ref(), &serde_json::to_string_pretty(self)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        let model: Model = serde_json::from_str(&text)?;
        if model.beta.is_empty() {
            return Err(Error::InvalidInput("model has an empty beta".into()));
        }
        if model.k < 1 || model.k > model.beta.len() {
            return Err(Error::InvalidInput(format!(
                "model k = {} is outside 1..={}",
                model.k,
                model.beta.len()
            )));
        }
        model.loss_spec()?;
        Ok(model)
    }
}
