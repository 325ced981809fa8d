//! Validation metrics, (k, lambda) grid search against a held-out split, and
//! the multi-loss synthetic benchmark built on top of it.

use ndarray::ArrayView1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{classify, generate_toy, predict_scores, Dataset, TargetKind, ToyConfig};
use crate::error::{Error, Result};
use crate::losses::LossSpec;
use crate::model::Model;
use crate::solver::{fit, FitResult, SolverConfig};

/// Fraction of positions where predicted and true labels agree.
pub fn accuracy(pred_labels: ArrayView1<'_, f64>, y: ArrayView1<'_, f64>) -> Result<f64> {
    if pred_labels.len() != y.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} predictions but {} targets",
            pred_labels.len(),
            y.len()
        )));
    }
    if y.is_empty() {
        return Err(Error::InvalidInput("empty target vector".into()));
    }
    let agree = pred_labels
        .iter()
        .zip(y.iter())
        .filter(|(a, b)| a == b)
        .count();
    Ok(agree as f64 / y.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MseMode {
    Mean,
    Sum,
}

/// Squared error of raw scores against targets, averaged or summed.
pub fn mse(scores: ArrayView1<'_, f64>, y: ArrayView1<'_, f64>, mode: MseMode) -> Result<f64> {
    if scores.len() != y.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} scores but {} targets",
            scores.len(),
            y.len()
        )));
    }
    if y.is_empty() {
        return Err(Error::InvalidInput("empty target vector".into()));
    }
    let total: f64 = scores
        .iter()
        .zip(y.iter())
        .map(|(s, t)| (s - t) * (s - t))
        .sum();
    Ok(match mode {
        MseMode::Sum => total,
        MseMode::Mean => total / y.len() as f64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Accuracy,
    MseMean,
    MseSum,
}

impl Metric {
    pub fn as_str(&self) -> &'static str {
        match self {
            Metric::Accuracy => "accuracy",
            Metric::MseMean => "mse_mean",
            Metric::MseSum => "mse_sum",
        }
    }

    pub fn higher_is_better(&self) -> bool {
        matches!(self, Metric::Accuracy)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegularizerMode {
    /// Search k over the configured grid.
    KSupport,
    /// Pin k = 1 (the l1 special case).
    L1Fixed,
    /// Pin k = d (the l2 special case).
    L2Fixed,
}

impl RegularizerMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            RegularizerMode::KSupport => "ksup",
            RegularizerMode::L1Fixed => "l1",
            RegularizerMode::L2Fixed => "l2",
        }
    }
}

/// The search grid: which k and lambda values to try and how cells are
/// scored on the validation split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub k_values: Vec<usize>,
    pub lambda_values: Vec<f64>,
    pub metric: Metric,
    pub regularizer_mode: RegularizerMode,
}

/// The default lambda grid: powers of ten from 1e-15 through 1e5.
pub fn lambda_grid_full() -> Vec<f64> {
    (-15..=5).map(|i| 10f64.powi(i)).collect()
}

impl GridSpec {
    /// Full search over `k in 1..=d` and the default lambda grid.
    pub fn full(d: usize, metric: Metric) -> Self {
        Self {
            k_values: (1..=d).collect(),
            lambda_values: lambda_grid_full(),
            metric,
            regularizer_mode: RegularizerMode::KSupport,
        }
    }

    /// The k values actually searched: the configured list, or the pinned
    /// value for the fixed l1/l2 modes.
    pub fn effective_k_values(&self, d: usize) -> Vec<usize> {
        match self.regularizer_mode {
            RegularizerMode::KSupport => self.k_values.clone(),
            RegularizerMode::L1Fixed => vec![1],
            RegularizerMode::L2Fixed => vec![d],
        }
    }

    fn validate(&self, d: usize) -> Result<()> {
        if self.k_values.is_empty() || self.lambda_values.is_empty() {
            return Err(Error::InvalidParameter("grid must be nonempty".into()));
        }
        if let Some(&k) = self.k_values.iter().find(|&&k| k < 1 || k > d) {
            return Err(Error::InvalidParameter(format!(
                "grid k = {k} is outside 1..={d}"
            )));
        }
        if let Some(&l) = self
            .lambda_values
            .iter()
            .find(|&&l| l <= 0.0 || !l.is_finite())
        {
            return Err(Error::InvalidParameter(format!(
                "grid lambda values must be positive and finite, got {l}"
            )));
        }
        Ok(())
    }
}

/// One grid cell's outcome. Failed fits keep their error message and are
/// skipped during winner selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub k: usize,
    pub lambda: f64,
    pub score: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSearchReport {
    /// All cells in grid order: k outer, lambda inner.
    pub cells: Vec<GridCell>,
    pub best_index: usize,
    /// Train-split model of the winning cell.
    pub model: Model,
    pub metric: Metric,
}

impl GridSearchReport {
    pub fn best(&self) -> &GridCell {
        &self.cells[self.best_index]
    }

    pub fn failed_cells(&self) -> usize {
        self.cells.iter().filter(|c| c.error.is_some()).count()
    }
}

/// Ties go to the smaller k and then to the larger lambda, preferring the
/// simplest model and keeping winners deterministic.
fn cell_better(a: &GridCell, b: &GridCell, metric: Metric) -> bool {
    let (sa, sb) = (a.score.unwrap(), b.score.unwrap());
    if sa != sb {
        return if metric.higher_is_better() { sa > sb } else { sa < sb };
    }
    if a.k != b.k {
        return a.k < b.k;
    }
    a.lambda > b.lambda
}

/// Fit every (k, lambda) cell on the training split, score it on the
/// validation split, and return the full report plus the winning model.
///
/// Cells are independent and run in parallel; the report is assembled in
/// grid order, so results are deterministic. Individual cell failures are
/// recorded, not fatal, unless every cell fails.
pub fn grid_search(
    train: &Dataset,
    val: &Dataset,
    spec: &LossSpec,
    grid: &GridSpec,
    cfg: &SolverConfig,
) -> Result<GridSearchReport> {
    if train.d() != val.d() {
        return Err(Error::DimensionMismatch(format!(
            "train has {} features but val has {}",
            train.d(),
            val.d()
        )));
    }
    if train.target_kind() != val.target_kind() {
        return Err(Error::InvalidInput(
            "train and val must share a target kind".into(),
        ));
    }
    if grid.metric == Metric::Accuracy && train.target_kind() != TargetKind::Binary {
        return Err(Error::InvalidInput(
            "accuracy selection requires binary targets".into(),
        ));
    }
    grid.validate(train.d())?;

    let pairs: Vec<(usize, f64)> = grid
        .effective_k_values(train.d())
        .iter()
        .flat_map(|&k| grid.lambda_values.iter().map(move |&l| (k, l)))
        .collect();

    let outcomes: Vec<(GridCell, Option<FitResult>)> = pairs
        .par_iter()
        .map(|&(k, lambda)| match fit(train, spec, k, lambda, cfg) {
            Ok(res) => {
                let scores = predict_scores(res.beta.view(), val.x())
                    .expect("validated dimensions");
                let score = match grid.metric {
                    Metric::Accuracy => accuracy(classify(scores.view()).view(), val.y()),
                    Metric::MseMean => mse(scores.view(), val.y(), MseMode::Mean),
                    Metric::MseSum => mse(scores.view(), val.y(), MseMode::Sum),
                }
                .expect("validated lengths");
                let cell = GridCell {
                    k,
                    lambda,
                    score: Some(score),
                    iterations: res.iterations,
                    converged: res.converged,
                    error: None,
                };
                (cell, Some(res))
            }
            Err(e) => (
                GridCell {
                    k,
                    lambda,
                    score: None,
                    iterations: 0,
                    converged: false,
                    error: Some(e.to_string()),
                },
                None,
            ),
        })
        .collect();

    let mut best: Option<usize> = None;
    for (i, (cell, _)) in outcomes.iter().enumerate() {
        if cell.score.is_none() {
            continue;
        }
        match best {
            None => best = Some(i),
            Some(b) => {
                if cell_better(cell, &outcomes[b].0, grid.metric) {
                    best = Some(i);
                }
            }
        }
    }
    let best_index = best.ok_or_else(|| Error::AllCellsFailed {
        cells: outcomes.len(),
        first: outcomes
            .first()
            .and_then(|(c, _)| c.error.clone())
            .unwrap_or_default(),
    })?;

    let winner = &outcomes[best_index];
    let model = Model::from_fit(
        spec,
        winner.0.k,
        winner.0.lambda,
        winner.1.as_ref().expect("winner fitted"),
    );
    Ok(GridSearchReport {
        cells: outcomes.into_iter().map(|(c, _)| c).collect(),
        best_index,
        model,
        metric: grid.metric,
    })
}

/// Everything needed to run the synthetic benchmark: how many instances,
/// their seeds, which losses, the search grid, the toy-data shape, and the
/// solver settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentProtocol {
    pub instances: usize,
    pub base_seed: u64,
    pub losses: Vec<LossSpec>,
    /// `None` searches k over `1..=d`.
    pub k_values: Option<Vec<usize>>,
    pub lambda_values: Vec<f64>,
    pub toy: ToyConfig,
    pub solver: SolverConfig,
}

/// Toy-data shape used by the benchmark.
///
/// The generator's per-dimension scales are free parameters; these values
/// put the achievable accuracy of the default geometry in the high 0.8s so
/// that regularizer differences are visible rather than saturated.
pub fn experiment_toy_config() -> ToyConfig {
    ToyConfig {
        noise_sigma: 2.6,
        background_sigma: 2.6,
        ..ToyConfig::default()
    }
}

fn all_losses(h: f64, eps: f64) -> Result<Vec<LossSpec>> {
    Ok(vec![
        LossSpec::squared(),
        LossSpec::one_sided_squared(),
        LossSpec::huber_hinge(h)?,
        LossSpec::logistic(),
        LossSpec::exponential(),
        LossSpec::absolute(h)?,
        LossSpec::eps_insensitive(h, eps)?,
    ])
}

impl ExperimentProtocol {
    /// The full benchmark: 20 instances, all seven losses with `h = 0.1` and
    /// `eps = 1`, k over `1..=d`, lambda over `1e-15..=1e5`. Hours-scale.
    pub fn standard() -> Self {
        Self {
            instances: 20,
            base_seed: 0,
            losses: all_losses(0.1, 1.0).expect("valid defaults"),
            k_values: None,
            lambda_values: lambda_grid_full(),
            toy: experiment_toy_config(),
            solver: SolverConfig::default(),
        }
    }

    /// Coarsened variant for CI: 5 instances, `k in {1, 5, 10, 15, 20, 40, 65}`,
    /// lambda over `1e-4..=1e2`. Minutes-scale.
    pub fn fast() -> Self {
        Self {
            instances: 5,
            k_values: Some(vec![1, 5, 10, 15, 20, 40, 65]),
            lambda_values: (-4..=2).map(|i| 10f64.powi(i)).collect(),
            ..Self::standard()
        }
    }
}

/// Aggregate line of the benchmark table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub loss: String,
    pub regularizer: String,
    pub metric: String,
    pub mean: f64,
    pub std: f64,
    pub n_instances: usize,
}

/// Per-(instance, loss, regularizer) detail retained for auditing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceOutcome {
    pub seed: u64,
    pub loss: String,
    pub regularizer: String,
    pub selected_k: Option<usize>,
    pub selected_lambda: Option<f64>,
    pub validation_score: Option<f64>,
    pub test_accuracy: Option<f64>,
    pub test_mse_mean: Option<f64>,
    pub test_mse_sum: Option<f64>,
    pub failed_cells: usize,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentTable {
    pub protocol: ExperimentProtocol,
    pub rows: Vec<ExperimentRow>,
    pub outcomes: Vec<InstanceOutcome>,
}

impl ExperimentTable {
    pub fn row(&self, loss: &str, regularizer: &str, metric: &str) -> Option<&ExperimentRow> {
        self.rows
            .iter()
            .find(|r| r.loss == loss && r.regularizer == regularizer && r.metric == metric)
    }

    /// CSV with one aggregate row per (loss, regularizer, metric).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("loss,regularizer,metric,mean,std,n_instances\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.loss, r.regularizer, r.metric, r.mean, r.std, r.n_instances
            ));
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn mean_and_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

/// Run the benchmark: for every instance, loss, and regularizer row, grid
/// search on train/val, evaluate the selected model on the test split, and
/// aggregate mean and (sample) standard deviation across instances.
///
/// Model selection maximizes validation accuracy, the binary-target
/// convention; test MSE is reported for those same accuracy-selected models
/// in both mean and sum form. Rows where the whole search failed are counted
/// out of `n_instances` rather than aborting the run.
pub fn run_experiment(protocol: &ExperimentProtocol) -> Result<ExperimentTable> {
    if protocol.instances == 0 {
        return Err(Error::InvalidParameter("instances must be at least 1".into()));
    }
    if protocol.losses.is_empty() {
        return Err(Error::InvalidParameter("need at least one loss".into()));
    }
    let d = protocol.toy.d();
    let k_values: Vec<usize> = match &protocol.k_values {
        Some(ks) => ks.clone(),
        None => (1..=d).collect(),
    };
    let modes = [
        RegularizerMode::KSupport,
        RegularizerMode::L1Fixed,
        RegularizerMode::L2Fixed,
    ];

    let mut outcomes = Vec::new();
    for index in 0..protocol.instances {
        let seed = protocol.base_seed + index as u64;
        let toy = generate_toy(&ToyConfig { seed, ..protocol.toy.clone() })?;
        for spec in &protocol.losses {
            for mode in modes {
                let grid = GridSpec {
                    k_values: k_values.clone(),
                    lambda_values: protocol.lambda_values.clone(),
                    metric: Metric::Accuracy,
                    regularizer_mode: mode,
                };
                let outcome = match grid_search(&toy.train, &toy.val, spec, &grid, &protocol.solver)
                {
                    Ok(report) => {
                        let scores = predict_scores(
                            ndarray::Array1::from_vec(report.model.beta.clone()).view(),
                            toy.test.x(),
                        )
                        .expect("validated dimensions");
                        let acc = accuracy(classify(scores.view()).view(), toy.test.y())
                            .expect("validated lengths");
                        let mse_mean = mse(scores.view(), toy.test.y(), MseMode::Mean)
                            .expect("validated lengths");
                        let mse_sum = mse(scores.view(), toy.test.y(), MseMode::Sum)
                            .expect("validated lengths");
                        InstanceOutcome {
                            seed,
                            loss: spec.kind().to_string(),
                            regularizer: mode.as_str().to_string(),
                            selected_k: Some(report.best().k),
                            selected_lambda: Some(report.best().lambda),
                            validation_score: report.best().score,
                            test_accuracy: Some(acc),
                            test_mse_mean: Some(mse_mean),
                            test_mse_sum: Some(mse_sum),
                            failed_cells: report.failed_cells(),
                            error: None,
                        }
                    }
                    Err(e) => InstanceOutcome {
                        seed,
                        loss: spec.kind().to_string(),
                        regularizer: mode.as_str().to_string(),
                        selected_k: None,
                        selected_lambda: None,
                        validation_score: None,
                        test_accuracy: None,
                        test_mse_mean: None,
                        test_mse_sum: None,
                        failed_cells: k_values.len() * protocol.lambda_values.len(),
                        error: Some(e.to_string()),
                    },
                };
                outcomes.push(outcome);
            }
        }
    }

    let mut rows = Vec::new();
    for spec in &protocol.losses {
        let loss_name = spec.kind().to_string();
        for mode in modes {
            let picks: Vec<&InstanceOutcome> = outcomes
                .iter()
                .filter(|o| o.loss == loss_name && o.regularizer == mode.as_str())
                .collect();
            for metric in ["accuracy", "mse_mean", "mse_sum"] {
                let values: Vec<f64> = picks
                    .iter()
                    .filter_map(|o| match metric {
                        "accuracy" => o.test_accuracy,
                        "mse_mean" => o.test_mse_mean,
                        _ => o.test_mse_sum,
                    })
                    .collect();
                let (mean, std) = mean_and_std(&values);
                rows.push(ExperimentRow {
                    loss: loss_name.clone(),
                    regularizer: mode.as_str().to_string(),
                    metric: metric.to_string(),
                    mean,
                    std,
                    n_instances: values.len(),
                });
            }
        }
    }

    Ok(ExperimentTable {
        protocol: protocol.clone(),
        rows,
        outcomes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn accuracy_basics() {
        let a = array![1.0, -1.0, 1.0, 1.0];
        assert_eq!(accuracy(a.view(), a.view()).unwrap(), 1.0);
        let flipped = a.mapv(|v| -v);
        assert_eq!(accuracy(flipped.view(), a.view()).unwrap(), 0.0);
        let mixed = array![1.0, -1.0, 1.0, -1.0];
        assert_eq!(accuracy(mixed.view(), a.view()).unwrap(), 0.75);
        let short = array![1.0];
        assert!(accuracy(short.view(), a.view()).is_err());
    }

    #[test]
    fn mse_basics() {
        let y = array![1.0, 2.0];
        assert_eq!(mse(y.view(), y.view(), MseMode::Mean).unwrap(), 0.0);
        let shifted = y.mapv(|v| v + 1.0);
        assert_eq!(mse(shifted.view(), y.view(), MseMode::Mean).unwrap(), 1.0);
        let scores = array![2.0, 5.0]; // residuals 1 and 3
        assert_eq!(mse(scores.view(), y.view(), MseMode::Sum).unwrap(), 10.0);
    }

    fn tiny_binary_dataset() -> (Dataset, Dataset) {
        let x = array![
            [1.0, 0.2],
            [0.8, -0.1],
            [-0.9, 0.1],
            [-1.1, -0.2],
            [1.2, 0.0],
            [-0.8, 0.3]
        ];
        let y = array![1.0, 1.0, -1.0, -1.0, 1.0, -1.0];
        let train = Dataset::new(x.clone(), y.clone(), TargetKind::Binary).unwrap();
        let val = Dataset::new(x, y, TargetKind::Binary).unwrap();
        (train, val)
    }

    #[test]
    fn single_cell_grid_wins() {
        let (train, val) = tiny_binary_dataset();
        let grid = GridSpec {
            k_values: vec![1],
            lambda_values: vec![0.1],
            metric: Metric::Accuracy,
            regularizer_mode: RegularizerMode::KSupport,
        };
        let report = grid_search(
            &train,
            &val,
            &LossSpec::squared(),
            &grid,
            &SolverConfig::default(),
        )
        .unwrap();
        assert_eq!(report.cells.len(), 1);
        assert_eq!(report.best_index, 0);
        assert_eq!(report.model.k, 1);
    }

    #[test]
    fn tie_break_prefers_small_k_then_large_lambda() {
        let (train, val) = tiny_binary_dataset();
        // enormous lambdas all shrink to ~zero coefficients, so every cell
        // predicts the same labels and ties on accuracy
        let grid = GridSpec {
            k_values: vec![2, 1],
            lambda_values: vec![1e8, 1e9],
            metric: Metric::Accuracy,
            regularizer_mode: RegularizerMode::KSupport,
        };
        let report = grid_search(
            &train,
            &val,
            &LossSpec::squared(),
            &grid,
            &SolverConfig::default(),
        )
        .unwrap();
        let scores: Vec<Option<f64>> = report.cells.iter().map(|c| c.score).collect();
        assert!(scores.iter().all(|s| s == &scores[0]));
        assert_eq!(report.best().k, 1);
        assert_eq!(report.best().lambda, 1e9);
    }

    #[test]
    fn report_has_full_grid_and_extremal_winner() {
        let (train, val) = tiny_binary_dataset();
        let grid = GridSpec {
            k_values: vec![1, 2],
            lambda_values: vec![1e-3, 1e-1, 10.0],
            metric: Metric::Accuracy,
            regularizer_mode: RegularizerMode::KSupport,
        };
        let report = grid_search(
            &train,
            &val,
            &LossSpec::huber_hinge(0.1).unwrap(),
            &grid,
            &SolverConfig::default(),
        )
        .unwrap();
        assert_eq!(report.cells.len(), 6);
        let best = report.best().score.unwrap();
        for c in &report.cells {
            assert!(c.score.unwrap() <= best);
        }
    }

    #[test]
    fn fixed_modes_reproduce_pinned_k() {
        let (train, val) = tiny_binary_dataset();
        let lambdas = vec![1e-2, 1.0];
        let base = GridSpec {
            k_values: vec![1, 2],
            lambda_values: lambdas.clone(),
            metric: Metric::Accuracy,
            regularizer_mode: RegularizerMode::L1Fixed,
        };
        let spec = LossSpec::logistic();
        let cfg = SolverConfig::default();
        let l1 = grid_search(&train, &val, &spec, &base, &cfg).unwrap();
        let pinned = GridSpec {
            k_values: vec![1],
            regularizer_mode: RegularizerMode::KSupport,
            ..base.clone()
        };
        let manual = grid_search(&train, &val, &spec, &pinned, &cfg).unwrap();
        assert_eq!(l1.cells, manual.cells);

        let l2 = grid_search(
            &train,
            &val,
            &spec,
            &GridSpec { regularizer_mode: RegularizerMode::L2Fixed, ..base },
            &cfg,
        )
        .unwrap();
        assert!(l2.cells.iter().all(|c| c.k == 2));
    }

    #[test]
    fn superset_lambda_grid_never_worse() {
        let (train, val) = tiny_binary_dataset();
        let spec = LossSpec::squared();
        let cfg = SolverConfig::default();
        let small = GridSpec {
            k_values: vec![1, 2],
            lambda_values: vec![1e-2, 1.0],
            metric: Metric::Accuracy,
            regularizer_mode: RegularizerMode::KSupport,
        };
        let big = GridSpec {
            lambda_values: vec![1e-4, 1e-2, 1.0, 1e2],
            ..small.clone()
        };
        let s = grid_search(&train, &val, &spec, &small, &cfg).unwrap();
        let b = grid_search(&train, &val, &spec, &big, &cfg).unwrap();
        assert!(b.best().score.unwrap() >= s.best().score.unwrap());
    }

    #[test]
    fn separable_toy_reaches_high_validation_accuracy() {
        let cfg = ToyConfig {
            d_signal: 5,
            d_noise: 10,
            noise_sigma: 0.1,
            background_sigma: 1.0,
            n_train: 40,
            n_val: 40,
            n_test: 40,
            seed: 11,
            ..ToyConfig::default()
        };
        let toy = generate_toy(&cfg).unwrap();
        let grid = GridSpec {
            k_values: vec![1, 5, 10, 15],
            lambda_values: vec![1e-6, 1e-4, 1e-2, 1.0],
            metric: Metric::Accuracy,
            regularizer_mode: RegularizerMode::KSupport,
        };
        let report = grid_search(
            &toy.train,
            &toy.val,
            &LossSpec::huber_hinge(0.1).unwrap(),
            &grid,
            &SolverConfig::default(),
        )
        .unwrap();
        assert!(report.best().score.unwrap() >= 0.95);
    }

    #[test]
    fn experiment_single_instance_table() {
        let protocol = ExperimentProtocol {
            instances: 1,
            base_seed: 42,
            losses: vec![LossSpec::squared()],
            k_values: Some(vec![1, 15]),
            lambda_values: vec![1e-2, 1.0],
            toy: ToyConfig {
                d_signal: 5,
                d_noise: 10,
                n_train: 20,
                n_val: 20,
                n_test: 20,
                ..experiment_toy_config()
            },
            solver: SolverConfig::default(),
        };
        let table = run_experiment(&protocol).unwrap();
        // 1 loss x 3 regularizers x 3 metrics
        assert_eq!(table.rows.len(), 9);
        for row in &table.rows {
            assert_eq!(row.n_instances, 1);
            assert_eq!(row.std, 0.0);
        }
        assert_eq!(table.outcomes.len(), 3);
        // determinism end to end
        let again = run_experiment(&protocol).unwrap();
        assert_eq!(table, again);
        assert_eq!(table.to_csv(), again.to_csv());
    }
}
