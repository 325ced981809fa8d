//! k-support-norm regularized risk minimization.
//!
//! The crate provides the norm and the proximal operator of its square
//! ([`norms`]), seven smooth(ed) convex losses with matching gradients and
//! step-size constants ([`losses`]), an accelerated proximal-gradient solver
//! ([`solver`]), dataset handling and a synthetic data generator ([`data`]),
//! and validation-split model selection plus a multi-loss benchmark
//! ([`modelsel`]). The `ksup` binary exposes all of it on the command line.

pub mod data;
pub mod error;
pub mod losses;
pub mod model;
pub mod modelsel;
pub mod norms;
pub mod solver;

pub use data::{
    classify, generate_toy, predict_scores, read_csv, write_csv, write_toy_files, Dataset,
    TargetKind, ToyConfig, ToyInstance,
};
pub use error::{Error, Result};
pub use losses::{
    curve_point, evaluate, lipschitz_constant, loss_gradient, loss_value, LossEvaluation,
    LossKind, LossSpec,
};
pub use model::Model;
pub use modelsel::{
    accuracy, experiment_toy_config, grid_search, lambda_grid_full, mse, run_experiment,
    ExperimentProtocol, ExperimentRow, ExperimentTable, GridCell, GridSearchReport, GridSpec,
    InstanceOutcome, Metric, MseMode, RegularizerMode,
};
pub use norms::{find_r, ksup_norm, prox_ksup_sq, prox_oracle, KSupportDecomposition};
pub use solver::{fit, objective, spectral_norm_sq, FitResult, SolverConfig, SpectralEstimate};
