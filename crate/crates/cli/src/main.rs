//! `ksup`: evaluate k-support norms, fit regularized models, predict, grid
//! search, generate toy data, run the synthetic benchmark, and emit loss
//! curves.
//!
//! Exit codes are stable for scripting: 0 on success, 2 on usage errors
//! (bad flags), 1 on runtime errors (bad files, bad parameters, solver
//! failures).

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use ndarray::Array1;

use ksupport::data::write_text_atomic;
use ksupport::{
    classify, curve_point, generate_toy, grid_search, read_csv, run_experiment, write_toy_files,
    Dataset, ExperimentProtocol, GridSpec, LossKind, LossSpec, Metric, Model, RegularizerMode,
    SolverConfig, TargetKind, ToyConfig,
};

#[derive(Parser)]
#[command(
    name = "ksup",
    version,
    about = "k-support-norm regularized risk minimization",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the k-support norm of a vector stored as a single CSV row
    Norm {
        /// CSV file holding one row of numbers
        #[arg(long)]
        input: PathBuf,
        /// Support parameter, between 1 and the vector length
        #[arg(long)]
        k: usize,
    },
    /// Fit a regularized model on a training CSV and write it as JSON
    Fit {
        /// Loss name: squared, one-sided-squared, hinge, logistic,
        /// exponential, absolute, or eps-insensitive
        #[arg(long)]
        loss: String,
        #[arg(long)]
        k: usize,
        /// Regularization weight (applied to half the squared norm)
        #[arg(long)]
        lambda: f64,
        /// Huber width for hinge/absolute/eps-insensitive (default 0.1)
        #[arg(long)]
        h: Option<f64>,
        /// Insensitivity width for eps-insensitive (default 1)
        #[arg(long)]
        eps: Option<f64>,
        /// Training CSV; the last column is the target
        #[arg(long)]
        train: PathBuf,
        /// Where to write the model JSON
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        max_iter: Option<usize>,
        /// Overrides the per-loss Lipschitz constant
        #[arg(long)]
        lipschitz: Option<f64>,
        /// Skip the first row of the training CSV
        #[arg(long)]
        has_header: bool,
    },
    /// Score a dataset CSV with a fitted model, writing score,label rows
    Predict {
        #[arg(long)]
        model: PathBuf,
        /// Dataset CSV in the same layout as training data
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long)]
        has_header: bool,
    },
    /// Search a (k, lambda) grid on a train/validation pair
    Gridsearch {
        #[arg(long)]
        loss: String,
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        val: PathBuf,
        /// Where to write the per-cell report CSV
        #[arg(long)]
        report: PathBuf,
        /// Optionally write the winning model JSON here
        #[arg(long)]
        model: Option<PathBuf>,
        /// Comma-separated k grid (default 1..=d)
        #[arg(long)]
        k_values: Option<String>,
        /// Comma-separated lambda grid (default powers of ten, 1e-15..=1e5)
        #[arg(long)]
        lambdas: Option<String>,
        /// ksup, l1 (pin k = 1), or l2 (pin k = d)
        #[arg(long, default_value = "ksup")]
        mode: String,
        /// accuracy, mse-mean, or mse-sum (default by target kind)
        #[arg(long)]
        metric: Option<String>,
        #[arg(long)]
        h: Option<f64>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        max_iter: Option<usize>,
        #[arg(long)]
        has_header: bool,
    },
    /// Generate a synthetic train/val/test triple plus a meta file
    Toy {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output prefix; writes `<prefix>.{train,val,test}.csv` and `<prefix>.meta.json`
        #[arg(long, default_value = "toy")]
        prefix: PathBuf,
        #[arg(long, default_value_t = 15)]
        d_signal: usize,
        #[arg(long, default_value_t = 50)]
        d_noise: usize,
        #[arg(long, default_value_t = 50)]
        n_train: usize,
        #[arg(long, default_value_t = 50)]
        n_val: usize,
        #[arg(long, default_value_t = 250)]
        n_test: usize,
        #[arg(long, default_value_t = 1.0)]
        signal_sigma: f64,
        #[arg(long, default_value_t = 1.0)]
        noise_sigma: f64,
        #[arg(long, default_value_t = 1.0)]
        background_sigma: f64,
    },
    /// Run the multi-loss benchmark across toy instances and tabulate results
    Experiment {
        /// Number of random instances (default 20, or 5 with --fast)
        #[arg(long)]
        instances: Option<usize>,
        #[arg(long)]
        base_seed: Option<u64>,
        /// Coarsened grid for quick runs: k in {1,5,10,15,20,40,65},
        /// lambda in 1e-4..=1e2, 5 instances
        #[arg(long)]
        fast: bool,
        /// Output prefix; writes `<prefix>.csv` and `<prefix>.json`
        #[arg(long, default_value = "experiment")]
        out: PathBuf,
        /// Comma-separated loss names (default: all seven)
        #[arg(long)]
        losses: Option<String>,
        /// Huber width for the smoothed losses
        #[arg(long, default_value_t = 0.1)]
        h: f64,
        /// Insensitivity width for eps-insensitive
        #[arg(long, default_value_t = 1.0)]
        eps: f64,
        #[arg(long)]
        signal_sigma: Option<f64>,
        #[arg(long)]
        noise_sigma: Option<f64>,
        #[arg(long)]
        background_sigma: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        max_iter: Option<usize>,
    },
    /// Emit per-sample loss and gradient curves over an input sweep
    Losscurve {
        #[arg(long)]
        loss: String,
        #[arg(long)]
        h: Option<f64>,
        #[arg(long)]
        eps: Option<f64>,
        /// Sweep bounds; the input is the margin for classification losses
        /// and the residual for the others
        #[arg(long, num_args = 2, value_names = ["START", "END"], allow_negative_numbers = true)]
        range: Vec<f64>,
        #[arg(long)]
        step: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli.command) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

fn run(command: Command) -> ksupport::Result<()> {
    match command {
        Command::Norm { input, k } => cmd_norm(&input, k),
        Command::Fit {
            loss,
            k,
            lambda,
            h,
            eps,
            train,
            model,
            tol,
            max_iter,
            lipschitz,
            has_header,
        } => cmd_fit(&loss, k, lambda, h, eps, &train, &model, tol, max_iter, lipschitz, has_header),
        Command::Predict {
            model,
            data,
            output,
            has_header,
        } => cmd_predict(&model, &data, &output, has_header),
        Command::Gridsearch {
            loss,
            train,
            val,
            report,
            model,
            k_values,
            lambdas,
            mode,
            metric,
            h,
            eps,
            tol,
            max_iter,
            has_header,
        } => cmd_gridsearch(
            &loss, &train, &val, &report, model.as_deref(), k_values.as_deref(),
            lambdas.as_deref(), &mode, metric.as_deref(), h, eps, tol, max_iter, has_header,
        ),
        Command::Toy {
            seed,
            prefix,
            d_signal,
            d_noise,
            n_train,
            n_val,
            n_test,
            signal_sigma,
            noise_sigma,
            background_sigma,
        } => {
            let cfg = ToyConfig {
                d_signal,
                d_noise,
                n_train,
                n_val,
                n_test,
                signal_sigma,
                noise_sigma,
                background_sigma,
                seed,
            };
            let instance = generate_toy(&cfg)?;
            let paths = write_toy_files(&instance, &prefix)?;
            for p in paths {
                println!("wrote {}", p.display());
            }
            Ok(())
        }
        Command::Experiment {
            instances,
            base_seed,
            fast,
            out,
            losses,
            h,
            eps,
            signal_sigma,
            noise_sigma,
            background_sigma,
            tol,
            max_iter,
        } => cmd_experiment(
            instances, base_seed, fast, &out, losses.as_deref(), h, eps, signal_sigma,
            noise_sigma, background_sigma, tol, max_iter,
        ),
        Command::Losscurve {
            loss,
            h,
            eps,
            range,
            step,
            out,
        } => cmd_losscurve(&loss, h, eps, &range, step, &out),
    }
}

/// Render with 12 significant digits, trailing zeros trimmed.
fn format_significant(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn read_vector(path: &std::path::Path) -> ksupport::Result<Array1<f64>> {
    let text = std::fs::read_to_string(path).map_err(|source| ksupport::Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let line = lines.next().ok_or_else(|| ksupport::Error::Parse {
        path: path.to_path_buf(),
        row: 1,
        col: 1,
        message: "empty file".into(),
    })?;
    if lines.next().is_some() {
        return Err(ksupport::Error::InvalidInput(format!(
            "{} must hold a single CSV row",
            path.display()
        )));
    }
    let mut values = Vec::new();
    for (j, field) in line.trim_end_matches('\r').split(',').enumerate() {
        let v: f64 = field.trim().parse().map_err(|e| ksupport::Error::Parse {
            path: path.to_path_buf(),
            row: 1,
            col: j + 1,
            message: format!("{e}: {field:?}"),
        })?;
        values.push(v);
    }
    Ok(Array1::from_vec(values))
}

fn build_loss_spec(name: &str, h: Option<f64>, eps: Option<f64>) -> ksupport::Result<LossSpec> {
    let kind: LossKind = name.parse()?;
    let h = if kind.uses_huber() { h } else { None };
    let eps = if kind == LossKind::EpsInsensitive { eps } else { None };
    LossSpec::new(kind, h, eps)
}

fn solver_config(
    tol: Option<f64>,
    max_iter: Option<usize>,
    lipschitz: Option<f64>,
) -> SolverConfig {
    let mut cfg = SolverConfig::default();
    if let Some(t) = tol {
        cfg.tol = t;
    }
    if let Some(m) = max_iter {
        cfg.max_iter = m;
    }
    cfg.lipschitz_override = lipschitz;
    cfg
}

fn target_kind_for(spec: &LossSpec) -> TargetKind {
    if spec.kind().is_classification() {
        TargetKind::Binary
    } else {
        TargetKind::Real
    }
}

fn warn_if_vacuous(spec: &LossSpec, data: &Dataset) {
    if let Some(msg) = spec.classification_consistency_warning() {
        if data.y().iter().all(|&t| t == 1.0 || t == -1.0) {
            eprintln!("warning: {msg}");
        }
    }
}

fn cmd_norm(input: &std::path::Path, k: usize) -> ksupport::Result<()> {
    let v = read_vector(input)?;
    let norm = ksupport::ksup_norm(v.view(), k)?;
    println!("{}", format_significant(norm, 12));
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_fit(
    loss: &str,
    k: usize,
    lambda: f64,
    h: Option<f64>,
    eps: Option<f64>,
    train: &std::path::Path,
    model_out: &std::path::Path,
    tol: Option<f64>,
    max_iter: Option<usize>,
    lipschitz: Option<f64>,
    has_header: bool,
) -> ksupport::Result<()> {
    let spec = build_loss_spec(loss, h, eps)?;
    let cfg = solver_config(tol, max_iter, lipschitz);
    let data = read_csv(train, has_header, target_kind_for(&spec))?;
    warn_if_vacuous(&spec, &data);
    let fit = ksupport::fit(&data, &spec, k, lambda, &cfg)?;
    let model = Model::from_fit(&spec, k, lambda, &fit);
    model.save(model_out)?;
    println!(
        "wrote {} (objective {:.6e}, {} iterations, converged: {})",
        model_out.display(),
        fit.objective,
        fit.iterations,
        fit.converged
    );
    Ok(())
}

fn cmd_predict(
    model_path: &std::path::Path,
    data_path: &std::path::Path,
    output: &std::path::Path,
    has_header: bool,
) -> ksupport::Result<()> {
    let model = Model::load(model_path)?;
    let spec = model.loss_spec()?;
    let data = read_csv(data_path, has_header, target_kind_for(&spec))?;
    let scores = model.predict(data.x())?;
    let labels = classify(scores.view());
    let mut out = String::from("score,label\n");
    for (s, l) in scores.iter().zip(labels.iter()) {
        out.push_str(&format!("{s},{l}\n"));
    }
    write_text_atomic(output, &out)?;
    println!("wrote {} ({} rows)", output.display(), scores.len());
    Ok(())
}

fn parse_usize_list(text: &str) -> ksupport::Result<Vec<usize>> {
    text.split(',')
        .map(|s| {
            s.trim().parse::<usize>().map_err(|e| {
                ksupport::Error::InvalidParameter(format!("bad integer {s:?} in list: {e}"))
            })
        })
        .collect()
}

fn parse_f64_list(text: &str) -> ksupport::Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim().parse::<f64>().map_err(|e| {
                ksupport::Error::InvalidParameter(format!("bad number {s:?} in list: {e}"))
            })
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn cmd_gridsearch(
    loss: &str,
    train: &std::path::Path,
    val: &std::path::Path,
    report_out: &std::path::Path,
    model_out: Option<&std::path::Path>,
    k_values: Option<&str>,
    lambdas: Option<&str>,
    mode: &str,
    metric: Option<&str>,
    h: Option<f64>,
    eps: Option<f64>,
    tol: Option<f64>,
    max_iter: Option<usize>,
    has_header: bool,
) -> ksupport::Result<()> {
    let spec = build_loss_spec(loss, h, eps)?;
    let cfg = solver_config(tol, max_iter, None);
    let kind = target_kind_for(&spec);
    let train = read_csv(train, has_header, kind)?;
    let val = read_csv(val, has_header, kind)?;
    warn_if_vacuous(&spec, &train);
    let regularizer_mode = match mode {
        "ksup" => RegularizerMode::KSupport,
        "l1" => RegularizerMode::L1Fixed,
        "l2" => RegularizerMode::L2Fixed,
        other => {
            return Err(ksupport::Error::InvalidParameter(format!(
                "unknown mode {other:?}; expected ksup, l1, or l2"
            )))
        }
    };
    let metric = match metric {
        Some("accuracy") => Metric::Accuracy,
        Some("mse-mean") => Metric::MseMean,
        Some("mse-sum") => Metric::MseSum,
        Some(other) => {
            return Err(ksupport::Error::InvalidParameter(format!(
                "unknown metric {other:?}; expected accuracy, mse-mean, or mse-sum"
            )))
        }
        None => {
            if kind == TargetKind::Binary {
                Metric::Accuracy
            } else {
                Metric::MseMean
            }
        }
    };
    let grid = GridSpec {
        k_values: match k_values {
            Some(text) => parse_usize_list(text)?,
            None => (1..=train.d()).collect(),
        },
        lambda_values: match lambdas {
            Some(text) => parse_f64_list(text)?,
            None => ksupport::lambda_grid_full(),
        },
        metric,
        regularizer_mode,
    };
    let report = grid_search(&train, &val, &spec, &grid, &cfg)?;

    let mut out = String::from("k,lambda,score,iterations,converged,error\n");
    for cell in &report.cells {
        let score = cell.score.map(|s| s.to_string()).unwrap_or_default();
        let error = cell
            .error
            .as_deref()
            .unwrap_or("")
            .replace(',', ";");
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            cell.k, cell.lambda, score, cell.iterations, cell.converged, error
        ));
    }
    write_text_atomic(report_out, &out)?;
    println!(
        "wrote {} ({} cells; best k = {}, lambda = {}, {} = {})",
        report_out.display(),
        report.cells.len(),
        report.best().k,
        report.best().lambda,
        report.metric.as_str(),
        report.best().score.unwrap_or(f64::NAN)
    );
    if let Some(path) = model_out {
        report.model.save(path)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_experiment(
    instances: Option<usize>,
    base_seed: Option<u64>,
    fast: bool,
    out: &std::path::Path,
    losses: Option<&str>,
    h: f64,
    eps: f64,
    signal_sigma: Option<f64>,
    noise_sigma: Option<f64>,
    background_sigma: Option<f64>,
    tol: Option<f64>,
    max_iter: Option<usize>,
) -> ksupport::Result<()> {
    let mut protocol = if fast {
        ExperimentProtocol::fast()
    } else {
        ExperimentProtocol::standard()
    };
    if let Some(n) = instances {
        protocol.instances = n;
    }
    if let Some(s) = base_seed {
        protocol.base_seed = s;
    }
    if let Some(v) = signal_sigma {
        protocol.toy.signal_sigma = v;
    }
    if let Some(v) = noise_sigma {
        protocol.toy.noise_sigma = v;
    }
    if let Some(v) = background_sigma {
        protocol.toy.background_sigma = v;
    }
    protocol.solver = solver_config(tol, max_iter, None);
    protocol.losses = match losses {
        None => {
            let mut specs = Vec::new();
            for kind in LossKind::ALL {
                let h = kind.uses_huber().then_some(h);
                let eps = (kind == LossKind::EpsInsensitive).then_some(eps);
                specs.push(LossSpec::new(kind, h, eps)?);
            }
            specs
        }
        Some(list) => {
            let mut specs = Vec::new();
            for name in list.split(',') {
                // build_loss_spec routes h and eps to the kinds that take them
                specs.push(build_loss_spec(name.trim(), Some(h), Some(eps))?);
            }
            specs
        }
    };
    for spec in &protocol.losses {
        if let Some(msg) = spec.classification_consistency_warning() {
            eprintln!("warning: {msg}");
        }
    }

    let table = run_experiment(&protocol)?;
    let csv_path = out.with_extension("csv");
    let json_path = out.with_extension("json");
    write_text_atomic(&csv_path, &table.to_csv())?;
    write_text_atomic(&json_path, &table.to_json()?)?;
    println!(
        "wrote {} and {} ({} aggregate rows, {} instance outcomes)",
        csv_path.display(),
        json_path.display(),
        table.rows.len(),
        table.outcomes.len()
    );
    Ok(())
}

fn cmd_losscurve(
    loss: &str,
    h: Option<f64>,
    eps: Option<f64>,
    range: &[f64],
    step: f64,
    out: &std::path::Path,
) -> ksupport::Result<()> {
    let spec = build_loss_spec(loss, h, eps)?;
    if range.len() != 2 {
        return Err(ksupport::Error::InvalidParameter(
            "--range takes exactly two numbers".into(),
        ));
    }
    let (start, end) = (range[0], range[1]);
    if step <= 0.0 || !step.is_finite() {
        return Err(ksupport::Error::InvalidParameter(format!(
            "step must be positive and finite, got {step}"
        )));
    }
    if end < start {
        return Err(ksupport::Error::InvalidParameter(format!(
            "empty range: {end} < {start}"
        )));
    }
    let mut outbuf = String::from("input,loss,gradient\n");
    let mut i = 0usize;
    loop {
        let z = start + i as f64 * step;
        if z > end + step * 1e-9 {
            break;
        }
        let (value, gradient) = curve_point(&spec, z);
        outbuf.push_str(&format!("{z},{value},{gradient}\n"));
        i += 1;
    }
    write_text_atomic(out, &outbuf)?;
    println!("wrote {} ({} samples)", out.display(), i);
    Ok(())
}
