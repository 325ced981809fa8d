//! Dataset container, CSV ingestion and emission, the synthetic toy-data
//! generator, and prediction helpers.

use std::path::{Path, PathBuf};

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{io_err, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetKind {
    /// Targets are exactly -1 or +1.
    Binary,
    Real,
}

/// A design matrix (rows are samples) with its target vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: Array2<f64>,
    y: Array1<f64>,
    target_kind: TargetKind,
}

impl Dataset {
    pub fn new(x: Array2<f64>, y: Array1<f64>, target_kind: TargetKind) -> Result<Self> {
        if x.nrows() == 0 || x.ncols() == 0 {
            return Err(Error::InvalidInput(
                "dataset needs at least one sample and one feature".into(),
            ));
        }
        if x.nrows() != y.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} samples but {} targets",
                x.nrows(),
                y.len()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) || y.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("dataset has non-finite entries".into()));
        }
        if target_kind == TargetKind::Binary {
            if let Some((i, &bad)) = y.iter().enumerate().find(|(_, &t)| t != 1.0 && t != -1.0) {
                return Err(Error::InvalidInput(format!(
                    "binary target at row {} is {bad}, expected -1 or +1",
                    i + 1
                )));
            }
        }
        Ok(Self { x, y, target_kind })
    }

    pub fn x(&self) -> ArrayView2<'_, f64> {
        self.x.view()
    }

    pub fn y(&self) -> ArrayView1<'_, f64> {
        self.y.view()
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn d(&self) -> usize {
        self.x.ncols()
    }

    pub fn target_kind(&self) -> TargetKind {
        self.target_kind
    }
}

/// Configuration for the toy generator: binary labels, `d_signal` informative
/// dimensions carrying `label * signal + noise`, and `d_noise` pure
/// background dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToyConfig {
    pub d_signal: usize,
    pub d_noise: usize,
    pub n_train: usize,
    pub n_val: usize,
    pub n_test: usize,
    pub signal_sigma: f64,
    pub noise_sigma: f64,
    pub background_sigma: f64,
    pub seed: u64,
}

impl Default for ToyConfig {
    fn default() -> Self {
        Self {
            d_signal: 15,
            d_noise: 50,
            n_train: 50,
            n_val: 50,
            n_test: 250,
            signal_sigma: 1.0,
            noise_sigma: 1.0,
            background_sigma: 1.0,
            seed: 0,
        }
    }
}

impl ToyConfig {
    fn validate(&self) -> Result<()> {
        if self.d_signal == 0 {
            return Err(Error::InvalidParameter("d_signal must be positive".into()));
        }
        if self.n_train == 0 || self.n_val == 0 || self.n_test == 0 {
            return Err(Error::InvalidParameter(
                "n_train, n_val, and n_test must all be positive".into(),
            ));
        }
        for (name, v) in [
            ("signal_sigma", self.signal_sigma),
            ("noise_sigma", self.noise_sigma),
            ("background_sigma", self.background_sigma),
        ] {
            if v < 0.0 || !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be nonnegative and finite, got {v}"
                )));
            }
        }
        Ok(())
    }

    pub fn d(&self) -> usize {
        self.d_signal + self.d_noise
    }
}

/// One generated train/val/test triple sharing a single signal vector.
#[derive(Debug, Clone)]
pub struct ToyInstance {
    pub train: Dataset,
    pub val: Dataset,
    pub test: Dataset,
    /// The signal vector the informative dimensions were built from.
    pub signal: Vec<f64>,
    pub config: ToyConfig,
}

/// Generate a toy instance from a ChaCha8 stream seeded with `cfg.seed`.
///
/// Draw order, which is the determinism contract: first the `d_signal`
/// signal entries, then for each split in train/val/test order and each
/// sample one label draw, `d_signal` noise draws, and `d_noise` background
/// draws.
pub fn generate_toy(cfg: &ToyConfig) -> Result<ToyInstance> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let signal: Vec<f64> = (0..cfg.d_signal)
        .map(|_| cfg.signal_sigma * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let mut split = |n: usize| -> Result<Dataset> {
        let d = cfg.d();
        let mut x = Array2::zeros((n, d));
        let mut y = Array1::zeros(n);
        for i in 0..n {
            let label = if rng.random::<bool>() { 1.0 } else { -1.0 };
            y[i] = label;
            for j in 0..cfg.d_signal {
                let noise: f64 = rng.sample(StandardNormal);
                x[[i, j]] = label * signal[j] + cfg.noise_sigma * noise;
            }
            for j in 0..cfg.d_noise {
                let bg: f64 = rng.sample(StandardNormal);
                x[[i, cfg.d_signal + j]] = cfg.background_sigma * bg;
            }
        }
        Dataset::new(x, y, TargetKind::Binary)
    };
    let train = split(cfg.n_train)?;
    let val = split(cfg.n_val)?;
    let test = split(cfg.n_test)?;
    Ok(ToyInstance {
        train,
        val,
        test,
        signal,
        config: cfg.clone(),
    })
}

/// Write `contents` to `path` through a temporary file in the same
/// directory, so concurrent readers never observe a partial file.
pub fn write_text_atomic(path: &Path, contents: &str) -> Result<()> {
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::InvalidParameter(format!("{} has no file name", path.display())))?;
    let tmp = path.with_file_name(format!(
        ".{}.tmp{}",
        file_name.to_string_lossy(),
        std::process::id()
    ));
    std::fs::write(&tmp, contents).map_err(io_err(&tmp))?;
    std::fs::rename(&tmp, path).map_err(io_err(path))
}

/// Read a rectangular numeric CSV whose last column is the target.
///
/// Plain UTF-8, comma separated, no quoting; numbers may use scientific
/// notation. Errors carry the 1-based row and column of the offending cell.
pub fn read_csv(
    path: impl AsRef<Path>,
    has_header: bool,
    target_kind: TargetKind,
) -> Result<Dataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = 0usize;
    for (idx, line) in text.lines().enumerate() {
        if has_header && idx == 0 {
            continue;
        }
        let row = idx + 1;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                row,
                col: 1,
                message: "empty row".into(),
            });
        }
        let mut vals = Vec::with_capacity(width.max(2));
        for (j, field) in line.split(',').enumerate() {
            let v: f64 = field.trim().parse().map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                row,
                col: j + 1,
                message: format!("{e}: {field:?}"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    row,
                    col: j + 1,
                    message: format!("non-finite value {v}"),
                });
            }
            vals.push(v);
        }
        if rows.is_empty() {
            if vals.len() < 2 {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    row,
                    col: vals.len(),
                    message: "need at least one feature column plus the target column".into(),
                });
            }
            width = vals.len();
        } else if vals.len() != width {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                row,
                col: vals.len().min(width) + 1,
                message: format!("expected {width} columns, found {}", vals.len()),
            });
        }
        rows.push(vals);
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            row: 1,
            col: 1,
            message: "empty file".into(),
        });
    }
    let n = rows.len();
    let d = width - 1;
    let mut x = Array2::zeros((n, d));
    let mut y = Array1::zeros(n);
    for (i, vals) in rows.into_iter().enumerate() {
        y[i] = vals[d];
        for (j, v) in vals.into_iter().take(d).enumerate() {
            x[[i, j]] = v;
        }
    }
    Dataset::new(x, y, target_kind)
}

/// Write a dataset as CSV with the target in the last column. Floats use
/// Rust's shortest round-trip formatting, so read-back is exact.
pub fn write_csv(data: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    for i in 0..data.n() {
        for j in 0..data.d() {
            out.push_str(&data.x[[i, j]].to_string());
            out.push(',');
        }
        out.push_str(&data.y[i].to_string());
        out.push('\n');
    }
    write_text_atomic(path, &out)
}

#[derive(Serialize)]
struct ToyMeta<'a> {
    config: &'a ToyConfig,
    signal: &'a [f64],
}

/// Write a toy instance as `<prefix>.train.csv`, `<prefix>.val.csv`,
/// `<prefix>.test.csv`, and `<prefix>.meta.json` (the config plus the signal
/// vector). Returns the four paths in that order.
pub fn write_toy_files(instance: &ToyInstance, prefix: impl AsRef<Path>) -> Result<[PathBuf; 4]> {
    let prefix = prefix.as_ref();
    let named = |suffix: &str| -> PathBuf {
        let mut name = prefix.file_name().unwrap_or_default().to_os_string();
        name.push(suffix);
        prefix.with_file_name(name)
    };
    let paths = [
        named(".train.csv"),
        named(".val.csv"),
        named(".test.csv"),
        named(".meta.json"),
    ];
    write_csv(&instance.train, &paths[0])?;
    write_csv(&instance.val, &paths[1])?;
    write_csv(&instance.test, &paths[2])?;
    let meta = ToyMeta {
        config: &instance.config,
        signal: &instance.signal,
    };
    write_text_atomic(&paths[3], &serde_json::to_string_pretty(&meta)?)?;
    Ok(paths)
}

/// Raw scores `X beta`.
pub fn predict_scores(beta: ArrayView1<'_, f64>, x: ArrayView2<'_, f64>) -> Result<Array1<f64>> {
    if x.ncols() != beta.len() {
        return Err(Error::DimensionMismatch(format!(
            "design matrix has {} columns but beta has {} entries",
            x.ncols(),
            beta.len()
        )));
    }
    Ok(x.dot(&beta))
}

/// Labels from scores: sign with `sign(0) = +1`.
pub fn classify(scores: ArrayView1<'_, f64>) -> Array1<f64> {
    scores.mapv(|s| if s < 0.0 { -1.0 } else { 1.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn toy_default_shapes() {
        let cfg = ToyConfig::default();
        let inst = generate_toy(&cfg).unwrap();
        assert_eq!(inst.train.n(), 50);
        assert_eq!(inst.train.d(), 65);
        assert_eq!(inst.val.n(), 50);
        assert_eq!(inst.test.n(), 250);
        assert_eq!(inst.test.d(), 65);
        assert_eq!(inst.signal.len(), 15);
    }

    #[test]
    fn toy_is_deterministic_per_seed() {
        let cfg = ToyConfig { seed: 7, ..ToyConfig::default() };
        let a = generate_toy(&cfg).unwrap();
        let b = generate_toy(&cfg).unwrap();
        assert_eq!(a.train, b.train);
        assert_eq!(a.val, b.val);
        assert_eq!(a.test, b.test);
        assert_eq!(a.signal, b.signal);
        let other = generate_toy(&ToyConfig { seed: 8, ..cfg }).unwrap();
        assert_ne!(a.signal, other.signal);
    }

    #[test]
    fn toy_noiseless_instance_is_separable_by_construction() {
        let cfg = ToyConfig {
            d_signal: 4,
            d_noise: 0,
            noise_sigma: 0.0,
            n_train: 10,
            n_val: 10,
            n_test: 10,
            seed: 3,
            ..ToyConfig::default()
        };
        let inst = generate_toy(&cfg).unwrap();
        for i in 0..inst.train.n() {
            let label = inst.train.y()[i];
            for j in 0..4 {
                assert_eq!(inst.train.x()[[i, j]], label * inst.signal[j]);
            }
        }
    }

    #[test]
    fn read_csv_two_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("mini.csv");
        std::fs::write(&path, "1,-1\n2,1\n").unwrap();
        let ds = read_csv(&path, false, TargetKind::Binary).unwrap();
        assert_eq!(ds.n(), 2);
        assert_eq!(ds.d(), 1);
        assert_eq!(ds.x()[[0, 0]], 1.0);
        assert_eq!(ds.x()[[1, 0]], 2.0);
        assert_eq!(ds.y()[0], -1.0);
        assert_eq!(ds.y()[1], 1.0);
    }

    #[test]
    fn read_csv_reports_row_and_column() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "1,2,3\n4,oops,6\n").unwrap();
        match read_csv(&path, false, TargetKind::Real) {
            Err(Error::Parse { row, col, .. }) => {
                assert_eq!((row, col), (2, 2));
            }
            other => panic!("expected parse error, got {other:?}"),
        }
        std::fs::write(&path, "1,2,3\n4,5\n").unwrap();
        assert!(matches!(
            read_csv(&path, false, TargetKind::Real),
            Err(Error::Parse { row: 2, .. })
        ));
        std::fs::write(&path, "").unwrap();
        assert!(matches!(
            read_csv(&path, false, TargetKind::Real),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn read_csv_rejects_non_binary_targets() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("targets.csv");
        std::fs::write(&path, "1,0\n2,1\n").unwrap();
        assert!(matches!(
            read_csv(&path, false, TargetKind::Binary),
            Err(Error::InvalidInput(_))
        ));
        assert!(read_csv(&path, false, TargetKind::Real).is_ok());
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("roundtrip.csv");
        let x = array![[0.1, -2.7182818284590455e10], [1.0 / 3.0, 5e-324]];
        let y = array![0.30000000000000004, -1.5];
        let ds = Dataset::new(x, y, TargetKind::Real).unwrap();
        write_csv(&ds, &path).unwrap();
        let back = read_csv(&path, false, TargetKind::Real).unwrap();
        assert_eq!(ds, back);
    }

    #[test]
    fn predict_and_classify() {
        let x = array![[1.0, 0.0], [0.0, 1.0]];
        let beta = array![0.0, 0.0];
        let scores = predict_scores(beta.view(), x.view()).unwrap();
        assert!(scores.iter().all(|&s| s == 0.0));
        let labels = classify(scores.view());
        assert!(labels.iter().all(|&l| l == 1.0));

        let y = array![2.0, -3.0];
        let scores = predict_scores(y.view(), x.view()).unwrap();
        assert_eq!(scores, y);

        let bad = array![1.0];
        assert!(matches!(
            predict_scores(bad.view(), x.view()),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn dataset_validation() {
        let x = array![[1.0], [2.0]];
        assert!(matches!(
            Dataset::new(x.clone(), array![1.0, 0.0], TargetKind::Binary),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            Dataset::new(x.clone(), array![1.0], TargetKind::Real),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(matches!(
            Dataset::new(x, array![1.0, f64::INFINITY], TargetKind::Real),
            Err(Error::InvalidInput(_))
        ));
    }
}
