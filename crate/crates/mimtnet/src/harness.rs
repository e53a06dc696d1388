//! Cross-validation, the four experiment sweeps, and report emission.
//!
//! Every randomized stage draws from a stream derived from the root seed and
//! its context (see [`crate::seeds`]), so reports regenerate byte-identically
//! from their own configuration echo. Per-fold training seeds depend only on
//! the fold index, which keeps sweep points and robustness runs paired on
//! identical splits and initializations.

use std::fmt::Write as _;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::baselines;
use crate::dataio::Dataset;
use crate::error::{Error, Result};
use crate::metrics::{self, EvalInput};
use crate::model_io::fmt_f64;
use crate::seeds;
use crate::training::{self, TrainConfig};

pub const REPORT_FORMAT_VERSION: &str = "mimtnet-report-v1";

/// Which model a harness run trains.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Mimtcnn,
    Mlknn,
    Mlp,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Mimtcnn => "mimtcnn",
            ModelKind::Mlknn => "mlknn",
            ModelKind::Mlp => "mlp",
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mimtcnn" => Ok(ModelKind::Mimtcnn),
            "mlknn" => Ok(ModelKind::Mlknn),
            "mlp" => Ok(ModelKind::Mlp),
            other => Err(Error::Parameter(format!(
                "unknown model {other:?} (expected mimtcnn, mlknn, or mlp)"
            ))),
        }
    }
}

/// Everything a harness run needs besides the dataset.
#[derive(Debug, Clone)]
pub struct HarnessConfig {
    pub model: ModelKind,
    pub train: TrainConfig,
    pub knn_k: usize,
    pub knn_smoothing: f64,
    pub folds: usize,
    pub seed: u64,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        HarnessConfig {
            model: ModelKind::Mimtcnn,
            train: TrainConfig::default(),
            knn_k: 20,
            knn_smoothing: 1.0,
            folds: 5,
            seed: 0,
        }
    }
}

/// A k-way partition of sample indices; sizes differ by at most one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldSplit {
    pub folds: Vec<Vec<usize>>,
    pub seed: u64,
}

/// Seeded uniform shuffle of 0..p, then contiguous chunks. No stratification.
pub fn kfold_split(p: usize, k: usize, seed: u64) -> Result<FoldSplit> {
    if k == 0 || p < k {
        return Err(Error::Parameter(format!(
            "cannot split {p} samples into {k} folds"
        )));
    }
    let mut order: Vec<usize> = (0..p).collect();
    order.shuffle(&mut seeds::rng_from(seed));
    let base = p / k;
    let extra = p % k;
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for i in 0..k {
        let size = base + usize::from(i < extra);
        folds.push(order[start..start + size].to_vec());
        start += size;
    }
    Ok(FoldSplit { folds, seed })
}

impl FoldSplit {
    /// (train, test) index lists for one fold, both sorted ascending.
    pub fn fold_indices(&self, fold: usize) -> (Vec<usize>, Vec<usize>) {
        let mut test = self.folds[fold].clone();
        test.sort_unstable();
        let mut train: Vec<usize> = self
            .folds
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != fold)
            .flat_map(|(_, f)| f.iter().copied())
            .collect();
        train.sort_unstable();
        (train, test)
    }
}

/// Metric values for one fold. Rank metrics can be undefined (no positives).
#[derive(Debug, Clone, PartialEq)]
pub struct FoldMetrics {
    pub map: Option<f64>,
    pub map_skipped_tasks: usize,
    pub coverage: Option<f64>,
    pub coverage_skipped_samples: usize,
    pub subset_accuracy: f64,
    pub hamming_loss: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldEval {
    pub fold: usize,
    pub metrics: FoldMetrics,
    /// Per task (precision, recall); `None` encodes undefined.
    pub per_task: Vec<(Option<f64>, Option<f64>)>,
}

/// Fold means; rank metrics average over the folds where they are defined.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanMetrics {
    pub map: Option<f64>,
    pub coverage: Option<f64>,
    pub subset_accuracy: f64,
    pub hamming_loss: f64,
}

/// One (configuration point, model) line of an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub model: String,
    pub folds: Vec<FoldEval>,
    pub mean: MeanMetrics,
}

/// A full experiment result.
#[derive(Debug, Clone)]
pub struct Report {
    pub experiment: String,
    pub label_names: Vec<String>,
    pub config_echo: Vec<(String, String)>,
    pub series: Vec<Series>,
    /// (series label, fold, seconds). Kept out of the serialized document so
    /// reruns stay byte-identical; the CLI writes it to a sidecar file.
    pub wall_clock: Vec<(String, usize, f64)>,
}

fn evaluate(probs: Vec<Vec<f64>>, hard: Vec<Vec<u8>>, truth: Vec<Vec<u8>>) -> Result<(FoldMetrics, Vec<(Option<f64>, Option<f64>)>)> {
    let inp = EvalInput::new(probs, hard, truth)?;
    let map = metrics::mean_average_precision(&inp);
    let cov = metrics::coverage(&inp);
    let fold_metrics = FoldMetrics {
        map: map.map(|m| m.value),
        map_skipped_tasks: map.map_or(inp.task_count(), |m| m.skipped),
        coverage: cov.map(|c| c.value),
        coverage_skipped_samples: cov.map_or(inp.sample_count(), |c| c.skipped),
        subset_accuracy: metrics::subset_accuracy(&inp),
        hamming_loss: metrics::hamming_loss(&inp),
    };
    let per_task = metrics::precision_recall_per_task(&inp);
    Ok((fold_metrics, per_task))
}

fn annotate_fold(err: Error, fold: usize) -> Error {
    match err {
        Error::Training { epoch, message } => Error::Training {
            epoch,
            message: format!("fold {fold}: {message}"),
        },
        Error::Parameter(m) => Error::Parameter(format!("fold {fold}: {m}")),
        Error::Shape(m) => Error::Shape(format!("fold {fold}: {m}")),
        other => other,
    }
}

/// Train the configured model on `train` and evaluate on `test`.
fn run_fold(
    train: &Dataset,
    test: &Dataset,
    kind: ModelKind,
    cfg: &HarnessConfig,
    train_seed: u64,
) -> Result<(FoldMetrics, Vec<(Option<f64>, Option<f64>)>)> {
    let (probs, hard) = match kind {
        ModelKind::Mimtcnn => {
            let config = TrainConfig {
                seed: train_seed,
                ..cfg.train.clone()
            };
            let model = training::train(train, &config)?;
            training::predict(&model, &test.features)?
        }
        ModelKind::Mlp => {
            let config = TrainConfig {
                seed: train_seed,
                hidden: baselines::MLP_HIDDEN,
                ..cfg.train.clone()
            };
            let model = baselines::mlp_train(train, &config)?;
            baselines::mlp_predict(&model, &test.features)?
        }
        ModelKind::Mlknn => {
            let model = baselines::mlknn_fit(train, cfg.knn_k, cfg.knn_smoothing, train_seed)?;
            let probs = baselines::mlknn_predict(&model, &test.features)?;
            let hard = probs
                .iter()
                .map(|row| row.iter().map(|&p| u8::from(p > 0.5)).collect())
                .collect();
            (probs, hard)
        }
    };
    evaluate(probs, hard, test.labels.clone())
}

fn mean_metrics(folds: &[FoldEval]) -> MeanMetrics {
    let mean_opt = |get: fn(&FoldMetrics) -> Option<f64>| {
        let values: Vec<f64> = folds.iter().filter_map(|f| get(&f.metrics)).collect();
        (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
    };
    MeanMetrics {
        map: mean_opt(|m| m.map),
        coverage: mean_opt(|m| m.coverage),
        subset_accuracy: folds.iter().map(|f| f.metrics.subset_accuracy).sum::<f64>()
            / folds.len() as f64,
        hamming_loss: folds.iter().map(|f| f.metrics.hamming_loss).sum::<f64>()
            / folds.len() as f64,
    }
}

/// Train seed for one fold. Deliberately independent of the experiment name
/// and sweep point, so sweeps and robustness runs stay paired with the plain
/// cross-validation baseline.
fn fold_train_seed(cfg: &HarnessConfig, kind: ModelKind, fold: usize) -> u64 {
    seeds::derive_seed(cfg.seed, &format!("train/{}", kind.as_str()), &[fold as u64])
}

fn cv_series(
    dataset: &Dataset,
    split: &FoldSplit,
    kind: ModelKind,
    cfg: &HarnessConfig,
    label: &str,
    wall_clock: &mut Vec<(String, usize, f64)>,
) -> Result<Series> {
    let mut folds = Vec::with_capacity(split.folds.len());
    for fold in 0..split.folds.len() {
        let (train_ix, test_ix) = split.fold_indices(fold);
        let train = dataset.select_rows(&train_ix);
        let test = dataset.select_rows(&test_ix);
        let started = Instant::now();
        let (metrics, per_task) = run_fold(&train, &test, kind, cfg, fold_train_seed(cfg, kind, fold))
            .map_err(|e| annotate_fold(e, fold))?;
        wall_clock.push((label.to_string(), fold, started.elapsed().as_secs_f64()));
        folds.push(FoldEval {
            fold,
            metrics,
            per_task,
        });
    }
    let mean = mean_metrics(&folds);
    Ok(Series {
        label: label.to_string(),
        model: kind.as_str().to_string(),
        folds,
        mean,
    })
}

fn base_echo(cfg: &HarnessConfig, dataset: &Dataset) -> Vec<(String, String)> {
    vec![
        ("model".into(), cfg.model.as_str().into()),
        ("folds".into(), cfg.folds.to_string()),
        ("seed".into(), cfg.seed.to_string()),
        ("samples".into(), dataset.sample_count().to_string()),
        ("features".into(), dataset.feature_count().to_string()),
        ("tasks".into(), dataset.task_count().to_string()),
        ("epochs".into(), cfg.train.epochs.to_string()),
        ("learning_rate".into(), fmt_f64(cfg.train.learning_rate)),
        ("proposals".into(), cfg.train.proposals.to_string()),
        ("max_size".into(), cfg.train.max_size.to_string()),
        ("filters".into(), cfg.train.filters.to_string()),
        ("hidden".into(), cfg.train.hidden.to_string()),
        ("adam_beta1".into(), fmt_f64(cfg.train.adam_beta1)),
        ("adam_beta2".into(), fmt_f64(cfg.train.adam_beta2)),
        ("adam_epsilon".into(), fmt_f64(cfg.train.adam_epsilon)),
        ("knn_k".into(), cfg.knn_k.to_string()),
        ("knn_smoothing".into(), fmt_f64(cfg.knn_smoothing)),
    ]
}

fn split_for(dataset: &Dataset, cfg: &HarnessConfig) -> Result<FoldSplit> {
    kfold_split(
        dataset.sample_count(),
        cfg.folds,
        seeds::derive_seed(cfg.seed, "kfold", &[]),
    )
}

/// k-fold cross-validation of the configured model.
pub fn run_cv(dataset: &Dataset, cfg: &HarnessConfig) -> Result<Report> {
    dataset.validate()?;
    let split = split_for(dataset, cfg)?;
    let mut wall_clock = Vec::new();
    let series = cv_series(dataset, &split, cfg.model, cfg, "baseline", &mut wall_clock)?;
    Ok(Report {
        experiment: "cv".into(),
        label_names: dataset.label_names.clone(),
        config_echo: base_echo(cfg, dataset),
        series: vec![series],
        wall_clock,
    })
}

/// Cross-validate the main model at each maximum proposal size.
pub fn sweep_max_size(dataset: &Dataset, sizes: &[usize], cfg: &HarnessConfig) -> Result<Report> {
    sweep(dataset, cfg, "sweep-max-size", sizes, |train, &size| TrainConfig {
        max_size: size,
        ..train.clone()
    })
}

/// Cross-validate the main model at each proposal generation count.
pub fn sweep_generation_times(
    dataset: &Dataset,
    times: &[usize],
    cfg: &HarnessConfig,
) -> Result<Report> {
    sweep(dataset, cfg, "sweep-proposals", times, |train, &count| TrainConfig {
        proposals: count,
        ..train.clone()
    })
}

fn sweep(
    dataset: &Dataset,
    cfg: &HarnessConfig,
    experiment: &str,
    values: &[usize],
    apply: impl Fn(&TrainConfig, &usize) -> TrainConfig,
) -> Result<Report> {
    dataset.validate()?;
    if values.is_empty() {
        return Err(Error::Parameter("sweep needs at least one value".into()));
    }
    let split = split_for(dataset, cfg)?;
    let param = match experiment {
        "sweep-max-size" => "max_size",
        _ => "proposals",
    };
    let mut wall_clock = Vec::new();
    let mut series = Vec::new();
    for value in values {
        let point_cfg = HarnessConfig {
            train: apply(&cfg.train, value),
            ..cfg.clone()
        };
        let label = format!("{param}={value}");
        series.push(cv_series(
            dataset,
            &split,
            cfg.model,
            &point_cfg,
            &label,
            &mut wall_clock,
        )?);
    }
    let mut echo = base_echo(cfg, dataset);
    echo.push((
        "values".into(),
        values
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join(","),
    ));
    Ok(Report {
        experiment: experiment.into(),
        label_names: dataset.label_names.clone(),
        config_echo: echo,
        series,
        wall_clock,
    })
}

const ROBUSTNESS_MODELS: [ModelKind; 2] = [ModelKind::Mimtcnn, ModelKind::Mlknn];

/// Shrink each fold's training portion to the given fractions; test folds
/// stay untouched, so points are paired across fractions.
pub fn subsample_experiment(
    dataset: &Dataset,
    fractions: &[f64],
    cfg: &HarnessConfig,
) -> Result<Report> {
    dataset.validate()?;
    if fractions.is_empty() {
        return Err(Error::Parameter("need at least one fraction".into()));
    }
    for &f in fractions {
        if !(0.0 < f && f <= 1.0) {
            return Err(Error::Parameter(format!("fraction {f} is not in (0, 1]")));
        }
    }
    let split = split_for(dataset, cfg)?;
    let mut wall_clock = Vec::new();
    let mut series = Vec::new();
    for &fraction in fractions {
        let permille = (fraction * 1000.0).round() as u64;
        for kind in ROBUSTNESS_MODELS {
            let label = format!("fraction={fraction}");
            let mut folds = Vec::with_capacity(cfg.folds);
            for fold in 0..cfg.folds {
                let (train_ix, test_ix) = split.fold_indices(fold);
                let keep = ((train_ix.len() as f64) * fraction).round() as usize;
                let keep = keep.clamp(1, train_ix.len());
                let train_ix = if keep == train_ix.len() {
                    train_ix
                } else {
                    let mut shuffled = train_ix;
                    shuffled.shuffle(&mut seeds::rng_for(
                        cfg.seed,
                        "subsample",
                        &[permille, fold as u64],
                    ));
                    shuffled.truncate(keep);
                    shuffled.sort_unstable();
                    shuffled
                };
                let train = dataset.select_rows(&train_ix);
                let test = dataset.select_rows(&test_ix);
                let started = Instant::now();
                let (metrics, per_task) =
                    run_fold(&train, &test, kind, cfg, fold_train_seed(cfg, kind, fold))
                        .map_err(|e| annotate_fold(e, fold))?;
                wall_clock.push((
                    format!("{label}/{}", kind.as_str()),
                    fold,
                    started.elapsed().as_secs_f64(),
                ));
                folds.push(FoldEval {
                    fold,
                    metrics,
                    per_task,
                });
            }
            let mean = mean_metrics(&folds);
            series.push(Series {
                label,
                model: kind.as_str().to_string(),
                folds,
                mean,
            });
        }
    }
    let mut echo = base_echo(cfg, dataset);
    echo.push((
        "fractions".into(),
        fractions
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join(","),
    ));
    Ok(Report {
        experiment: "subsample".into(),
        label_names: dataset.label_names.clone(),
        config_echo: echo,
        series,
        wall_clock,
    })
}

/// Append seeded fair-coin feature columns (train and test alike) and rerun
/// cross-validation per noise count, for both the main model and ML-KNN.
pub fn noise_experiment(
    dataset: &Dataset,
    noise_counts: &[usize],
    cfg: &HarnessConfig,
) -> Result<Report> {
    dataset.validate()?;
    if noise_counts.is_empty() {
        return Err(Error::Parameter("need at least one noise count".into()));
    }
    let split = split_for(dataset, cfg)?;
    let mut wall_clock = Vec::new();
    let mut series = Vec::new();
    for &count in noise_counts {
        let noisy = add_noise_features(dataset, count, cfg.seed);
        for kind in ROBUSTNESS_MODELS {
            let label = format!("noise={count}");
            let mut sub_clock = Vec::new();
            let s = cv_series(&noisy, &split, kind, cfg, &label, &mut sub_clock)?;
            for (l, fold, secs) in sub_clock {
                wall_clock.push((format!("{l}/{}", kind.as_str()), fold, secs));
            }
            series.push(s);
        }
    }
    let mut echo = base_echo(cfg, dataset);
    echo.push((
        "noise_counts".into(),
        noise_counts
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join(","),
    ));
    Ok(Report {
        experiment: "noise".into(),
        label_names: dataset.label_names.clone(),
        config_echo: echo,
        series,
        wall_clock,
    })
}

/// Noise columns are appended after the original features so ground-truth
/// key indices stay valid.
pub fn add_noise_features(dataset: &Dataset, count: usize, root_seed: u64) -> Dataset {
    if count == 0 {
        return dataset.clone();
    }
    let mut rng = seeds::rng_for(root_seed, "noise", &[count as u64]);
    let mut out = dataset.clone();
    for i in 0..count {
        out.feature_names.push(format!("noise{i:03}"));
    }
    for row in &mut out.features {
        for _ in 0..count {
            row.push(rng.gen_range(0..=1u8));
        }
    }
    out
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".into(), fmt_f64)
}

impl Report {
    /// Serialize as the `mimtnet-report-v1` document. Deterministic: the
    /// wall-clock measurements are excluded (see [`Report::timing_sidecar`]).
    pub fn to_document(&self) -> String {
        let mut out = String::new();
        out.push_str(REPORT_FORMAT_VERSION);
        out.push('\n');
        let _ = writeln!(out, "experiment {}", self.experiment);
        out.push_str(
            "note coverage is the reconstructed normalized form: (deepest true-label rank - 1) / task count\n",
        );
        for (key, value) in &self.config_echo {
            let _ = writeln!(out, "config {key} {value}");
        }
        for s in &self.series {
            let _ = writeln!(out, "series {} model {}", s.label, s.model);
            for f in &s.folds {
                let _ = writeln!(
                    out,
                    "fold {} map {} coverage {} subset_accuracy {} hamming_loss {} map_skipped_tasks {} coverage_skipped_samples {}",
                    f.fold,
                    fmt_opt(f.metrics.map),
                    fmt_opt(f.metrics.coverage),
                    fmt_f64(f.metrics.subset_accuracy),
                    fmt_f64(f.metrics.hamming_loss),
                    f.metrics.map_skipped_tasks,
                    f.metrics.coverage_skipped_samples,
                );
            }
            let _ = writeln!(
                out,
                "mean map {} coverage {} subset_accuracy {} hamming_loss {}",
                fmt_opt(s.mean.map),
                fmt_opt(s.mean.coverage),
                fmt_f64(s.mean.subset_accuracy),
                fmt_f64(s.mean.hamming_loss),
            );
            // per-task precision/recall pooled over folds by averaging the
            // defined per-fold values
            let n = self.label_names.len();
            for t in 0..n {
                let collect = |pick: fn(&(Option<f64>, Option<f64>)) -> Option<f64>| {
                    let vals: Vec<f64> =
                        s.folds.iter().filter_map(|f| pick(&f.per_task[t])).collect();
                    (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
                };
                let _ = writeln!(
                    out,
                    "task {} precision {} recall {}",
                    self.label_names[t],
                    fmt_opt(collect(|pr| pr.0)),
                    fmt_opt(collect(|pr| pr.1)),
                );
            }
        }
        out.push_str("end\n");
        out
    }

    /// Flat table: one row per (series, fold), suitable for external plotting.
    pub fn to_flat_csv(&self) -> String {
        let mut out = String::from(
            "experiment,series,model,fold,map,coverage,subset_accuracy,hamming_loss\n",
        );
        let cell = |v: Option<f64>| v.map_or_else(|| "NA".into(), |x| format!("{x}"));
        for s in &self.series {
            for f in &s.folds {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{}",
                    self.experiment,
                    s.label,
                    s.model,
                    f.fold,
                    cell(f.metrics.map),
                    cell(f.metrics.coverage),
                    f.metrics.subset_accuracy,
                    f.metrics.hamming_loss,
                );
            }
        }
        out
    }

    /// Wall-clock measurements, one line per (series, fold).
    pub fn timing_sidecar(&self) -> String {
        let mut out = String::from("series,fold,seconds\n");
        for (label, fold, secs) in &self.wall_clock {
            let _ = writeln!(out, "{label},{fold},{secs:.3}");
        }
        out
    }

    /// Mean of the series with the given label and model, if defined.
    pub fn mean_map(&self, label: &str, model: &str) -> Option<f64> {
        self.series
            .iter()
            .find(|s| s.label == label && s.model == model)
            .and_then(|s| s.mean.map)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataio::{generate_synthetic, SyntheticSpec};

    fn quick_cfg(model: ModelKind) -> HarnessConfig {
        HarnessConfig {
            model,
            train: TrainConfig {
                epochs: 4,
                proposals: 25,
                max_size: 4,
                hidden: 8,
                ..TrainConfig::default()
            },
            knn_k: 5,
            folds: 5,
            seed: 11,
            ..HarnessConfig::default()
        }
    }

    fn quick_data() -> Dataset {
        let spec = SyntheticSpec {
            patients: 100,
            features: 24,
            tasks: 3,
            keys_per_task: 2,
            max_active_tasks: 2,
            max_symptoms: 10,
            background_rate: 0.05,
            label_flip_rate: 0.0,
            min_task_frequency: 15,
            seed: 21,
        };
        generate_synthetic(&spec).unwrap().0
    }

    #[test]
    fn five_singleton_folds() {
        let split = kfold_split(5, 5, 1).unwrap();
        let mut all: Vec<usize> = split.folds.iter().flatten().copied().collect();
        all.sort_unstable();
        assert_eq!(all, vec![0, 1, 2, 3, 4]);
        assert!(split.folds.iter().all(|f| f.len() == 1));
    }

    #[test]
    fn uneven_fold_sizes_differ_by_at_most_one() {
        let split = kfold_split(7, 5, 2).unwrap();
        let mut sizes: Vec<usize> = split.folds.iter().map(Vec::len).collect();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![1, 1, 1, 2, 2]);
    }

    #[test]
    fn split_is_deterministic_and_disjoint() {
        let a = kfold_split(50, 5, 9).unwrap();
        let b = kfold_split(50, 5, 9).unwrap();
        assert_eq!(a, b);
        let mut all: Vec<usize> = a.folds.iter().flatten().copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..50).collect::<Vec<_>>());
    }

    #[test]
    fn too_few_samples_is_parameter_error() {
        assert!(matches!(kfold_split(3, 5, 0), Err(Error::Parameter(_))));
    }

    #[test]
    fn fold_isolation() {
        let split = kfold_split(33, 5, 3).unwrap();
        for fold in 0..5 {
            let (train, test) = split.fold_indices(fold);
            for t in &test {
                assert!(!train.contains(t), "fold {fold} leaks index {t}");
            }
            assert_eq!(train.len() + test.len(), 33);
        }
    }

    #[test]
    fn cv_report_schema_and_bounds() {
        let ds = quick_data();
        for kind in [ModelKind::Mimtcnn, ModelKind::Mlknn, ModelKind::Mlp] {
            let report = run_cv(&ds, &quick_cfg(kind)).unwrap();
            assert_eq!(report.series.len(), 1);
            assert_eq!(report.series[0].folds.len(), 5);
            assert_eq!(report.series[0].model, kind.as_str());
            for f in &report.series[0].folds {
                for v in [f.metrics.map, f.metrics.coverage] {
                    if let Some(v) = v {
                        assert!((0.0..=1.0).contains(&v));
                    }
                }
                assert!((0.0..=1.0).contains(&f.metrics.subset_accuracy));
                assert!((0.0..=1.0).contains(&f.metrics.hamming_loss));
                assert_eq!(f.per_task.len(), 3);
            }
            assert_eq!(report.wall_clock.len(), 5);
        }
    }

    #[test]
    fn report_document_is_reproducible() {
        let ds = quick_data();
        let cfg = quick_cfg(ModelKind::Mimtcnn);
        let a = run_cv(&ds, &cfg).unwrap();
        let b = run_cv(&ds, &cfg).unwrap();
        assert_eq!(a.to_document(), b.to_document());
        assert_eq!(a.to_flat_csv(), b.to_flat_csv());
    }

    #[test]
    fn sweep_has_one_series_per_value() {
        let ds = quick_data();
        let cfg = quick_cfg(ModelKind::Mimtcnn);
        let report = sweep_max_size(&ds, &[2, 4, 24], &cfg).unwrap();
        assert_eq!(report.series.len(), 3);
        assert!(report.mean_map("max_size=24", "mimtcnn").is_some());
        // boundary S = d runs without error (third value above)
        let report = sweep_generation_times(&ds, &[1, 10], &cfg).unwrap();
        assert_eq!(report.series.len(), 2);
        assert!(report.mean_map("proposals=1", "mimtcnn").is_some());
    }

    #[test]
    fn subsample_fraction_one_reproduces_cv() {
        let ds = quick_data();
        let cfg = quick_cfg(ModelKind::Mimtcnn);
        let cv = run_cv(&ds, &cfg).unwrap();
        let sub = subsample_experiment(&ds, &[1.0], &cfg).unwrap();
        let sub_series = sub
            .series
            .iter()
            .find(|s| s.model == "mimtcnn")
            .unwrap();
        assert_eq!(sub_series.folds, cv.series[0].folds);
    }

    #[test]
    fn noise_zero_reproduces_cv() {
        let ds = quick_data();
        let cfg = quick_cfg(ModelKind::Mimtcnn);
        let cv = run_cv(&ds, &cfg).unwrap();
        let noise = noise_experiment(&ds, &[0], &cfg).unwrap();
        let noise_series = noise
            .series
            .iter()
            .find(|s| s.model == "mimtcnn")
            .unwrap();
        assert_eq!(noise_series.folds, cv.series[0].folds);
    }

    #[test]
    fn noise_columns_are_appended_after_originals() {
        let ds = quick_data();
        let noisy = add_noise_features(&ds, 5, 3);
        assert_eq!(noisy.feature_count(), ds.feature_count() + 5);
        assert_eq!(
            &noisy.feature_names[..ds.feature_count()],
            &ds.feature_names[..]
        );
        for (orig, with_noise) in ds.features.iter().zip(&noisy.features) {
            assert_eq!(&with_noise[..ds.feature_count()], &orig[..]);
        }
        // same count and seed draws the same columns
        let again = add_noise_features(&ds, 5, 3);
        assert_eq!(noisy, again);
    }

    #[test]
    fn flat_csv_has_one_row_per_series_fold() {
        let ds = quick_data();
        let cfg = quick_cfg(ModelKind::Mlknn);
        let report = subsample_experiment(&ds, &[0.5, 1.0], &cfg).unwrap();
        let csv = report.to_flat_csv();
        // 2 fractions x 2 models x 5 folds + header
        assert_eq!(csv.lines().count(), 21);
    }
}
