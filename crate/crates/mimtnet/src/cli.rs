//! Command-line interface: dataset generation, training, prediction, and the
//! experiment harness. Every command is deterministic given its flags.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::baselines;
use crate::dataio::{self, SyntheticSpec};
use crate::error::{Error, Result};
use crate::harness::{self, HarnessConfig, ModelKind};
use crate::model_io::{self, AnyModel};
use crate::training::{self, TrainConfig};

#[derive(Debug, Parser)]
#[command(
    name = "mimtnet",
    about = "Multi-instance multi-task classifier for sparse binary multi-label data",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic labeled corpus with planted OR-rule signal
    GenData(GenDataArgs),
    /// Train a model and save it
    Train(TrainArgs),
    /// Predict with a saved model and write per-sample probabilities
    Predict(PredictArgs),
    /// k-fold cross-validation report
    Cv(CvArgs),
    /// Cross-validated sweep over max proposal size or proposal count
    Sweep(SweepArgs),
    /// Subsample or noise robustness experiment (main model vs ML-KNN)
    Robustness(RobustnessArgs),
}

#[derive(Debug, Args)]
pub struct GenDataArgs {
    /// Output CSV path; ground-truth key features go to <out>.keys.txt
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1180)]
    pub patients: usize,
    #[arg(long, default_value_t = 186)]
    pub features: usize,
    #[arg(long, default_value_t = 12)]
    pub tasks: usize,
    #[arg(long, default_value_t = 5)]
    pub keys_per_task: usize,
    #[arg(long, default_value_t = 0.03)]
    pub background_rate: f64,
    #[arg(long, default_value_t = 0.0)]
    pub label_flip_rate: f64,
    #[arg(long, default_value_t = 50)]
    pub min_task_frequency: usize,
    #[arg(long, default_value_t = 18)]
    pub max_symptoms: usize,
    #[arg(long, default_value_t = 4)]
    pub max_active_tasks: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// Flags shared by every command that trains a model.
#[derive(Debug, Args, Clone)]
pub struct ModelArgs {
    /// mimtcnn, mlknn, or mlp
    #[arg(long, default_value = "mimtcnn")]
    pub model: String,
    /// Number of region proposals to generate
    #[arg(long, default_value_t = 500)]
    pub proposals: usize,
    /// Maximum proposal size (features per instance)
    #[arg(long, default_value_t = 10)]
    pub max_size: usize,
    /// Convolution filters
    #[arg(long, default_value_t = 1)]
    pub filters: usize,
    /// Hidden layer width (default 64 for mimtcnn, 128 for mlp)
    #[arg(long)]
    pub hidden: Option<usize>,
    #[arg(long, default_value_t = 100)]
    pub epochs: usize,
    /// Learning rate
    #[arg(long, default_value_t = 0.1)]
    pub lr: f64,
    /// Neighbor count for mlknn
    #[arg(long, default_value_t = 20)]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl ModelArgs {
    fn kind(&self) -> Result<ModelKind> {
        self.model.parse()
    }

    fn train_config(&self, kind: ModelKind) -> TrainConfig {
        let default_hidden = match kind {
            ModelKind::Mlp => baselines::MLP_HIDDEN,
            _ => TrainConfig::default().hidden,
        };
        TrainConfig {
            epochs: self.epochs,
            learning_rate: self.lr,
            proposals: self.proposals,
            max_size: self.max_size,
            filters: self.filters,
            hidden: self.hidden.unwrap_or(default_hidden),
            seed: self.seed,
            ..TrainConfig::default()
        }
    }

    fn harness_config(&self, folds: usize) -> Result<HarnessConfig> {
        let kind = self.kind()?;
        Ok(HarnessConfig {
            model: kind,
            train: self.train_config(kind),
            knn_k: self.k,
            knn_smoothing: 1.0,
            folds,
            seed: self.seed,
        })
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Training data CSV
    #[arg(long)]
    pub data: PathBuf,
    /// Where to save the trained model
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub model_args: ModelArgs,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// A model file written by `train`
    #[arg(long)]
    pub model: PathBuf,
    /// Input CSV; labels, if present, are ignored
    #[arg(long)]
    pub data: PathBuf,
    /// Output CSV of per-sample probabilities and hard predictions
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CvArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    #[arg(long)]
    pub report: PathBuf,
    #[command(flatten)]
    pub model_args: ModelArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// max-size or proposals
    #[arg(long)]
    pub param: String,
    /// Comma-separated sweep values, e.g. 5,10,15
    #[arg(long)]
    pub values: String,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    #[arg(long)]
    pub report: PathBuf,
    #[command(flatten)]
    pub model_args: ModelArgs,
}

#[derive(Debug, Args)]
pub struct RobustnessArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// subsample or noise
    #[arg(long)]
    pub mode: String,
    /// Comma-separated training fractions (subsample) or column counts (noise)
    #[arg(long)]
    pub values: String,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    #[arg(long)]
    pub report: PathBuf,
    #[command(flatten)]
    pub model_args: ModelArgs,
}

fn parse_list<T: std::str::FromStr>(values: &str, what: &str) -> Result<Vec<T>> {
    values
        .split(',')
        .map(|v| {
            v.trim()
                .parse()
                .map_err(|_| Error::Parameter(format!("invalid {what} value {v:?}")))
        })
        .collect()
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Sibling path with an extra suffix, e.g. report.txt -> report.txt.csv.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.as_os_str().to_os_string();
    name.push(suffix);
    PathBuf::from(name)
}

fn write_report(report: &harness::Report, path: &Path) -> Result<()> {
    write_file(path, &report.to_document())?;
    write_file(&sibling(path, ".csv"), &report.to_flat_csv())?;
    write_file(&sibling(path, ".timing.csv"), &report.timing_sidecar())
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenData(args) => gen_data(args),
        Command::Train(args) => train(args),
        Command::Predict(args) => predict(args),
        Command::Cv(args) => cv(args),
        Command::Sweep(args) => sweep(args),
        Command::Robustness(args) => robustness(args),
    }
}

fn gen_data(args: GenDataArgs) -> Result<()> {
    let spec = SyntheticSpec {
        patients: args.patients,
        features: args.features,
        tasks: args.tasks,
        keys_per_task: args.keys_per_task,
        max_active_tasks: args.max_active_tasks,
        max_symptoms: args.max_symptoms,
        background_rate: args.background_rate,
        label_flip_rate: args.label_flip_rate,
        min_task_frequency: args.min_task_frequency,
        seed: args.seed,
    };
    let (dataset, keys) = dataio::generate_synthetic(&spec)?;
    dataio::save_csv(&dataset, &args.out)?;
    let mut key_doc = String::new();
    for (t, task_keys) in keys.iter().enumerate() {
        let _ = write!(key_doc, "{}", dataset.label_names[t]);
        for &k in task_keys {
            let _ = write!(key_doc, " {}", dataset.feature_names[k]);
        }
        key_doc.push('\n');
    }
    write_file(&sibling(&args.out, ".keys.txt"), &key_doc)?;
    println!(
        "wrote {} samples x {} features x {} tasks to {}",
        dataset.sample_count(),
        dataset.feature_count(),
        dataset.task_count(),
        args.out.display()
    );
    Ok(())
}

fn train(args: TrainArgs) -> Result<()> {
    let dataset = dataio::load_csv(&args.data)?;
    let kind = args.model_args.kind()?;
    let config = args.model_args.train_config(kind);
    let model = match kind {
        ModelKind::Mimtcnn => AnyModel::Mimtcnn(training::train(&dataset, &config)?),
        ModelKind::Mlp => AnyModel::Mlp(baselines::mlp_train(&dataset, &config)?),
        ModelKind::Mlknn => AnyModel::Mlknn(baselines::mlknn_fit(
            &dataset,
            args.model_args.k,
            1.0,
            config.seed,
        )?),
    };
    model_io::save(&model, &args.out)?;
    println!("trained {} model saved to {}", model.kind(), args.out.display());
    Ok(())
}

fn predict(args: PredictArgs) -> Result<()> {
    let model = model_io::load(&args.model)?;
    let dataset = dataio::load_csv(&args.data)?;
    if dataset.feature_names != model.feature_names() {
        return Err(Error::Schema(format!(
            "data features do not match the model (expected {} features starting with {:?})",
            model.feature_names().len(),
            model.feature_names().first()
        )));
    }
    let (probs, hard) = model.predict(&dataset.features)?;
    let mut out = String::new();
    let labels = model.label_names();
    let header: Vec<String> = labels
        .iter()
        .map(|l| format!("prob_{l}"))
        .chain(labels.iter().map(|l| format!("pred_{l}")))
        .collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for (p_row, h_row) in probs.iter().zip(&hard) {
        let cells: Vec<String> = p_row
            .iter()
            .map(|p| model_io::fmt_f64(*p))
            .chain(h_row.iter().map(ToString::to_string))
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    write_file(&args.out, &out)?;
    println!(
        "wrote predictions for {} samples to {}",
        probs.len(),
        args.out.display()
    );
    Ok(())
}

fn cv(args: CvArgs) -> Result<()> {
    let dataset = dataio::load_csv(&args.data)?;
    let cfg = args.model_args.harness_config(args.folds)?;
    let report = harness::run_cv(&dataset, &cfg)?;
    write_report(&report, &args.report)?;
    print_means(&report);
    Ok(())
}

fn sweep(args: SweepArgs) -> Result<()> {
    let dataset = dataio::load_csv(&args.data)?;
    let cfg = args.model_args.harness_config(args.folds)?;
    let values: Vec<usize> = parse_list(&args.values, "sweep")?;
    let report = match args.param.as_str() {
        "max-size" => harness::sweep_max_size(&dataset, &values, &cfg)?,
        "proposals" => harness::sweep_generation_times(&dataset, &values, &cfg)?,
        other => {
            return Err(Error::Parameter(format!(
                "unknown sweep parameter {other:?} (expected max-size or proposals)"
            )))
        }
    };
    write_report(&report, &args.report)?;
    print_means(&report);
    Ok(())
}

fn robustness(args: RobustnessArgs) -> Result<()> {
    let dataset = dataio::load_csv(&args.data)?;
    let cfg = args.model_args.harness_config(args.folds)?;
    let report = match args.mode.as_str() {
        "subsample" => {
            let fractions: Vec<f64> = parse_list(&args.values, "fraction")?;
            harness::subsample_experiment(&dataset, &fractions, &cfg)?
        }
        "noise" => {
            let counts: Vec<usize> = parse_list(&args.values, "noise count")?;
            harness::noise_experiment(&dataset, &counts, &cfg)?
        }
        other => {
            return Err(Error::Parameter(format!(
                "unknown robustness mode {other:?} (expected subsample or noise)"
            )))
        }
    };
    write_report(&report, &args.report)?;
    print_means(&report);
    Ok(())
}

fn print_means(report: &harness::Report) {
    for s in &report.series {
        let map = s
            .mean
            .map
            .map_or_else(|| "NA".to_string(), |v| format!("{v:.4}"));
        println!(
            "{} [{}] mean MAP {} hamming {:.4}",
            s.label, s.model, map, s.mean.hamming_loss
        );
    }
}
