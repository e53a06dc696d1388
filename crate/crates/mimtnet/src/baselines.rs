//! Comparison models: ML-KNN and a single-hidden-layer MLP.
//!
//! ML-KNN uses Euclidean distance (on binary features this is the Hamming
//! count), k = 20 by default, and Laplace smoothing s = 1. The MLP is
//! d -> hidden -> n with ReLU, trained with the same summed BCE loss and
//! Adam machinery as the main network.

use crate::dataio::Dataset;
use crate::error::{Error, Result};
use crate::network::{relu, sigmoid};
use crate::seeds;
use crate::training::{adam_step_slices, bce_row, AdamState, TrainConfig};
use rand::Rng;

/// Default hidden width for the MLP baseline.
pub const MLP_HIDDEN: usize = 128;

/// Fitted ML-KNN model: stored training data plus prior and posterior tables.
#[derive(Debug, Clone, PartialEq)]
pub struct MlknnModel {
    pub train_features: Vec<Vec<u8>>,
    pub train_labels: Vec<Vec<u8>>,
    pub feature_names: Vec<String>,
    pub label_names: Vec<String>,
    pub k: usize,
    pub smoothing: f64,
    pub seed: u64,
    /// n priors P(label = 1).
    pub prior_positive: Vec<f64>,
    /// n x (k+1): P(delta neighbors positive | label = 1).
    pub posterior_positive: Vec<Vec<f64>>,
    /// n x (k+1): P(delta neighbors positive | label = 0).
    pub posterior_negative: Vec<Vec<f64>>,
}

fn squared_distance(a: &[u8], b: &[u8]) -> u32 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| u32::from(x != y))
        .sum()
}

/// Indices of the k nearest rows to `query`, skipping `exclude`; ties at the
/// k-th distance break by ascending training index.
fn k_nearest(rows: &[Vec<u8>], query: &[u8], k: usize, exclude: Option<usize>) -> Vec<usize> {
    let mut dists: Vec<(u32, usize)> = rows
        .iter()
        .enumerate()
        .filter(|&(i, _)| Some(i) != exclude)
        .map(|(i, row)| (squared_distance(row, query), i))
        .collect();
    dists.sort_unstable();
    dists.truncate(k);
    dists.into_iter().map(|(_, i)| i).collect()
}

/// Fit ML-KNN. A point is never its own neighbor during fitting.
pub fn mlknn_fit(dataset: &Dataset, k: usize, smoothing: f64, seed: u64) -> Result<MlknnModel> {
    dataset.validate()?;
    let p = dataset.sample_count();
    let n = dataset.task_count();
    if k == 0 {
        return Err(Error::Parameter("neighbor count k must be >= 1".into()));
    }
    if p <= k {
        return Err(Error::Parameter(format!(
            "need more than k = {k} training samples, got {p}"
        )));
    }
    if !(smoothing > 0.0) {
        return Err(Error::Parameter("smoothing must be > 0".into()));
    }

    let s = smoothing;
    let positives = dataset.task_positives();
    let prior_positive: Vec<f64> = positives
        .iter()
        .map(|&c| (s + c as f64) / (2.0 * s + p as f64))
        .collect();

    // Neighbor-positive tallies per training point, then per-label histograms.
    let mut hist_pos = vec![vec![0usize; k + 1]; n];
    let mut hist_neg = vec![vec![0usize; k + 1]; n];
    for i in 0..p {
        let neighbors = k_nearest(&dataset.features, &dataset.features[i], k, Some(i));
        for t in 0..n {
            let delta: usize = neighbors
                .iter()
                .map(|&j| usize::from(dataset.labels[j][t]))
                .sum();
            if dataset.labels[i][t] == 1 {
                hist_pos[t][delta] += 1;
            } else {
                hist_neg[t][delta] += 1;
            }
        }
    }

    let table = |hist: &[usize]| -> Vec<f64> {
        let total: usize = hist.iter().sum();
        hist.iter()
            .map(|&c| (s + c as f64) / (s * (k + 1) as f64 + total as f64))
            .collect()
    };
    let posterior_positive = hist_pos.iter().map(|h| table(h)).collect();
    let posterior_negative = hist_neg.iter().map(|h| table(h)).collect();

    Ok(MlknnModel {
        train_features: dataset.features.clone(),
        train_labels: dataset.labels.clone(),
        feature_names: dataset.feature_names.clone(),
        label_names: dataset.label_names.clone(),
        k,
        smoothing,
        seed,
        prior_positive,
        posterior_positive,
        posterior_negative,
    })
}

/// Posterior probability per query and task.
pub fn mlknn_predict(model: &MlknnModel, features: &[Vec<u8>]) -> Result<Vec<Vec<f64>>> {
    let d = model.feature_names.len();
    let n = model.label_names.len();
    let mut out = Vec::with_capacity(features.len());
    for row in features {
        if row.len() != d {
            return Err(Error::Shape(format!(
                "query row has width {}, model expects {d}",
                row.len()
            )));
        }
        let neighbors = k_nearest(&model.train_features, row, model.k, None);
        let mut probs = Vec::with_capacity(n);
        for t in 0..n {
            let delta: usize = neighbors
                .iter()
                .map(|&j| usize::from(model.train_labels[j][t]))
                .sum();
            let p1 = model.prior_positive[t] * model.posterior_positive[t][delta];
            let p0 = (1.0 - model.prior_positive[t]) * model.posterior_negative[t][delta];
            probs.push(p1 / (p1 + p0));
        }
        out.push(probs);
    }
    Ok(out)
}

/// Single-hidden-layer MLP parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub input: usize,
    pub hidden: usize,
    pub tasks: usize,
    /// hidden x input
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    /// tasks x hidden
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
    pub config: TrainConfig,
    pub feature_names: Vec<String>,
    pub label_names: Vec<String>,
    /// Per-epoch training loss (not serialized).
    pub loss_history: Vec<f64>,
}

impl MlpModel {
    fn logits(&self, row: &[f64]) -> Vec<f64> {
        let mut hidden = vec![0.0; self.hidden];
        for h in 0..self.hidden {
            let w = &self.w1[h * self.input..(h + 1) * self.input];
            hidden[h] = relu(
                w.iter().zip(row).map(|(a, b)| a * b).sum::<f64>() + self.b1[h],
            );
        }
        (0..self.tasks)
            .map(|t| {
                let w = &self.w2[t * self.hidden..(t + 1) * self.hidden];
                w.iter().zip(&hidden).map(|(a, b)| a * b).sum::<f64>() + self.b2[t]
            })
            .collect()
    }
}

fn to_f64_row(row: &[u8]) -> Vec<f64> {
    row.iter().map(|&v| f64::from(v)).collect()
}

/// Exact gradient of the summed BCE loss for the MLP, in the slice order
/// (w1, b1, w2, b2). Shared by training and the gradient-check harness.
pub fn mlp_gradients(
    model: &MlpModel,
    features: &[Vec<f64>],
    labels: &[Vec<u8>],
) -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) {
    let (d, h, n) = (model.input, model.hidden, model.tasks);
    let mut gw1 = vec![0.0; h * d];
    let mut gb1 = vec![0.0; h];
    let mut gw2 = vec![0.0; n * h];
    let mut gb2 = vec![0.0; n];
    let mut hidden_pre = vec![0.0; h];
    let mut hidden_act = vec![0.0; h];
    let mut g_hidden = vec![0.0; h];
    for (row, yrow) in features.iter().zip(labels) {
        for hh in 0..h {
            let w = &model.w1[hh * d..(hh + 1) * d];
            let pre = w.iter().zip(row).map(|(a, b)| a * b).sum::<f64>() + model.b1[hh];
            hidden_pre[hh] = pre;
            hidden_act[hh] = relu(pre);
        }
        for g in &mut g_hidden {
            *g = 0.0;
        }
        for t in 0..n {
            let w = &model.w2[t * h..(t + 1) * h];
            let logit =
                w.iter().zip(&hidden_act).map(|(a, b)| a * b).sum::<f64>() + model.b2[t];
            let g = sigmoid(logit) - f64::from(yrow[t]);
            gb2[t] += g;
            let gw = &mut gw2[t * h..(t + 1) * h];
            for hh in 0..h {
                gw[hh] += g * hidden_act[hh];
                g_hidden[hh] += g * w[hh];
            }
        }
        for hh in 0..h {
            if hidden_pre[hh] <= 0.0 {
                continue;
            }
            let g = g_hidden[hh];
            gb1[hh] += g;
            let gw = &mut gw1[hh * d..(hh + 1) * d];
            for (slot, &x) in row.iter().enumerate() {
                gw[slot] += g * x;
            }
        }
    }
    (gw1, gb1, gw2, gb2)
}

/// Train the MLP baseline with full-batch Adam, mirroring the main model's
/// training contract. `config.hidden` sets the hidden width (the reference
/// setting is [`MLP_HIDDEN`]).
pub fn mlp_train(dataset: &Dataset, config: &TrainConfig) -> Result<MlpModel> {
    config.validate()?;
    dataset.validate()?;
    if dataset.sample_count() == 0 {
        return Err(Error::Parameter("cannot train on an empty dataset".into()));
    }
    let d = dataset.feature_count();
    let n = dataset.task_count();
    let h = config.hidden;

    let mut rng = seeds::rng_for(config.seed, "mlp-init", &[]);
    let bound1 = (6.0 / (d + h) as f64).sqrt();
    let bound2 = (6.0 / (h + n) as f64).sqrt();
    let mut model = MlpModel {
        input: d,
        hidden: h,
        tasks: n,
        w1: (0..h * d).map(|_| rng.gen_range(-bound1..bound1)).collect(),
        b1: vec![0.0; h],
        w2: (0..n * h).map(|_| rng.gen_range(-bound2..bound2)).collect(),
        b2: vec![0.0; n],
        config: config.clone(),
        feature_names: dataset.feature_names.clone(),
        label_names: dataset.label_names.clone(),
        loss_history: Vec::new(),
    };

    let rows: Vec<Vec<f64>> = dataset.features.iter().map(|r| to_f64_row(r)).collect();
    let mut state = AdamState::for_lengths(&[h * d, h, n * h, n]);
    for epoch in 0..config.epochs {
        let loss: f64 = rows
            .iter()
            .zip(&dataset.labels)
            .map(|(row, yrow)| bce_row(&model.logits(row), yrow))
            .sum();
        if !loss.is_finite() {
            return Err(Error::Training {
                epoch: epoch + 1,
                message: format!("non-finite loss {loss}"),
            });
        }
        model.loss_history.push(loss);
        let (gw1, gb1, gw2, gb2) = mlp_gradients(&model, &rows, &dataset.labels);
        let mut p: Vec<&mut [f64]> = vec![&mut model.w1, &mut model.b1, &mut model.w2, &mut model.b2];
        adam_step_slices(
            &mut p,
            &[&gw1, &gb1, &gw2, &gb2],
            &mut state,
            config.learning_rate,
            config.adam_beta1,
            config.adam_beta2,
            config.adam_epsilon,
        );
    }
    Ok(model)
}

/// Probabilities and 0.5-thresholded hard labels for each feature row.
pub fn mlp_predict(model: &MlpModel, features: &[Vec<u8>]) -> Result<(Vec<Vec<f64>>, Vec<Vec<u8>>)> {
    let mut probs = Vec::with_capacity(features.len());
    let mut hard = Vec::with_capacity(features.len());
    for row in features {
        if row.len() != model.input {
            return Err(Error::Shape(format!(
                "query row has width {}, model expects {}",
                row.len(),
                model.input
            )));
        }
        let p: Vec<f64> = model.logits(&to_f64_row(row)).iter().map(|&s| sigmoid(s)).collect();
        hard.push(p.iter().map(|&v| u8::from(v > 0.5)).collect());
        probs.push(p);
    }
    Ok((probs, hard))
}
