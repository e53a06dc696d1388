//! Loss, exact backpropagation, Adam updates, and the full-batch training loop.
//!
//! The loss is a summed (not averaged) per-task binary
//! cross-entropy, computed from bag logits in the fused stable form
//! `max(s,0) - s*y + ln(1 + exp(-|s|))`. Training is full batch: one Adam
//! update per epoch from the gradient over every sample.

use crate::dataio::Dataset;
use crate::error::{Error, Result};
use crate::network::{self, ForwardTrace, ModelParams};
use crate::sampler::{self, ProposalSet};
use crate::seeds;
use rand::Rng;

/// Hyperparameters of one training run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    /// R: proposal generation count.
    pub proposals: usize,
    /// S: maximum proposal size.
    pub max_size: usize,
    /// F: convolution kernel count.
    pub filters: usize,
    /// H: hidden layer width.
    pub hidden: usize,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 100,
            learning_rate: 0.1,
            proposals: 500,
            max_size: 10,
            filters: 1,
            hidden: 64,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_epsilon: 1e-8,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::Parameter("epochs must be >= 1".into()));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::Parameter("learning_rate must be > 0".into()));
        }
        if self.proposals == 0 || self.max_size == 0 || self.filters == 0 || self.hidden == 0 {
            return Err(Error::Parameter(
                "proposals, max_size, filters, and hidden must all be >= 1".into(),
            ));
        }
        for (name, b) in [("adam_beta1", self.adam_beta1), ("adam_beta2", self.adam_beta2)] {
            if !(0.0 < b && b < 1.0) {
                return Err(Error::Parameter(format!("{name} = {b} is not in (0, 1)")));
            }
        }
        if !(self.adam_epsilon > 0.0) {
            return Err(Error::Parameter("adam_epsilon must be > 0".into()));
        }
        Ok(())
    }
}

/// Adam moment accumulators, shaped like the parameters they update.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub first_moment: Vec<Vec<f64>>,
    pub second_moment: Vec<Vec<f64>>,
    pub step: u64,
}

impl AdamState {
    pub fn for_params(params: &ModelParams) -> Self {
        let shapes: Vec<usize> = params.slices().iter().map(|s| s.len()).collect();
        AdamState {
            first_moment: shapes.iter().map(|&len| vec![0.0; len]).collect(),
            second_moment: shapes.iter().map(|&len| vec![0.0; len]).collect(),
            step: 0,
        }
    }

    /// Moment accumulators for an arbitrary list of parameter slice lengths
    /// (used by the MLP baseline, which has a different parameter layout).
    pub fn for_lengths(lengths: &[usize]) -> Self {
        AdamState {
            first_moment: lengths.iter().map(|&len| vec![0.0; len]).collect(),
            second_moment: lengths.iter().map(|&len| vec![0.0; len]).collect(),
            step: 0,
        }
    }
}

/// Summed binary cross-entropy over bag logits, in the fused stable form.
///
/// Shapes must match; this is the hot path and panics on programmer error.
pub fn bce_loss(bag_logits: &[Vec<f64>], labels: &[Vec<u8>]) -> f64 {
    assert_eq!(bag_logits.len(), labels.len(), "sample count mismatch");
    bag_logits
        .iter()
        .zip(labels)
        .map(|(srow, yrow)| bce_row(srow, yrow))
        .sum()
}

pub(crate) fn bce_row(logits: &[f64], labels: &[u8]) -> f64 {
    assert_eq!(logits.len(), labels.len(), "task count mismatch");
    logits
        .iter()
        .zip(labels)
        .map(|(&s, &y)| s.max(0.0) - s * f64::from(y) + (-s.abs()).exp().ln_1p())
        .sum()
}

/// Accumulate one sample's exact loss gradient into `grads`.
///
/// The pooling stage routes each task's gradient to the argmax proposal
/// recorded in the trace (smallest-index tie rule), so per task exactly one
/// proposal row receives gradient.
pub fn accumulate_gradient(
    params: &ModelParams,
    trace: &ForwardTrace,
    labels: &[u8],
    grads: &mut ModelParams,
) {
    let (f_count, s, h, n) = (params.filters, params.max_size, params.hidden, params.tasks);
    debug_assert_eq!(labels.len(), n);

    // dL/d bag_logit, routed per task to its winning proposal.
    let mut tasks_by_row: Vec<Vec<(usize, f64)>> = vec![Vec::new(); trace.instances.len()];
    for t in 0..n {
        let g = network::sigmoid(trace.bag_scores[t]) - f64::from(labels[t]);
        tasks_by_row[trace.argmax_r[t]].push((t, g));
    }

    let mut g_fc1_pre = vec![0.0; h];
    let mut g_conv_pre = vec![0.0; f_count];
    for (r, routed) in tasks_by_row.iter().enumerate() {
        if routed.is_empty() {
            continue;
        }
        let fa = &trace.fc1_act[r * h..(r + 1) * h];
        let ca = &trace.conv_act[r * f_count..(r + 1) * f_count];

        for hh in 0..h {
            g_fc1_pre[hh] = 0.0;
        }
        for &(t, g) in routed {
            grads.fc2_b[t] += g;
            let w = &params.fc2_w[t * h..(t + 1) * h];
            let gw = &mut grads.fc2_w[t * h..(t + 1) * h];
            for hh in 0..h {
                gw[hh] += g * fa[hh];
                g_fc1_pre[hh] += g * w[hh];
            }
        }
        for hh in 0..h {
            if trace.fc1_pre[r * h + hh] <= 0.0 {
                g_fc1_pre[hh] = 0.0;
            }
        }

        for f in 0..f_count {
            g_conv_pre[f] = 0.0;
        }
        for hh in 0..h {
            let g = g_fc1_pre[hh];
            if g == 0.0 {
                continue;
            }
            grads.fc1_b[hh] += g;
            let w = &params.fc1_w[hh * f_count..(hh + 1) * f_count];
            let gw = &mut grads.fc1_w[hh * f_count..(hh + 1) * f_count];
            for f in 0..f_count {
                gw[f] += g * ca[f];
                g_conv_pre[f] += g * w[f];
            }
        }
        for f in 0..f_count {
            if trace.conv_pre[r * f_count + f] <= 0.0 {
                g_conv_pre[f] = 0.0;
            }
        }

        let inst = &trace.instances[r];
        for f in 0..f_count {
            let g = g_conv_pre[f];
            if g == 0.0 {
                continue;
            }
            grads.conv_b[f] += g;
            let gw = &mut grads.conv_w[f * s..(f + 1) * s];
            for j in 0..s {
                gw[j] += g * inst[j];
            }
        }
    }
}

/// Gradient of [`bce_loss`] with respect to every parameter, summed over the
/// given traces (one per sample).
pub fn backward(params: &ModelParams, traces: &[ForwardTrace], labels: &[Vec<u8>]) -> ModelParams {
    assert_eq!(traces.len(), labels.len(), "sample count mismatch");
    let mut grads = ModelParams::zeros(params.filters, params.max_size, params.hidden, params.tasks);
    for (trace, yrow) in traces.iter().zip(labels) {
        accumulate_gradient(params, trace, yrow, &mut grads);
    }
    grads
}

/// One bias-corrected Adam update over a list of (parameter, gradient) slice
/// pairs. Deterministic and in-place; the caller owns the pairing order.
pub fn adam_step_slices(
    params: &mut [&mut [f64]],
    grads: &[&[f64]],
    state: &mut AdamState,
    learning_rate: f64,
    beta1: f64,
    beta2: f64,
    epsilon: f64,
) {
    state.step += 1;
    let t = state.step as i32;
    let bc1 = 1.0 - beta1.powi(t);
    let bc2 = 1.0 - beta2.powi(t);
    for (slot, (p, g)) in params.iter_mut().zip(grads).enumerate() {
        let m = &mut state.first_moment[slot];
        let v = &mut state.second_moment[slot];
        for i in 0..p.len() {
            m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
            v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
            let m_hat = m[i] / bc1;
            let v_hat = v[i] / bc2;
            p[i] -= learning_rate * m_hat / (v_hat.sqrt() + epsilon);
        }
    }
}

/// Adam update for the network's parameter layout.
pub fn adam_step(
    params: &mut ModelParams,
    grads: &ModelParams,
    state: &mut AdamState,
    config: &TrainConfig,
) {
    let mut p = params.slices_mut();
    adam_step_slices(
        &mut p,
        &grads.slices(),
        state,
        config.learning_rate,
        config.adam_beta1,
        config.adam_beta2,
        config.adam_epsilon,
    );
}

/// A trained model bundled with everything inference needs.
#[derive(Debug, Clone)]
pub struct Model {
    pub params: ModelParams,
    pub proposal_set: ProposalSet,
    pub config: TrainConfig,
    pub feature_names: Vec<String>,
    pub label_names: Vec<String>,
    /// Per-epoch training loss (not serialized).
    pub loss_history: Vec<f64>,
}

/// Symmetric uniform initialization with per-layer bounds
/// sqrt(6 / (fan_in + fan_out)), weights drawn in the fixed order
/// conv, fc1, fc2 (row-major); biases start at zero.
pub fn init_params(config: &TrainConfig, tasks: usize) -> ModelParams {
    let mut rng = seeds::rng_for(config.seed, "init", &[]);
    let mut params = ModelParams::zeros(config.filters, config.max_size, config.hidden, tasks);
    let layers: [(usize, usize); 3] = [
        (config.max_size, config.filters),
        (config.filters, config.hidden),
        (config.hidden, tasks),
    ];
    let bounds: Vec<f64> = layers
        .iter()
        .map(|&(fan_in, fan_out)| (6.0 / (fan_in + fan_out) as f64).sqrt())
        .collect();
    for w in &mut params.conv_w {
        *w = rng.gen_range(-bounds[0]..bounds[0]);
    }
    for w in &mut params.fc1_w {
        *w = rng.gen_range(-bounds[1]..bounds[1]);
    }
    for w in &mut params.fc2_w {
        *w = rng.gen_range(-bounds[2]..bounds[2]);
    }
    params
}

/// Full-batch training: `epochs` iterations of forward, backward, and one
/// Adam step over every sample. Pure function of (dataset, config).
pub fn train(dataset: &Dataset, config: &TrainConfig) -> Result<Model> {
    config.validate()?;
    dataset.validate()?;
    if dataset.sample_count() == 0 {
        return Err(Error::Parameter("cannot train on an empty dataset".into()));
    }
    let d = dataset.feature_count();
    let n = dataset.task_count();
    let proposal_set = sampler::generate_proposals(d, config.proposals, config.max_size, config.seed)?;

    // Proposals are fixed, so instances can be gathered once.
    let instances: Vec<Vec<Vec<f64>>> = dataset
        .features
        .iter()
        .map(|row| sampler::extract_instances(&proposal_set, row))
        .collect::<Result<_>>()?;

    let mut params = init_params(config, n);
    let mut state = AdamState::for_params(&params);
    let mut loss_history = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        let mut grads = ModelParams::zeros(config.filters, config.max_size, config.hidden, n);
        let mut loss = 0.0;
        for (inst, yrow) in instances.iter().zip(&dataset.labels) {
            let trace = network::forward(&params, inst.clone())?;
            loss += bce_row(&trace.bag_scores, yrow);
            accumulate_gradient(&params, &trace, yrow, &mut grads);
        }
        if !loss.is_finite() {
            return Err(Error::Training {
                epoch: epoch + 1,
                message: format!("non-finite loss {loss}"),
            });
        }
        loss_history.push(loss);
        adam_step(&mut params, &grads, &mut state, config);
    }

    Ok(Model {
        params,
        proposal_set,
        config: config.clone(),
        feature_names: dataset.feature_names.clone(),
        label_names: dataset.label_names.clone(),
        loss_history,
    })
}

/// Probabilities and 0.5-thresholded hard labels for each feature row.
pub fn predict(model: &Model, features: &[Vec<u8>]) -> Result<(Vec<Vec<f64>>, Vec<Vec<u8>>)> {
    let mut probs = Vec::with_capacity(features.len());
    let mut hard = Vec::with_capacity(features.len());
    for row in features {
        let trace = forward_row(model, row)?;
        hard.push(trace.probs.iter().map(|&p| u8::from(p > 0.5)).collect());
        probs.push(trace.probs);
    }
    Ok((probs, hard))
}

/// Forward pass for one raw feature row, including instance extraction.
pub fn forward_row(model: &Model, row: &[u8]) -> Result<ForwardTrace> {
    let instances = sampler::extract_instances(&model.proposal_set, row)?;
    network::forward(&model.params, instances)
}
