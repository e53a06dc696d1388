//! Forward pass of the multi-instance multi-task network.
//!
//! Each proposal row runs through convolution + ReLU, a shared hidden layer
//! + ReLU, and a per-task score head. The bag score of a task is the maximum
//! instance score over proposals (multi-instance pooling), with argmax ties
//! broken toward the smallest proposal index, and the output probability is
//! the sigmoid of the bag score.

use crate::error::{Error, Result};
use crate::sampler::ProposalSet;

/// All learnable parameters. Matrices are stored flat, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    /// F: convolution kernel count.
    pub filters: usize,
    /// S: padded proposal length, the kernel's span.
    pub max_size: usize,
    /// H: hidden layer width.
    pub hidden: usize,
    /// n: task count.
    pub tasks: usize,
    /// F x S
    pub conv_w: Vec<f64>,
    /// F
    pub conv_b: Vec<f64>,
    /// H x F
    pub fc1_w: Vec<f64>,
    /// H
    pub fc1_b: Vec<f64>,
    /// n x H
    pub fc2_w: Vec<f64>,
    /// n
    pub fc2_b: Vec<f64>,
}

impl ModelParams {
    pub fn zeros(filters: usize, max_size: usize, hidden: usize, tasks: usize) -> Self {
        ModelParams {
            filters,
            max_size,
            hidden,
            tasks,
            conv_w: vec![0.0; filters * max_size],
            conv_b: vec![0.0; filters],
            fc1_w: vec![0.0; hidden * filters],
            fc1_b: vec![0.0; hidden],
            fc2_w: vec![0.0; tasks * hidden],
            fc2_b: vec![0.0; tasks],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.filters == 0 || self.max_size == 0 || self.hidden == 0 || self.tasks == 0 {
            return Err(Error::Parameter("all network dimensions must be positive".into()));
        }
        let expected = [
            self.filters * self.max_size,
            self.filters,
            self.hidden * self.filters,
            self.hidden,
            self.tasks * self.hidden,
            self.tasks,
        ];
        for (slice, want) in self.slices().into_iter().zip(expected) {
            if slice.len() != want {
                return Err(Error::Shape("parameter matrix size inconsistent".into()));
            }
            if slice.iter().any(|v| !v.is_finite()) {
                return Err(Error::Shape("non-finite parameter entry".into()));
            }
        }
        Ok(())
    }

    /// Parameter matrices in the crate's canonical order.
    pub fn slices(&self) -> [&[f64]; 6] {
        [
            &self.conv_w,
            &self.conv_b,
            &self.fc1_w,
            &self.fc1_b,
            &self.fc2_w,
            &self.fc2_b,
        ]
    }

    pub fn slices_mut(&mut self) -> [&mut [f64]; 6] {
        [
            &mut self.conv_w,
            &mut self.conv_b,
            &mut self.fc1_w,
            &mut self.fc1_b,
            &mut self.fc2_w,
            &mut self.fc2_b,
        ]
    }
}

/// Cached activations of one bag, as produced by [`forward`].
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    /// R x S instance rows.
    pub instances: Vec<Vec<f64>>,
    /// R x F
    pub conv_pre: Vec<f64>,
    /// R x F
    pub conv_act: Vec<f64>,
    /// R x H
    pub fc1_pre: Vec<f64>,
    /// R x H
    pub fc1_act: Vec<f64>,
    /// R x n instance scores.
    pub scores: Vec<f64>,
    /// n pooled logits.
    pub bag_scores: Vec<f64>,
    /// n winning proposal indices.
    pub argmax_r: Vec<usize>,
    /// n output probabilities.
    pub probs: Vec<f64>,
}

pub fn relu(x: f64) -> f64 {
    x.max(0.0)
}

/// Numerically stable logistic function.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Run one bag through the network.
pub fn forward(params: &ModelParams, instances: Vec<Vec<f64>>) -> Result<ForwardTrace> {
    let (f_count, s, h, n) = (params.filters, params.max_size, params.hidden, params.tasks);
    let r_count = instances.len();
    if r_count == 0 {
        return Err(Error::Shape("bag has no instances".into()));
    }
    if let Some(bad) = instances.iter().find(|row| row.len() != s) {
        return Err(Error::Shape(format!(
            "instance row has width {}, kernel expects {s}",
            bad.len()
        )));
    }

    let mut conv_pre = vec![0.0; r_count * f_count];
    let mut conv_act = vec![0.0; r_count * f_count];
    let mut fc1_pre = vec![0.0; r_count * h];
    let mut fc1_act = vec![0.0; r_count * h];
    let mut scores = vec![0.0; r_count * n];

    for (r, inst) in instances.iter().enumerate() {
        for f in 0..f_count {
            let w = &params.conv_w[f * s..(f + 1) * s];
            let pre: f64 = w.iter().zip(inst).map(|(a, b)| a * b).sum::<f64>() + params.conv_b[f];
            conv_pre[r * f_count + f] = pre;
            conv_act[r * f_count + f] = relu(pre);
        }
        let ca = &conv_act[r * f_count..(r + 1) * f_count];
        for hh in 0..h {
            let w = &params.fc1_w[hh * f_count..(hh + 1) * f_count];
            let pre: f64 = w.iter().zip(ca).map(|(a, b)| a * b).sum::<f64>() + params.fc1_b[hh];
            fc1_pre[r * h + hh] = pre;
            fc1_act[r * h + hh] = relu(pre);
        }
        let fa = &fc1_act[r * h..(r + 1) * h];
        for t in 0..n {
            let w = &params.fc2_w[t * h..(t + 1) * h];
            scores[r * n + t] =
                w.iter().zip(fa).map(|(a, b)| a * b).sum::<f64>() + params.fc2_b[t];
        }
    }

    let mut bag_scores = vec![f64::NEG_INFINITY; n];
    let mut argmax_r = vec![0usize; n];
    for r in 0..r_count {
        for t in 0..n {
            let sc = scores[r * n + t];
            // strict comparison keeps the smallest proposal index on ties
            if sc > bag_scores[t] {
                bag_scores[t] = sc;
                argmax_r[t] = r;
            }
        }
    }
    let probs = bag_scores.iter().map(|&s| sigmoid(s)).collect();

    Ok(ForwardTrace {
        instances,
        conv_pre,
        conv_act,
        fc1_pre,
        fc1_act,
        scores,
        bag_scores,
        argmax_r,
        probs,
    })
}

/// The feature subsets that determined each task's prediction.
pub fn key_proposals(trace: &ForwardTrace, ps: &ProposalSet) -> Vec<Vec<usize>> {
    trace
        .argmax_r
        .iter()
        .map(|&r| ps.proposals[r].clone())
        .collect()
}
