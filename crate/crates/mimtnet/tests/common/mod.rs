//! Shared central finite-difference gradient checking.
//!
//! Compiled into several test binaries; not every binary uses every item.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use mimtnet::baselines::{self, MlpModel};
use mimtnet::network::{self, ForwardTrace, ModelParams};
use mimtnet::sampler;
use mimtnet::seeds;
use mimtnet::training::{self, TrainConfig};

pub const FD_STEP: f64 = 1e-3;
pub const REL_TOL: f64 = 1e-4;
/// Coordinates where both gradients are below this magnitude compare equal.
const TINY: f64 = 1e-7;

#[derive(Debug, Default)]
pub struct GradCheckOutcome {
    pub checked: usize,
    pub skipped: usize,
    pub max_rel_err: f64,
}

pub fn relative_error(a: f64, b: f64) -> f64 {
    if a.abs() < TINY && b.abs() < TINY {
        return 0.0;
    }
    (a - b).abs() / a.abs().max(b.abs())
}

/// Sizes of one randomized gradient-check configuration.
#[derive(Debug, Clone, Copy)]
pub struct TinyConfig {
    pub d: usize,
    pub r: usize,
    pub s: usize,
    pub f: usize,
    pub h: usize,
    pub n: usize,
    pub m: usize,
}

pub fn random_tiny_config(rng: &mut ChaCha8Rng) -> TinyConfig {
    let d = rng.gen_range(3..=12);
    TinyConfig {
        d,
        r: rng.gen_range(1..=8),
        s: rng.gen_range(1..=4.min(d)),
        f: rng.gen_range(1..=2),
        h: rng.gen_range(1..=5),
        n: rng.gen_range(1..=3),
        m: rng.gen_range(1..=6),
    }
}

fn random_bits(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Vec<Vec<u8>> {
    (0..rows)
        .map(|_| (0..cols).map(|_| rng.gen_range(0..=1u8)).collect())
        .collect()
}

/// State of every nondifferentiable switch in the network for one dataset:
/// pooling argmaxes and ReLU on/off patterns. Perturbations that flip any
/// switch are excluded from finite-difference comparison.
fn switch_pattern(traces: &[ForwardTrace]) -> Vec<(Vec<usize>, Vec<bool>, Vec<bool>)> {
    traces
        .iter()
        .map(|t| {
            (
                t.argmax_r.clone(),
                t.conv_pre.iter().map(|&v| v > 0.0).collect(),
                t.fc1_pre.iter().map(|&v| v > 0.0).collect(),
            )
        })
        .collect()
}

fn eval(
    params: &ModelParams,
    instances: &[Vec<Vec<f64>>],
    labels: &[Vec<u8>],
) -> (f64, Vec<(Vec<usize>, Vec<bool>, Vec<bool>)>) {
    let traces: Vec<ForwardTrace> = instances
        .iter()
        .map(|inst| network::forward(params, inst.clone()).unwrap())
        .collect();
    let logits: Vec<Vec<f64>> = traces.iter().map(|t| t.bag_scores.clone()).collect();
    (
        training::bce_loss(&logits, labels),
        switch_pattern(&traces),
    )
}

/// Check every parameter coordinate of a randomly configured MIMT network
/// against central finite differences.
pub fn gradcheck_mimtcnn(cfg: TinyConfig, seed: u64) -> GradCheckOutcome {
    let mut rng = seeds::rng_from(seed);
    let ps = sampler::generate_proposals(cfg.d, cfg.r, cfg.s, seed ^ 0x5eed).unwrap();
    let features = random_bits(&mut rng, cfg.m, cfg.d);
    let labels = random_bits(&mut rng, cfg.m, cfg.n);
    let instances: Vec<Vec<Vec<f64>>> = features
        .iter()
        .map(|row| sampler::extract_instances(&ps, row).unwrap())
        .collect();

    let train_cfg = TrainConfig {
        filters: cfg.f,
        max_size: cfg.s,
        hidden: cfg.h,
        seed,
        ..TrainConfig::default()
    };
    let mut params = training::init_params(&train_cfg, cfg.n);
    // Nonzero biases keep pre-activations away from the ReLU kink at 0.
    for slice in params.slices_mut() {
        for v in slice.iter_mut() {
            *v += rng.gen_range(-0.3..0.3);
        }
    }

    let traces: Vec<ForwardTrace> = instances
        .iter()
        .map(|inst| network::forward(&params, inst.clone()).unwrap())
        .collect();
    let base_pattern = switch_pattern(&traces);
    let analytic = training::backward(&params, &traces, &labels);

    let mut outcome = GradCheckOutcome::default();
    let n_slices = params.slices().len();
    for slice_ix in 0..n_slices {
        let len = params.slices()[slice_ix].len();
        for i in 0..len {
            let grad = analytic.slices()[slice_ix][i];
            let perturbed = |delta: f64| {
                let mut p = params.clone();
                p.slices_mut()[slice_ix][i] += delta;
                eval(&p, &instances, &labels)
            };
            let (loss_plus, pat_plus) = perturbed(FD_STEP);
            let (loss_minus, pat_minus) = perturbed(-FD_STEP);
            if pat_plus != base_pattern || pat_minus != base_pattern {
                outcome.skipped += 1;
                continue;
            }
            let fd = (loss_plus - loss_minus) / (2.0 * FD_STEP);
            outcome.checked += 1;
            outcome.max_rel_err = outcome.max_rel_err.max(relative_error(grad, fd));
        }
    }
    outcome
}

/// Same check for the MLP baseline (no pooling; only ReLU switches).
pub fn gradcheck_mlp(d: usize, h: usize, n: usize, m: usize, seed: u64) -> GradCheckOutcome {
    let mut rng = seeds::rng_from(seed);
    let feature_bits = random_bits(&mut rng, m, d);
    let features: Vec<Vec<f64>> = feature_bits
        .iter()
        .map(|row| row.iter().map(|&v| f64::from(v)).collect())
        .collect();
    let labels = random_bits(&mut rng, m, n);

    let model = MlpModel {
        input: d,
        hidden: h,
        tasks: n,
        w1: (0..h * d).map(|_| rng.gen_range(-0.5..0.5)).collect(),
        b1: (0..h).map(|_| rng.gen_range(-0.3..0.3)).collect(),
        w2: (0..n * h).map(|_| rng.gen_range(-0.5..0.5)).collect(),
        b2: (0..n).map(|_| rng.gen_range(-0.3..0.3)).collect(),
        config: TrainConfig::default(),
        feature_names: Vec::new(),
        label_names: Vec::new(),
        loss_history: Vec::new(),
    };

    // Independent scalar-loop forward pass, so the check does not share code
    // with the implementation under test.
    let mlp_eval = |model: &MlpModel| -> (f64, Vec<Vec<bool>>) {
        let mut loss = 0.0;
        let mut pattern = Vec::new();
        for (row, yrow) in features.iter().zip(&labels) {
            let pre: Vec<f64> = (0..h)
                .map(|hh| {
                    (0..d).map(|j| model.w1[hh * d + j] * row[j]).sum::<f64>() + model.b1[hh]
                })
                .collect();
            let act: Vec<f64> = pre.iter().map(|&v| v.max(0.0)).collect();
            let logits: Vec<f64> = (0..n)
                .map(|t| {
                    (0..h).map(|hh| model.w2[t * h + hh] * act[hh]).sum::<f64>() + model.b2[t]
                })
                .collect();
            pattern.push(pre.iter().map(|&v| v > 0.0).collect());
            loss += training::bce_loss(&[logits], std::slice::from_ref(yrow));
        }
        (loss, pattern)
    };

    let (_, base_pattern) = mlp_eval(&model);
    let (gw1, gb1, gw2, gb2) = baselines::mlp_gradients(&model, &features, &labels);
    let analytic = [gw1, gb1, gw2, gb2];

    let mut outcome = GradCheckOutcome::default();
    for slice_ix in 0..4 {
        let len = analytic[slice_ix].len();
        for i in 0..len {
            let grad = analytic[slice_ix][i];
            let perturbed = |delta: f64| {
                let mut m2 = model.clone();
                let slice = match slice_ix {
                    0 => &mut m2.w1,
                    1 => &mut m2.b1,
                    2 => &mut m2.w2,
                    _ => &mut m2.b2,
                };
                slice[i] += delta;
                mlp_eval(&m2)
            };
            let (loss_plus, pat_plus) = perturbed(FD_STEP);
            let (loss_minus, pat_minus) = perturbed(-FD_STEP);
            if pat_plus != base_pattern || pat_minus != base_pattern {
                outcome.skipped += 1;
                continue;
            }
            let fd = (loss_plus - loss_minus) / (2.0 * FD_STEP);
            outcome.checked += 1;
            outcome.max_rel_err = outcome.max_rel_err.max(relative_error(grad, fd));
        }
    }
    outcome
}
