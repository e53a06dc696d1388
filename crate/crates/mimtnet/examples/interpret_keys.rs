//! Interpretability: for each positive prediction, the proposal that won the
//! max pooling ("key proposal") names the feature subset that drove the
//! decision. On planted data we can check those features against the known
//! generating keys.
//!
//! Run with: cargo run --release --example interpret_keys

use mimtnet::network;
use mimtnet::training;
use mimtnet::{generate_synthetic, SyntheticSpec, TrainConfig};

fn main() -> mimtnet::Result<()> {
    let spec = SyntheticSpec {
        patients: 300,
        features: 40,
        tasks: 4,
        keys_per_task: 2,
        background_rate: 0.05,
        min_task_frequency: 25,
        seed: 17,
        ..SyntheticSpec::default()
    };
    let (dataset, keys) = generate_synthetic(&spec)?;

    let config = TrainConfig {
        epochs: 60,
        proposals: 200,
        max_size: 6,
        ..TrainConfig::default()
    };
    let model = training::train(&dataset, &config)?;

    let mut true_positives = 0usize;
    let mut hits = 0usize;
    for (row, labels) in dataset.features.iter().zip(&dataset.labels) {
        let trace = training::forward_row(&model, row)?;
        let key_props = network::key_proposals(&trace, &model.proposal_set);
        for t in 0..dataset.task_count() {
            if labels[t] == 1 && trace.probs[t] > 0.5 {
                true_positives += 1;
                if key_props[t].iter().any(|f| keys[t].contains(f)) {
                    hits += 1;
                }
            }
        }
    }
    println!(
        "{} of {} true-positive predictions have a key proposal touching a planted key feature ({:.1}%)",
        hits,
        true_positives,
        100.0 * hits as f64 / true_positives.max(1) as f64
    );

    // Show one concrete explanation.
    let row = &dataset.features[0];
    let trace = training::forward_row(&model, row)?;
    let key_props = network::key_proposals(&trace, &model.proposal_set);
    for t in 0..dataset.task_count() {
        if trace.probs[t] > 0.5 {
            let names: Vec<&str> = key_props[t]
                .iter()
                .map(|&f| dataset.feature_names[f].as_str())
                .collect();
            println!(
                "sample 0, task {}: p={:.3}, decisive features: {}",
                dataset.label_names[t],
                trace.probs[t],
                names.join(" ")
            );
        }
    }
    Ok(())
}
