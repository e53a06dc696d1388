//! Robustness experiments: shrink the training portion of each fold, or
//! append random noise feature columns, and compare how the multi-instance
//! network and ML-KNN degrade on paired splits.
//!
//! Run with: cargo run --release --example robustness

use mimtnet::harness::{self, HarnessConfig};
use mimtnet::{generate_synthetic, SyntheticSpec, TrainConfig};

fn print_series(report: &harness::Report) {
    for s in &report.series {
        println!(
            "  {:15} {:8} mean MAP {}",
            s.label,
            s.model,
            s.mean.map.map_or_else(|| "NA".into(), |v| format!("{v:.4}"))
        );
    }
}

fn main() -> mimtnet::Result<()> {
    let spec = SyntheticSpec {
        patients: 250,
        features: 40,
        tasks: 4,
        keys_per_task: 2,
        background_rate: 0.05,
        min_task_frequency: 25,
        seed: 41,
        ..SyntheticSpec::default()
    };
    let (dataset, _) = generate_synthetic(&spec)?;

    let cfg = HarnessConfig {
        train: TrainConfig {
            epochs: 40,
            proposals: 150,
            max_size: 6,
            ..TrainConfig::default()
        },
        knn_k: 10,
        seed: 41,
        ..HarnessConfig::default()
    };

    println!("training-fraction subsample (both models, paired folds):");
    let report = harness::subsample_experiment(&dataset, &[0.6, 1.0], &cfg)?;
    print_series(&report);

    println!("appended noise feature columns (both models, paired folds):");
    let report = harness::noise_experiment(&dataset, &[0, 20], &cfg)?;
    print_series(&report);
    Ok(())
}
