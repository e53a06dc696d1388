//! Compare the multi-instance network against both baselines with 5-fold
//! cross-validation on the same split, and print the report document.
//!
//! Run with: cargo run --release --example cross_validate

use mimtnet::harness::{self, HarnessConfig, ModelKind};
use mimtnet::{generate_synthetic, SyntheticSpec, TrainConfig};

fn main() -> mimtnet::Result<()> {
    let spec = SyntheticSpec {
        patients: 250,
        features: 40,
        tasks: 4,
        keys_per_task: 2,
        background_rate: 0.05,
        min_task_frequency: 25,
        seed: 13,
        ..SyntheticSpec::default()
    };
    let (dataset, _) = generate_synthetic(&spec)?;

    let base = HarnessConfig {
        train: TrainConfig {
            epochs: 40,
            proposals: 150,
            max_size: 6,
            ..TrainConfig::default()
        },
        knn_k: 10,
        seed: 13,
        ..HarnessConfig::default()
    };

    for kind in [ModelKind::Mimtcnn, ModelKind::Mlknn, ModelKind::Mlp] {
        let cfg = HarnessConfig {
            model: kind,
            ..base.clone()
        };
        let report = harness::run_cv(&dataset, &cfg)?;
        let mean = &report.series[0].mean;
        println!(
            "{:8} mean MAP {}  hamming {:.4}  subset {:.4}",
            kind.as_str(),
            mean.map.map_or_else(|| "NA".into(), |v| format!("{v:.4}")),
            mean.hamming_loss,
            mean.subset_accuracy,
        );
        if kind == ModelKind::Mimtcnn {
            println!("\nfull report document for {}:\n{}", kind.as_str(), report.to_document());
        }
    }
    Ok(())
}
