//! Sweep the number of generated region proposals and the maximum proposal
//! size, reporting mean cross-validated MAP at each point. MAP typically
//! plateaus once enough proposals are drawn.
//!
//! Run with: cargo run --release --example sweep_proposals

use mimtnet::harness::{self, HarnessConfig};
use mimtnet::{generate_synthetic, SyntheticSpec, TrainConfig};

fn main() -> mimtnet::Result<()> {
    let spec = SyntheticSpec {
        patients: 250,
        features: 40,
        tasks: 4,
        keys_per_task: 2,
        background_rate: 0.05,
        min_task_frequency: 25,
        seed: 29,
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
        seed: 29,
        ..HarnessConfig::default()
    };

    let report = harness::sweep_generation_times(&dataset, &[25, 100, 400], &cfg)?;
    println!("proposal-count sweep:");
    for s in &report.series {
        println!(
            "  {:15} mean MAP {}",
            s.label,
            s.mean.map.map_or_else(|| "NA".into(), |v| format!("{v:.4}"))
        );
    }

    let report = harness::sweep_max_size(&dataset, &[2, 6, 12], &cfg)?;
    println!("max-size sweep:");
    for s in &report.series {
        println!(
            "  {:15} mean MAP {}",
            s.label,
            s.mean.map.map_or_else(|| "NA".into(), |v| format!("{v:.4}"))
        );
    }
    Ok(())
}
