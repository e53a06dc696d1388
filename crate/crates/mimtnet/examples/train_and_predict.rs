//! Train the multi-instance network on synthetic data, hold out a test split,
//! and report the standard multi-label metrics. Also demonstrates saving the
//! model and loading it back with bit-identical predictions.
//!
//! Run with: cargo run --release --example train_and_predict

use mimtnet::metrics::{self, EvalInput};
use mimtnet::model_io::{self, AnyModel};
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
        seed: 5,
        ..SyntheticSpec::default()
    };
    let (dataset, _) = generate_synthetic(&spec)?;

    // Simple 80/20 holdout; the cross_validate example shows proper CV.
    let cut = dataset.sample_count() * 4 / 5;
    let train_ix: Vec<usize> = (0..cut).collect();
    let test_ix: Vec<usize> = (cut..dataset.sample_count()).collect();
    let train = dataset.select_rows(&train_ix);
    let test = dataset.select_rows(&test_ix);

    let config = TrainConfig {
        epochs: 60,
        proposals: 200,
        max_size: 6,
        ..TrainConfig::default()
    };
    let model = training::train(&train, &config)?;
    println!(
        "trained {} epochs; loss {:.3} -> {:.3}",
        config.epochs,
        model.loss_history.first().unwrap(),
        model.loss_history.last().unwrap()
    );

    let (probs, hard) = training::predict(&model, &test.features)?;
    let inp = EvalInput::new(probs, hard, test.labels.clone())?;
    if let Some(map) = metrics::mean_average_precision(&inp) {
        println!("test MAP            {:.4}", map.value);
    }
    println!("test hamming loss   {:.4}", metrics::hamming_loss(&inp));
    println!("test subset accuracy {:.4}", metrics::subset_accuracy(&inp));

    // Round-trip through the text format.
    let dir = std::env::temp_dir().join("mimtnet_example_model.txt");
    model_io::save(&AnyModel::Mimtcnn(model), &dir)?;
    let loaded = model_io::load(&dir)?;
    let (reloaded_probs, _) = loaded.predict(&test.features)?;
    assert_eq!(inp.probs, reloaded_probs);
    println!("model round-tripped through {} bit-exactly", dir.display());
    Ok(())
}
