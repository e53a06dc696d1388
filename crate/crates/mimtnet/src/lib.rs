//! Multi-instance multi-task convolutional classifier for sparse binary
//! multi-label data, with baselines, evaluation, and experiment tooling.
//!
//! Each sample is a binary feature row (e.g. recorded symptoms) with several
//! binary labels. Instead of feeding the row to a dense model directly, the
//! classifier gathers many small random feature subsets ("proposals"), scores
//! each subset with a shared convolutional network, and max-pools the scores
//! per task. The pooled score is the bag-level prediction, and the proposal
//! attaining the max identifies which feature subset drove each decision.
//!
//! Module map:
//! - [`dataio`]: dataset type, CSV round trips, synthetic corpus generator
//! - [`sampler`]: random region proposals and instance extraction
//! - [`network`]: forward pass, pooling, key-proposal extraction
//! - [`training`]: loss, exact gradients, Adam, the full-batch training loop
//! - [`metrics`]: multi-label evaluation metrics
//! - [`baselines`]: ML-KNN and a single-hidden-layer MLP
//! - [`harness`]: cross-validation, sweeps, robustness experiments, reports
//! - [`model_io`]: text serialization for all trained model kinds
//!
//! All randomness flows through per-purpose streams derived from a single
//! root seed ([`seeds`]), so every pipeline stage is reproducible bit for bit.

pub mod baselines;
pub mod cli;
pub mod dataio;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod model_io;
pub mod network;
pub mod sampler;
pub mod seeds;
pub mod training;

pub use dataio::{generate_synthetic, Dataset, SyntheticSpec};
pub use error::{Error, Result};
pub use harness::{HarnessConfig, ModelKind, Report};
pub use model_io::AnyModel;
pub use sampler::ProposalSet;
pub use training::{Model, TrainConfig};
