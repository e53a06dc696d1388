//! Region proposal generation and instance extraction.
//!
//! A proposal is a fixed random subset of feature indices. Proposals are
//! drawn once per model and shared across every patient and across
//! train/inference, so the convolution weights always see the same index
//! semantics. Extracting a patient's instances gathers the feature values at
//! each proposal's indices (ascending order) and zero-pads to the maximum
//! proposal size.

use rand::Rng;

use crate::error::{Error, Result};
use crate::seeds;

/// The model's fixed set of feature-index subsets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProposalSet {
    pub proposals: Vec<Vec<usize>>,
    pub max_size: usize,
    pub feature_count: usize,
    pub seed: u64,
}

impl ProposalSet {
    pub fn count(&self) -> usize {
        self.proposals.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.proposals.is_empty() {
            return Err(Error::Parameter("proposal set is empty".into()));
        }
        for (r, prop) in self.proposals.iter().enumerate() {
            if prop.is_empty() || prop.len() > self.max_size {
                return Err(Error::Parameter(format!(
                    "proposal {r} has size {} outside 1..={}",
                    prop.len(),
                    self.max_size
                )));
            }
            if !prop.windows(2).all(|w| w[0] < w[1]) {
                return Err(Error::Parameter(format!(
                    "proposal {r} indices are not strictly ascending"
                )));
            }
            if *prop.last().unwrap() >= self.feature_count {
                return Err(Error::Parameter(format!(
                    "proposal {r} has an index >= feature count {}",
                    self.feature_count
                )));
            }
        }
        Ok(())
    }
}

/// Draw `count` proposals: size uniform in 1..=max_size, then that many
/// distinct indices uniform over 0..d, stored sorted. Duplicate proposals
/// are permitted.
pub fn generate_proposals(
    feature_count: usize,
    count: usize,
    max_size: usize,
    seed: u64,
) -> Result<ProposalSet> {
    if max_size == 0 || max_size > feature_count {
        return Err(Error::Parameter(format!(
            "max proposal size {max_size} must be in 1..=feature count {feature_count}"
        )));
    }
    if count == 0 {
        return Err(Error::Parameter("proposal count must be >= 1".into()));
    }
    let mut rng = seeds::rng_from(seed);
    let mut proposals = Vec::with_capacity(count);
    for _ in 0..count {
        let len = rng.gen_range(1..=max_size);
        let mut indices = rand::seq::index::sample(&mut rng, feature_count, len).into_vec();
        indices.sort_unstable();
        proposals.push(indices);
    }
    Ok(ProposalSet {
        proposals,
        max_size,
        feature_count,
        seed,
    })
}

/// Gather one patient's values into the R x S instance matrix.
pub fn extract_instances(ps: &ProposalSet, row: &[u8]) -> Result<Vec<Vec<f64>>> {
    if row.len() != ps.feature_count {
        return Err(Error::Shape(format!(
            "feature row has width {}, proposal set expects {}",
            row.len(),
            ps.feature_count
        )));
    }
    let mut out = Vec::with_capacity(ps.count());
    for prop in &ps.proposals {
        let mut inst = vec![0.0f64; ps.max_size];
        for (slot, &f) in prop.iter().enumerate() {
            inst[slot] = f64::from(row[f]);
        }
        out.push(inst);
    }
    Ok(out)
}
