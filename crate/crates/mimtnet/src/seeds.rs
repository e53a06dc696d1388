//! Deterministic seed derivation.
//!
//! Every randomized stage (fold splitting, per-fold training, sweep points,
//! subsampling, noise columns) draws from its own stream, derived from the
//! root seed plus a context string and indices. Reordering or parallelizing
//! stages therefore cannot change any result.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// FNV-1a over the context bytes, finalized with a splitmix64 round.
pub fn derive_seed(root: u64, context: &str, indices: &[u64]) -> u64 {
    const FNV_OFFSET: u64 = 0xcbf29ce484222325;
    const FNV_PRIME: u64 = 0x100000001b3;

    let mut h = FNV_OFFSET;
    let mut absorb = |bytes: &[u8]| {
        for &b in bytes {
            h ^= u64::from(b);
            h = h.wrapping_mul(FNV_PRIME);
        }
    };
    absorb(&root.to_le_bytes());
    absorb(context.as_bytes());
    for &ix in indices {
        absorb(&ix.to_le_bytes());
    }

    // splitmix64 finalizer
    let mut z = h.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Seeded stream for a derived context.
pub fn rng_for(root: u64, context: &str, indices: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(root, context, indices))
}

/// Stream seeded directly from a user-facing seed value.
pub fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
