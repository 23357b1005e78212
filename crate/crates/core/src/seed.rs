//! Seed derivation. Every random draw in the crate is keyed by a seed derived
//! from a base seed and a path of tags, so that per-item work can run in any
//! order (or concurrently) and still reproduce bit-for-bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Seed used whenever the caller does not supply one.
pub const DEFAULT_SEED: u64 = 0x5eed_2019;

#[inline]
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Derive a child seed from `base` and a sequence of tags.
pub fn derive(base: u64, tags: &[u64]) -> u64 {
    tags.iter()
        .fold(splitmix64(base), |acc, &t| splitmix64(acc ^ splitmix64(t)))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Stream tags, kept distinct so that unrelated draws never share a seed.
pub mod tag {
    pub const PRIORITY: u64 = 1;
    pub const SAMPLE: u64 = 2;
    pub const PARTITION: u64 = 3;
    pub const REPETITION: u64 = 4;
    pub const CLEANUP: u64 = 5;
    pub const PHASE: u64 = 6;
    pub const RETRY: u64 = 7;
    pub const TRIAL: u64 = 8;
    pub const GRAPH: u64 = 9;
    pub const MACHINE: u64 = 10;
}
