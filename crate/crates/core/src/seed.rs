//! Seed hierarchy.
//!
//! Every random decision in the pipeline draws from a generator seeded by
//! [`derive`], a pure function of a parent seed and a (stream, index) pair.
//! Work items therefore own their randomness up front, and any parallel
//! schedule reproduces the sequential result bit for bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SeedRng = ChaCha8Rng;

/// Stream tags. Distinct purposes never share a derived seed.
pub mod stream {
    pub const SPLIT: u64 = 0x5350_4c49;
    pub const PERMUTE: u64 = 0x5045_524d;
    pub const GROWTH: u64 = 0x4752_4f57;
    pub const SHRINK: u64 = 0x5348_524b;
    pub const FOLD: u64 = 0x464f_4c44;
    pub const PARTITION: u64 = 0x5041_5254;
    pub const OUTER_CV: u64 = 0x4f43_5656;
    pub const REPLICATE: u64 = 0x5245_504c;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a child seed from `parent` for item `index` of `stream`.
pub fn derive(parent: u64, stream: u64, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(parent) ^ stream) ^ index.wrapping_mul(0xd6e8_feb8_6659_fd93))
}

pub fn rng(seed: u64) -> SeedRng {
    ChaCha8Rng::seed_from_u64(seed)
}
