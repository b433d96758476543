//! Seed derivation. Every random stream in the crate is a ChaCha generator
//! keyed by a 64-bit seed mixed from a master seed, a stream id and an index.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Stream ids used when deriving sub-seeds. Distinct ids never collide
/// because the id is mixed in before the index.
pub mod streams {
    pub const BOMC_BLOCK: u64 = 0x0b0c;
    pub const ROTATION: u64 = 0x7070;
    pub const RADII: u64 = 0x7ad1;
    pub const QMC_SHIFT: u64 = 0x0a5f;
    pub const SUBSAMPLE: u64 = 0x5ab5;
    pub const PHASES: u64 = 0xfa5e;
    pub const PAIRS: u64 = 0x9a12;
    pub const CLOUD: u64 = 0xc10d;
    pub const REFERENCE: u64 = 0x4ef0;
    pub const COVARIANCE: u64 = 0xc0fa;
    pub const BOOTSTRAP: u64 = 0xb007;
    pub const METHOD_BASE: u64 = 0x1000;
}

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives the seed of trial `index` on stream `stream` under `master`.
pub fn derive_seed(master: u64, stream: u64, index: u64) -> u64 {
    mix64(mix64(mix64(master) ^ stream) ^ index)
}

pub fn rng(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}
