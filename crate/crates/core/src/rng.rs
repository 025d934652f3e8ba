//! Deterministic per-sample random streams.
//!
//! Every sampler draws from a ChaCha stream keyed by `(seed, stream)`, so an
//! ensemble computed on any number of workers reproduces bit for bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream tags so that independent components of one sample never share
/// random numbers.
pub mod streams {
    pub const FIELD: u64 = 1;
    pub const CONE_POSITIVE: u64 = 2;
    pub const CONE_NEGATIVE: u64 = 3;
    pub const CONE_LATERAL: u64 = 4;
    pub const BOUNDARY_LENGTH: u64 = 5;
    pub const EXP_FUNCTIONAL: u64 = 6;
}

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Mixes a base seed with a sample index (splitmix64 finalizer).
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
