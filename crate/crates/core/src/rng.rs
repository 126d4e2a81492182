//! Deterministic random streams.
//!
//! Every draw in an estimator owns a stream derived from the root seed and a
//! `(level, sample)` key, so results do not depend on how samples are spread
//! over worker threads.

use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;

/// Generator used for all sampling.
pub type StreamRng = Xoshiro256PlusPlus;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a root seed with a `(level, index)` key into a child seed.
#[inline]
pub fn child_seed(root: u64, level: u64, index: u64) -> u64 {
    let h = splitmix64(root);
    let h = splitmix64(h ^ level.wrapping_mul(0xd1b5_4a32_d192_ed03));
    splitmix64(h ^ index)
}

/// Stream for sample `index` of level `level`.
#[inline]
pub fn stream(root: u64, level: u64, index: u64) -> StreamRng {
    StreamRng::seed_from_u64(child_seed(root, level, index))
}

/// Stream keyed by the root seed only.
pub fn root_stream(root: u64) -> StreamRng {
    StreamRng::seed_from_u64(splitmix64(root))
}
