//! Deterministic random sub-streams.
//!
//! Every random draw in a run comes from a ChaCha stream whose key is derived
//! from `(run seed, stream tag, index)` and whose stream id selects the term or
//! sample within that index, so the order in which independent pieces are
//! computed never changes the numbers they see.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

pub type StreamRng = ChaCha12Rng;

/// Purpose tags keeping different consumers of one run seed apart.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum StreamTag {
    ShotNoise = 0x5348_4f54,
    Optimizer = 0x4f50_5449,
    Racing = 0x5241_4345,
    Objective = 0x4f42_4a45,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a seed with a tag and an index into a fresh 64-bit key.
pub fn derive_seed(seed: u64, tag: StreamTag, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ tag as u64) ^ index)
}

/// Stream `stream` of the generator keyed by `(seed, tag, index)`.
pub fn substream(seed: u64, tag: StreamTag, index: u64, stream: u64) -> StreamRng {
    let mut rng = StreamRng::seed_from_u64(derive_seed(seed, tag, index));
    rng.set_stream(stream);
    rng
}
