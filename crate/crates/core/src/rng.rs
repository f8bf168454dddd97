//! Seed derivation. Every random stream in the crate is a `ChaCha8Rng`
//! keyed by a global seed mixed with a tuple of stream tags, so results do
//! not depend on evaluation order or worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes `tags` into `seed`. Distinct tag tuples give independent seeds.
pub fn derive_seed(seed: u64, tags: &[u64]) -> u64 {
    tags.iter()
        .fold(splitmix64(seed), |acc, &t| splitmix64(acc ^ splitmix64(t)))
}

pub fn stream(seed: u64, tags: &[u64]) -> StreamRng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, tags))
}

/// Stable 64-bit FNV-1a, used for parameter hashes embedded in artifacts.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

// Stage tags.
pub(crate) const TAG_SHUFFLE: u64 = 1;
pub(crate) const TAG_WALK: u64 = 2;
pub(crate) const TAG_REFLIST: u64 = 3;
pub(crate) const TAG_INIT: u64 = 4;
pub(crate) const TAG_TRAIN: u64 = 5;
pub(crate) const TAG_SELECT: u64 = 6;
pub(crate) const TAG_HIDE: u64 = 7;
pub(crate) const TAG_RANDOM_RANK: u64 = 8;
