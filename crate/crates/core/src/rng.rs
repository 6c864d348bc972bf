//! Seed derivation for reproducible parallel simulation.
//!
//! Every random quantity in the crate is drawn from a ChaCha8 stream that is a
//! pure function of a master seed and an index path, so results never depend
//! on worker count or scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a child seed from `seed` and a tag. Distinct tags give
/// statistically unrelated children.
pub fn derive(seed: u64, tag: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ tag.wrapping_mul(0xd6e8_feb8_6659_fd93))
}

/// Derives a child seed from a string label, for named sub-streams.
pub fn derive_named(seed: u64, label: &str) -> u64 {
    let tag = label
        .bytes()
        .fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x100_0000_01b3));
    derive(seed, tag)
}

pub fn seeded(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `index` under `seed`.
pub fn stream(seed: u64, index: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Cheaper [`stream`] when many streams share one seed: clone a seeded base
/// and switch its stream.
pub(crate) fn stream_from(base: &SimRng, index: u64) -> SimRng {
    let mut rng = base.clone();
    rng.set_stream(index);
    rng
}
