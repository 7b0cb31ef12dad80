//! Seed derivation. Every random decision in the crate comes from a ChaCha8
//! generator whose key is derived from the user seed and a purpose tag, so
//! independent concerns never share a stream.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub(crate) const IDS: u64 = 0x1d5;
pub(crate) const GENERATE: u64 = 0x6e4;
pub(crate) const SHUFFLE: u64 = 0x5f1;
pub(crate) const SA_DRAW: u64 = 0x5a0;
pub(crate) const GLOBAL_DRAW: u64 = 0x91b;
pub(crate) const ANATOMY: u64 = 0xa7a;
pub(crate) const LAPLACE: u64 = 0x1a9;
pub(crate) const POOL: u64 = 0x900;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a seed with a purpose tag and an index into a fresh 64-bit seed.
pub fn derive(seed: u64, tag: u64, index: u64) -> u64 {
    splitmix64(splitmix64(seed ^ splitmix64(tag)) ^ index.wrapping_mul(0xd6e8_feb8_6659_fd93))
}

pub fn rng(seed: u64, tag: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(seed, tag, index))
}

/// Generator for the item `item` of a keyed family: same key, distinct
/// ChaCha stream per item.
pub fn item_rng(family_seed: u64, item: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(family_seed);
    rng.set_stream(item);
    rng
}

/// Hex digest of a seed, published in sidecars so that two releases can be
/// compared without revealing the seed itself.
pub fn fingerprint(seed: u64) -> String {
    let digest = Sha256::digest(seed.to_le_bytes());
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}
