//! Seeded randomness. Every random draw in the crate goes through a ChaCha8
//! stream keyed by an explicit 64-bit seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derive an independent sub-seed from a master seed and a path of tags
/// (splitmix64 finalizer over each step).
pub fn derive(master: u64, tags: &[u64]) -> u64 {
    let mut z = master;
    for &t in tags {
        z = mix(z ^ mix(t.wrapping_add(0x9e37_79b9_7f4a_7c15)));
    }
    z
}

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
