//! Seed derivation.
//!
//! Every random draw in the pipeline comes from a `ChaCha20Rng` seeded with a
//! 64-bit value derived from a master seed, a purpose label and an index. The
//! derivation is a chain of SplitMix64 finalizers, so any sample can be
//! regenerated on its own, in any order.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub type SimRng = ChaCha20Rng;

/// Purpose labels keep independent streams apart even for equal indices.
pub mod label {
    pub const AP_LAYOUT: u64 = 0x4150_4c41_594f_5554;
    pub const INSTANCE: u64 = 0x494e_5354_414e_4345;
    pub const SHUFFLE: u64 = 0x5348_5546_464c_4521;
    pub const INIT: u64 = 0x494e_4954_5741_5453;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive_seed(master: u64, label: u64, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ label) ^ index)
}

pub fn seeded(seed: u64) -> SimRng {
    ChaCha20Rng::seed_from_u64(seed)
}
