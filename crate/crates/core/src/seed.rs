//! Seed derivation for independent random streams.
//!
//! Every consumer of randomness (a sampling run, a CV fold, a replicate)
//! receives its own `ChaCha8Rng` seeded from `(master, stream, index)`. The
//! derived seed is `master ⊕ mix(stream, index)`, so results never depend on
//! the order in which parallel work is scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream tags, one per independent consumer of randomness.
pub mod stream {
    pub const SPLIT: u64 = 0x5350_4c49_5400_0001;
    pub const KFOLD: u64 = 0x4b46_4f4c_4400_0002;
    pub const MCCV: u64 = 0x4d43_4356_0000_0003;
    pub const STRS_RUN: u64 = 0x5354_5253_0000_0004;
    pub const STRS_CV: u64 = 0x5354_5243_5600_0005;
    pub const MCUVE_ITER: u64 = 0x4d43_5556_4500_0006;
    pub const MCUVE_CV: u64 = 0x4d43_5543_5600_0007;
    pub const REPLICATE: u64 = 0x5245_504c_0000_0008;
    pub const SYNTH: u64 = 0x5359_4e54_4800_0009;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive(master: u64, stream: u64, index: u64) -> u64 {
    master ^ splitmix64(stream ^ splitmix64(index))
}

pub fn rng(master: u64, stream: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(master, stream, index))
}
