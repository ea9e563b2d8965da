//! Seeding discipline: every random quantity is a pure function of a user
//! seed, a stream tag, and an instance index. Instances can therefore be
//! generated in any order (or concurrently) without changing the output.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

pub type Rng = ChaCha12Rng;

/// Stream tags keep independent parts of a pipeline from sharing a generator.
pub mod stream {
    pub const GROUND_TRUTH: u64 = 1;
    pub const TRAIN_INSTANCE: u64 = 2;
    pub const TEST_INSTANCE: u64 = 3;
    pub const FEATURE_MAP: u64 = 4;
    pub const SPLIT: u64 = 5;
    pub const INIT: u64 = 6;
    pub const NOISE: u64 = 7;
}

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

/// Derive a child seed from (master, stream, index) with splitmix64 finalizers.
pub fn derive_seed(master: u64, stream: u64, index: u64) -> u64 {
    let mut z = master;
    z = splitmix(z.wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15)));
    z = splitmix(z.wrapping_add(index.wrapping_mul(0xBF58_476D_1CE4_E5B9)));
    z
}

pub fn derived_rng(master: u64, stream: u64, index: u64) -> Rng {
    rng_from_seed(derive_seed(master, stream, index))
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
