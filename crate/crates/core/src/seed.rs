//! Counter-based seed derivation.
//!
//! Every random stream in a run (minibatch order for an epoch, gradient
//! noise for a step, a grid replicate) is keyed by the master seed plus a
//! path of counters, so streams are independent of execution order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes `master` with each counter in `path` in order.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix64(master), |acc, &c| {
        splitmix64(acc ^ splitmix64(c))
    })
}

pub fn rng_for(master: u64, path: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, path))
}

/// Stream tags, so different uses of the same counter never collide.
pub mod stream {
    pub const EPOCH: u64 = 1;
    pub const NOISE: u64 = 2;
    pub const REPLICATE: u64 = 3;
    pub const GRID_POINT: u64 = 4;
    pub const FUZZ: u64 = 5;
}
