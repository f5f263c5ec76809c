//! Seeding contract for ensembles.
//!
//! Member `i` of an ensemble always draws from `ChaCha8Rng::seed_from_u64(base ^ i)`,
//! so results do not depend on scheduling or on how many members run.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type PathRng = ChaCha8Rng;

#[inline]
pub fn member_seed(base_seed: u64, index: u64) -> u64 {
    base_seed ^ index
}

pub fn rng_from_seed(seed: u64) -> PathRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn member_rng(base_seed: u64, index: u64) -> PathRng {
    rng_from_seed(member_seed(base_seed, index))
}
