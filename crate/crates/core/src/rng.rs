use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

pub fn rng(seed: u64) -> SplitMix64 {
    SplitMix64::seed_from_u64(seed)
}

/// Independent stream `stream` of a master seed; used to shard Monte-Carlo
/// work so results do not depend on the thread count.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut r = SplitMix64::seed_from_u64(seed ^ stream.wrapping_add(1).wrapping_mul(GOLDEN));
    r.gen()
}

pub fn uniform_values(rng: &mut impl Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.gen::<f64>()).collect()
}
