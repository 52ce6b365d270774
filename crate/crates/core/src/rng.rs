//! Counter-based random streams.
//!
//! Every random draw in the crate comes from a ChaCha8 stream selected by
//! `(seed, index)`. Work item `i` always sees the same numbers regardless of
//! how work is ordered or split across threads.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Generator for work item `index` under `seed`.
pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Derives an independent child seed for work item `index`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    stream(seed, index).next_u64()
}

/// Uniform draw on the open interval (0, 1).
pub(crate) fn open_unit(rng: &mut impl Rng) -> f64 {
    // 53 random bits shifted by half an ulp keep both endpoints excluded.
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}
