//! Deterministic, counter-based random streams.
//!
//! Every random quantity in the crate is derived from an experiment seed, a
//! stream tag and an index. Environment construction addresses one 64-bit
//! draw per edge (or per lattice line) by absolute position in a ChaCha
//! stream, so the values do not depend on iteration order. Walks and field
//! samplers get a sequential stream per (seed, task index).

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Stream tags. Keeping them in one place avoids accidental stream reuse
/// between unrelated consumers of the same experiment seed.
pub mod tag {
    pub const EDGE_VALUES: u64 = 1;
    pub const LINE_VALUES: u64 = 2;
    pub const WALK: u64 = 3;
    pub const FIELD_NOISE: u64 = 4;
    pub const GIBBS_KAPPA: u64 = 5;
    pub const MONTE_CARLO: u64 = 6;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Sequential stream for task `index` under `(seed, tag)`.
pub fn stream(seed: u64, tag: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(splitmix64(tag.wrapping_mul(0x9e37_79b9).wrapping_add(index)));
    rng
}

/// Random-access draw: the `index`-th u64 of the `(seed, tag)` stream.
pub fn draw_u64_at(seed: u64, tag: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(splitmix64(tag));
    // one u64 = two 32-bit words
    rng.set_word_pos((index as u128) * 2);
    rng.next_u64()
}

/// Uniform in [0,1) with 53 random bits.
pub fn u64_to_unit(u: u64) -> f64 {
    (u >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
