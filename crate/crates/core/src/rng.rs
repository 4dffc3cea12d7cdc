//! Deterministic seeding.
//!
//! Every random draw in a run comes from ChaCha8 keyed by a 64-bit seed.
//! A Monte Carlo run with master seed `s` gives trial `i` the seed
//! `splitmix64(s ^ splitmix64(i))`. Inside a trial, independent purposes use
//! distinct ChaCha streams of the same key:
//!
//! | stream | purpose                                   |
//! |--------|-------------------------------------------|
//! | 0      | channel states, two uniforms per slot     |
//! | 1      | packet payload bytes                      |
//! | 2      | repair-row coefficients (re-keyed per row) |
//!
//! Phase 3 codes generation `g` under the block seed
//! `b = splitmix64(trial_seed ^ splitmix64(g))`. Repair row `i` of that
//! generation takes its coefficients from ChaCha8 keyed by
//! `splitmix64(b ^ splitmix64(i))` on stream 2, so either end of the link can
//! regenerate them from the generation and row index alone.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const CHANNEL_STREAM: u64 = 0;
pub const PAYLOAD_STREAM: u64 = 1;
pub const COEFFICIENT_STREAM: u64 = 2;

/// SplitMix64 finalizer.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn trial_seed(master: u64, trial: u64) -> u64 {
    splitmix64(master ^ splitmix64(trial))
}

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
