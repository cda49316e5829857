//! Seeded randomness.
//!
//! Every random draw in the crate goes through [`CascadeRng`], which is
//! `ChaCha8Rng` seeded with `SeedableRng::seed_from_u64`. Both the stream
//! cipher and the seed expansion are value-stable across platforms, so a
//! `(seed, call sequence)` pair always reproduces the same numbers.
//!
//! Sub-streams (one per realization, trial or instance) are derived with
//! [`derive_seed`], a SplitMix64-based mixer, so that results never depend on
//! how work is split between threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used for every stochastic operation.
pub type CascadeRng = ChaCha8Rng;

/// Name recorded in output metadata.
pub const RNG_NAME: &str = "ChaCha8Rng/seed_from_u64";

pub fn rng_from_seed(seed: u64) -> CascadeRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// One round of the SplitMix64 output function.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Derive the seed of a sub-stream identified by `path` from `master`.
///
/// Each component is folded in as `state = splitmix64(state ^ component)`,
/// starting from `splitmix64(master)`. The order of components matters.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix64(master), |state, &c| splitmix64(state ^ c))
}
