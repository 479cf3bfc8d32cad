//! Deterministic per-trial seed derivation.
//!
//! Every Monte Carlo trial owns its RNG, seeded from
//! `(master_seed, stream, trial_index)` through SplitMix64 finalisers:
//!
//! ```text
//! trial_seed = mix(mix(master_seed ^ mix(stream)) ^ trial_index)
//! mix(z)     = SplitMix64 output function applied to z + 0x9E3779B97F4A7C15
//! ```
//!
//! Streams keep calibration and evaluation trials on disjoint seeds.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent seed streams used by the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Stream {
    Calibration = 1,
    EvaluationH0 = 2,
    EvaluationH1 = 3,
    ChannelGains = 4,
    Companion = 5,
    Wideband = 6,
    Eigen = 7,
}

/// SplitMix64 mixing step.
#[inline]
pub fn splitmix64(z: u64) -> u64 {
    let mut z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(master_seed: u64, stream: Stream, trial_index: u64) -> u64 {
    splitmix64(splitmix64(master_seed ^ splitmix64(stream as u64)) ^ trial_index)
}

/// The RNG used throughout the crate.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
