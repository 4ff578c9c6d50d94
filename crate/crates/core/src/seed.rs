//! Reproducible per-realization seeds and random phase offsets.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Counter-mode SplitMix64 output for `(master, index)`.
///
/// For a fixed master seed the map is a bijection of the index (odd
/// stride followed by an invertible finalizer), so realizations never
/// share a seed.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    mix64(master.wrapping_add(GOLDEN_GAMMA.wrapping_mul(index.wrapping_add(1))))
}

/// RNG stream owned by one realization.
pub fn realization_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Phase offset `φ ∈ [0, 2π)` drawn from the realization's stream.
pub fn phase_from_seed(seed: u64) -> f64 {
    let phi = realization_rng(seed).random::<f64>() * TAU;
    // Guard the rounding edge case 0.999..9 * 2π == 2π.
    if phi >= TAU {
        0.0
    } else {
        phi
    }
}
