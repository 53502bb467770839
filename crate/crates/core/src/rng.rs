//! Counter-based deterministic randomness.
//!
//! Every stochastic draw in the simulator is keyed by a master seed plus a
//! tuple of structural indices (region, scatterer tag, tap, path, ...).
//! Results are therefore independent of evaluation order, which keeps
//! parallel table builds and simulation runs bitwise reproducible.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// SplitMix64 finalizer.
fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a child seed from a master seed and a structural key.
pub fn derive_seed(master: u64, key: &[u64]) -> u64 {
    let mut state = splitmix(master ^ 0x5153_4c53_494d_0001);
    for &k in key {
        state = splitmix(state ^ splitmix(k));
    }
    state
}

/// A ChaCha stream keyed by (master seed, structural key).
pub fn keyed_rng(master: u64, key: &[u64]) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(derive_seed(master, key))
}
