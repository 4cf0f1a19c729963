//! Seeding helpers shared by every stochastic component.
//!
//! All randomness flows through ChaCha8 generators created with
//! [`rng_from_seed`], so a scenario is a pure function of its 64-bit seeds.
//! Independent seeds (demand, vehicle placement, network synthesis) are
//! derived from one master seed with [`derive_seed`], which chains the
//! SplitMix64 finalizer over the master and a list of stream labels.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer step (Steele, Lea, Flood mixing constants).
pub fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive an independent stream seed from `master` and a label sequence.
///
/// `derive_seed(m, &[a, b])` folds each label into the running state with
/// xor + SplitMix64, so distinct label sequences give unrelated seeds and
/// the same sequence always gives the same one.
pub fn derive_seed(master: u64, labels: &[u64]) -> u64 {
    let mut state = splitmix64(master);
    for &label in labels {
        state = splitmix64(state ^ label);
    }
    state
}

/// The one PRNG used everywhere: ChaCha8 keyed from a 64-bit seed.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
