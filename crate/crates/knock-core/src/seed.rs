//! Deterministic seed derivation for parallel and restartable randomness.
//!
//! Every stochastic routine in this crate consumes a `u64` master seed and
//! derives one child seed per unit of work (Monte Carlo replicate, EM
//! restart, simulated cycle). Work units therefore produce identical output
//! regardless of evaluation order or thread count.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Derive a child seed from a base seed and a stream index (SplitMix64 mix).
pub fn derive(base: u64, index: u64) -> u64 {
    let mut z = base.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Build the crate's generator for a given seed.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
