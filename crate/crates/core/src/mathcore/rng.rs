//! Seedable random streams.
//!
//! The generator is ChaCha with 8 rounds (`rand_chacha::ChaCha8Rng`), a
//! counter-based stream whose output for a given seed is fixed across
//! platforms and crate versions.  Seeding from a `u64` goes through the
//! PCG32-based expansion of `rand_core::SeedableRng::seed_from_u64`.

use rand::SeedableRng;
pub use rand_chacha::ChaCha8Rng as SeededRng;

/// Deterministic stream for `seed`.
pub fn rng(seed: u64) -> SeededRng {
    SeededRng::seed_from_u64(seed)
}

/// Seed for the `index`-th independent sub-stream of `seed` (SplitMix64
/// finaliser), so parallel workers never share a stream.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed
        .wrapping_add(0x9E37_79B9_7F4A_7C15_u64.wrapping_mul(index.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
