//! Seed derivation for reproducible, schedule-independent runs.
//!
//! Every random quantity in the crate is drawn from a [`ChaCha12Rng`] whose
//! key is derived from a single 64-bit master seed plus a list of integer
//! tags (stage id, grid index, replica index, ...). The derivation is a
//! splitmix64 chain, so any (master, tags) pair maps to one fixed stream no
//! matter which thread or in which order it is consumed.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// splitmix64 step (public-domain mixing function).
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive the stream for `tags` under `master`.
///
/// The key schedule is: fold each tag into the state with one splitmix64
/// step, then squeeze 32 bytes by iterating the mixer.
pub fn stream_rng(master: u64, tags: &[u64]) -> ChaCha12Rng {
    let mut state = master;
    let _ = splitmix64(&mut state);
    for &t in tags {
        state ^= t.wrapping_mul(0xD134_2543_DE82_EF95);
        let _ = splitmix64(&mut state);
    }
    let mut key = [0u8; 32];
    for chunk in key.chunks_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha12Rng::from_seed(key)
}

/// Stage tags used by the estimator pipelines (documented so that reports
/// can name their seed lineage).
pub mod stage {
    pub const GENERATE: u64 = 1;
    pub const LLN: u64 = 2;
    pub const DIRECTIONAL: u64 = 3;
    pub const TAIL: u64 = 4;
    pub const MAXIMAL: u64 = 5;
    pub const MOMENT: u64 = 6;
    pub const DIVERGENCE: u64 = 7;
    pub const SANDWICH: u64 = 8;
    pub const DPP: u64 = 9;
    pub const FEW_TSP: u64 = 10;
}
