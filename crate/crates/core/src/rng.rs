//! Per-trial random streams.
//!
//! A trial's stream is a pure function of `(master_seed, grid_index,
//! trial_index)`: the master seed fixes the ChaCha key and the pair of
//! indices selects one of its 2^64 independent streams. No generator is ever
//! shared between trials, so results do not depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type TrialRng = ChaCha8Rng;

/// Upper bound (exclusive) on grid and trial indices.
pub const INDEX_LIMIT: u64 = 1 << 32;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn key_from_seed(master_seed: u64) -> [u8; 32] {
    let mut state = master_seed;
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    key
}

pub fn trial_rng(master_seed: u64, grid_index: u64, trial_index: u64) -> TrialRng {
    assert!(grid_index < INDEX_LIMIT && trial_index < INDEX_LIMIT, "stream index out of range");
    let mut rng = ChaCha8Rng::from_seed(key_from_seed(master_seed));
    rng.set_stream((grid_index << 32) | trial_index);
    rng
}
