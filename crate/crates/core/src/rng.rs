//! Counter-based random streams.
//!
//! Every stream is a ChaCha8 keystream addressed by `(seed, stream_id)`; any
//! position in it can be reached in O(1) with `set_word_pos`. Experiments give
//! each trial its own stream, so results do not depend on how trials are
//! scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// ChaCha8 key derived from a 64-bit seed.
pub fn key_from_seed(seed: u64) -> [u8; 32] {
    let mut state = seed;
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    key
}

/// The keystream for `(seed, stream_id)`, positioned at its start.
pub fn stream_rng(seed: u64, stream_id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::from_seed(key_from_seed(seed));
    rng.set_stream(stream_id);
    rng
}
