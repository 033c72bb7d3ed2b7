//! Counter-based random streams.
//!
//! Every trajectory owns a ChaCha8 stream keyed by the master seed and the
//! grid index, with the trajectory index selecting one of the 2^64 streams
//! under that key. Results therefore do not depend on how work is scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream for `(master seed, grid index, trajectory index)`.
pub fn trajectory_stream(seed: u64, grid_index: u64, trajectory_index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    let mut state = mix(seed) ^ mix(grid_index.wrapping_add(0x5851_F42D_4C95_7F2D));
    for chunk in key.chunks_mut(8) {
        state = mix(state);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(trajectory_index);
    rng
}
