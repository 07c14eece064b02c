//! Deterministic random sub-streams.
//!
//! Every stream is a ChaCha8 generator keyed by the master seed, with the
//! 64-bit stream id laid out as `tag << 56 | a << 32 | b`. Work items pick
//! their own `(tag, a, b)` from their position (length index, sequence
//! index, ...), so results never depend on scheduling or worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Per-sequence stream: Clifford draws, then i.i.d. detuning, then shots.
pub const TAG_SEQUENCE: u64 = 1;
/// Per-length stream for correlated (random-walk) detuning.
pub const TAG_DETUNING_WALK: u64 = 2;
/// Per-length stream for randomised up/down assignment.
pub const TAG_DIRECTIONS: u64 = 3;
/// Ramsey ensemble draws.
pub const TAG_RAMSEY: u64 = 4;
/// Shot-noise-free trace averaging.
pub const TAG_TRACE: u64 = 5;
/// Free for callers outside the simulator (tests, synthetic data).
pub const TAG_USER: u64 = 0x7f;

pub fn substream(master_seed: u64, tag: u64, a: u64, b: u64) -> StreamRng {
    debug_assert!(tag < 0x100 && a < (1 << 24) && b < (1 << 32));
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream((tag << 56) | (a << 32) | b);
    rng
}
