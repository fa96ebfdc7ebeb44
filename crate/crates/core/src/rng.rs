//! Counter-based random streams keyed by `(seed, stream, replica)`.
//!
//! Replica `r` of any experiment always draws from the same ChaCha8 stream, so results are
//! independent of evaluation order and worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream tags separating the consumers of a base seed.
pub mod streams {
    pub const SCALED_HAWKES: u64 = 1;
    pub const MEAN_FIELD: u64 = 2;
    pub const GAUSSIAN_LIMIT: u64 = 3;
    pub const IMPORTANCE: u64 = 4;
    pub const MULTISTART: u64 = 5;
    pub const GRADIENT_PROBES: u64 = 6;
}

pub fn stream_rng(seed: u64, stream: u64, replica: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&stream.to_le_bytes());
    key[16..24].copy_from_slice(b"hawkesZe");
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(replica);
    rng
}
