//! Derivation of independent sub-seeds from one experiment seed.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Stable sub-seed for `(seed, stream)`; distinct streams give unrelated seeds.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    stream_rng(seed, stream).next_u64()
}

/// A generator on its own ChaCha stream.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
