//! Counter-based per-path random number streams.
//!
//! Path `i` draws from the stream `(seed, i)`, so the set of random numbers a
//! path consumes is a pure function of the seed and the path index. Parallel
//! scheduling, thread counts, and batch shapes cannot change results, and any
//! single path can be replayed in isolation.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// RNG for one work unit: ChaCha8 keyed by `seed`, stream selected by `index`.
pub fn path_stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
