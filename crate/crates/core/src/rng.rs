//! Seeded random streams.
//!
//! Every simulation draws from ChaCha8 seeded with `seed_from_u64(seed)`
//! and switched to stream `stream` with `set_stream`. Replicate `k` of a run
//! uses stream `k`, so replicates are independent and the whole run is
//! reproducible bit-for-bit on any platform.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

pub fn stream_rng(seed: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
