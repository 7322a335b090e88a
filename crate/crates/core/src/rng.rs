//! Seeded random streams.
//!
//! Every randomized operation draws from ChaCha8 keyed by the caller's seed
//! and a fixed per-operation stream id, so two operations sharing a seed never
//! share a sequence and results are identical across platforms.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    SurfaceSampling = 1,
    RandomGuess = 2,
    Densify = 3,
}

pub fn stream(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}
