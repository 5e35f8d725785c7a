//! Counter-based random streams.
//!
//! Every consumer derives its generator from `(seed, stream index)`, so work
//! split across threads draws exactly the numbers a serial loop would.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

pub fn stream(seed: u64, index: u64) -> StreamRng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(index);
    r
}

/// Stream offsets keep independent draws of one experiment from overlapping.
pub(crate) const SAMPLE_STREAMS: u64 = 0;
pub(crate) const PATH_STREAMS: u64 = 1 << 40;
