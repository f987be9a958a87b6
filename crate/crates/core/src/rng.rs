//! Counter-based random substreams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent stream `stream` of the master `seed`.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Work is split into fixed-size chunks so reductions do not depend on the
/// number of threads.
pub(crate) const CHUNK: usize = 1024;

pub(crate) fn chunk_ranges(n: usize, chunk: usize) -> Vec<(u64, std::ops::Range<usize>)> {
    (0..n.div_ceil(chunk))
        .map(|c| (c as u64, c * chunk..((c + 1) * chunk).min(n)))
        .collect()
}
