//! Counter-based random substreams.
//!
//! Every random draw in the crate comes from a ChaCha8 generator seeded by the
//! user seed and positioned on a stream selected by an integer id. Work split
//! into fixed-size chunks therefore produces the same numbers regardless of
//! how many threads process the chunks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Number of samples drawn from one substream before moving to the next.
pub const CHUNK: usize = 4096;

/// Generator for substream `stream` of `seed`.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream ids are partitioned into disjoint ranges per purpose so that
/// different estimators driven by one seed never share draws.
pub mod streams {
    pub const ENSEMBLE: u64 = 0;
    pub const ENSEMBLE_ALT: u64 = 1 << 40;
    pub const CRN_BLOCK: u64 = 2 << 40;
    pub const FIELDS: u64 = 3 << 40;
    pub const BOOTSTRAP: u64 = 4 << 40;
    pub const PROBE: u64 = 5 << 40;
}
