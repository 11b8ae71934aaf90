//! Seeded random streams.
//!
//! All randomness flows through ChaCha8 generators. A run seed plus a stream
//! id selects an independent sub-stream, so work split across threads (one
//! stream per tree, per classifier, ...) stays reproducible.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Stream ids used by the pipeline. Tree-level streams are offset from
/// [`FOREST_TREE_BASE`].
pub mod streams {
    pub const SPLIT: u64 = 1;
    pub const FOLDS: u64 = 2;
    pub const TRAIN_ORDER: u64 = 3;
    pub const INIT: u64 = 4;
    pub const FOREST_TREE_BASE: u64 = 1 << 32;
}

pub fn stream(seed: u64, stream_id: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    rng
}
