//! Reproducible random streams.
//!
//! A stream is identified by `(master_seed, stream_index)`. The master seed
//! keys a ChaCha8 generator and the index selects its 64-bit stream word, so
//! every index yields an independent, non-overlapping sequence and any single
//! run of a batch can be replayed on its own.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub master_seed: u64,
    pub stream_index: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        Self {
            master_seed,
            stream_index,
        }
    }

    /// Same master seed, different stream.
    pub fn with_index(self, stream_index: u64) -> Self {
        Self {
            stream_index,
            ..self
        }
    }

    /// Fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_index);
        rng
    }
}
