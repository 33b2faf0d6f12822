//! Counter-based, splittable random streams.
//!
//! A [`StreamSeed`] names a position in a tree of independent streams. Each
//! node is turned into a ChaCha8 key, so draws within a stream are a pure
//! function of (key, block counter) and sibling streams never interact. Parallel
//! trials derive their stream from `(master, trial, box)` and therefore produce
//! the same numbers regardless of scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finaliser.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StreamSeed(u64);

impl StreamSeed {
    pub fn new(seed: u64) -> Self {
        Self(seed)
    }

    pub fn value(self) -> u64 {
        self.0
    }

    /// Child stream labelled by `tag`. Distinct tags give unrelated streams.
    pub fn split(self, tag: u64) -> Self {
        Self(mix64(self.0.wrapping_add(GOLDEN) ^ mix64(tag.wrapping_mul(GOLDEN).wrapping_add(1))))
    }

    /// Child stream for a path of tags, e.g. `[trial, box]`.
    pub fn split_path(self, tags: &[u64]) -> Self {
        tags.iter().fold(self, |s, &t| s.split(t))
    }

    pub fn rng(self) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        let mut state = self.0;
        for chunk in key.chunks_exact_mut(8) {
            state = state.wrapping_add(GOLDEN);
            chunk.copy_from_slice(&mix64(state).to_le_bytes());
        }
        ChaCha8Rng::from_seed(key)
    }
}
