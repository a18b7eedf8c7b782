//! Seeded random streams.
//!
//! Every randomized routine takes a [`Seed`], a `(seed, stream)` pair mapped
//! onto a ChaCha8 generator with the stream selected through
//! `set_stream`. ChaCha output is specified bit-for-bit, so the same pair
//! yields the same sample on every platform. Integer draws go through `u64`
//! ranges only; `usize` sampling is width dependent.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Seed {
    pub seed: u64,
    pub stream: u64,
}

impl Seed {
    pub const fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    /// Derived stream for `(cell, trial)`. The cell occupies the high 32
    /// bits so adding cells never shifts the streams of existing ones.
    pub const fn for_trial(seed: u64, cell: u32, trial: u32) -> Self {
        Self::new(seed, ((cell as u64) << 32) | trial as u64)
    }

    pub fn rng(self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

/// Derives an independent master seed for a sub-procedure, via one
/// SplitMix64 step over `seed ^ tag`.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = (seed ^ tag).wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform integer in `0..bound` (bound > 0).
pub(crate) fn below<R: Rng + ?Sized>(rng: &mut R, bound: usize) -> usize {
    debug_assert!(bound > 0);
    rng.random_range(0..bound as u64) as usize
}

/// Fisher-Yates over `u64` draws.
pub(crate) fn shuffle<T, R: Rng + ?Sized>(rng: &mut R, xs: &mut [T]) {
    for i in (1..xs.len()).rev() {
        let j = below(rng, i + 1);
        xs.swap(i, j);
    }
}
