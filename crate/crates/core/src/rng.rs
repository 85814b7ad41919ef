//! Seeded random stream shared by every phase of a run.
//!
//! Backed by ChaCha8 (`rand_chacha`), which has a published reference
//! implementation and produces the same word sequence on every platform.
//! All derived draws (floats, bounded integers, headings) are computed here
//! from raw `u64` words so that no upstream sampling code can change them.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RngStream {
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn from_seed(seed: u64) -> Self {
        Self {
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `[0, bound)` by multiply-shift. `bound` must be > 0.
    #[inline]
    pub fn below(&mut self, bound: usize) -> usize {
        debug_assert!(bound > 0);
        ((u128::from(self.next_u64()) * bound as u128) >> 64) as usize
    }

    /// Heading in degrees, uniform in `[0, 360)`.
    #[inline]
    pub fn heading(&mut self) -> f64 {
        self.uniform() * 360.0
    }

    /// One Bernoulli draw. Always consumes exactly one word.
    #[inline]
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }
}
