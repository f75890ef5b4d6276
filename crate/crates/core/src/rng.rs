//! Reproducible random streams.
//!
//! Every stream is a xoshiro256++ generator whose 256-bit state is expanded
//! from a 64-bit seed with SplitMix64. Replicate `r` of an experiment seeded
//! with `base` uses [`replicate_seed`]`(base, r)`:
//!
//! ```text
//! z    = base + (r + 1) * 0x9E37_79B9_7F4A_7C15   (wrapping)
//! seed = mix64(z)                                  (SplitMix64 finalizer)
//! ```
//!
//! `mix64` is a bijection on `u64`, so for a fixed base distinct replicate
//! indices always give distinct seeds.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output finalizer.
pub const fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of replicate `r` derived from `base`.
pub const fn replicate_seed(base: u64, r: u64) -> u64 {
    mix64(base.wrapping_add(r.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    inner: Xoshiro256PlusPlus,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: Xoshiro256PlusPlus::seed_from_u64(seed),
        }
    }

    /// Child stream for replicate `r` of an experiment seeded with `base`.
    pub fn for_replicate(base: u64, r: u64) -> Self {
        Self::new(replicate_seed(base, r))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on the open interval `(0, 1)`; never returns 0 or 1.
    #[inline]
    pub fn uniform_open(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `[0, upper)`.
    #[inline]
    pub fn uniform_to(&mut self, upper: f64) -> f64 {
        self.uniform() * upper
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_sequence() {
        let mut a = RngStream::new(7);
        let mut b = RngStream::new(7);
        for _ in 0..1000 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn replicate_streams_are_distinct() {
        let seeds: std::collections::HashSet<u64> =
            (0..10_000).map(|r| replicate_seed(42, r)).collect();
        assert_eq!(seeds.len(), 10_000);
        let mut a = RngStream::for_replicate(42, 0);
        let mut b = RngStream::for_replicate(42, 1);
        assert_ne!(a.next_u64(), b.next_u64());
    }

    #[test]
    fn open_uniform_stays_inside() {
        let mut rng = RngStream::new(1);
        for _ in 0..100_000 {
            let u = rng.uniform_open();
            assert!(u > 0.0 && u < 1.0);
        }
    }
}
