//! Seeded pseudo-random streams used by every generator in the crate.
//!
//! The bit source is SplitMix64 (golden-gamma increment `0x9E3779B97F4A7C15`,
//! mix constants `0xBF58476D1CE4E5B9` and `0x94D049BB133111EB`). Derived
//! variates are defined here so instances can be regenerated in other
//! languages:
//!
//! - uniform in `[0, 1)`: `(next_u64() >> 11) * 2^-53`
//! - standard normal: Box-Muller cosine branch,
//!   `sqrt(-2 ln(1 - u1)) * cos(2 pi u2)`, consuming two uniforms per draw

use rand_core::RngCore;
use rand_xoshiro::SplitMix64;

#[derive(Clone, Debug)]
pub struct SeededRng {
    inner: SplitMix64,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        use rand_core::SeedableRng;
        Self {
            inner: SplitMix64::seed_from_u64(seed),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn standard_normal(&mut self) -> f64 {
        let u1 = self.uniform();
        let u2 = self.uniform();
        (-2.0 * (1.0 - u1).ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    /// Uniform index in `0..bound`, computed as `floor(uniform() * bound)`.
    pub fn index(&mut self, bound: usize) -> usize {
        debug_assert!(bound > 0);
        ((self.uniform() * bound as f64) as usize).min(bound - 1)
    }

    /// `k` distinct indices from `0..n` via partial Fisher-Yates, in draw order.
    pub fn sample_indices(&mut self, n: usize, k: usize) -> Vec<usize> {
        let k = k.min(n);
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = i + self.index(n - i);
            pool.swap(i, j);
        }
        pool.truncate(k);
        pool
    }
}
