//! Deterministic pseudorandom source.
//!
//! A thin wrapper over PCG64 (`Lcg128Xsl64`: 128-bit LCG state, XSL-RR output)
//! seeded from a `u64`. Every stochastic routine in the crate draws from a
//! [`RandomSource`], so a seed fixes the output of the whole pipeline bit for
//! bit on every platform. Sub-streams use PCG's stream (increment) parameter,
//! so children do not depend on how far the parent has advanced.

use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_pcg::Pcg64;
use rand_distr::StandardNormal;

/// Derive an independent seed for sub-stream `stream` of `seed`.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    Pcg64::new(u128::from(seed), u128::from(stream)).next_u64()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandomSource {
    seed: u64,
    rng: Pcg64,
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rng: Pcg64::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// A fresh generator for sub-stream `stream`, independent of how far
    /// this generator has advanced.
    pub fn child(&self, stream: u64) -> RandomSource {
        RandomSource::new(derive_seed(self.seed, stream))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform draw in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random()
    }

    /// Uniform integer in `0..n`. Panics if `n == 0`.
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0, "below(0)");
        self.rng.random_range(0..n)
    }

    /// Standard normal draw.
    pub fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Index drawn from a cumulative distribution (last entry is the total).
    pub fn choose_cumulative(&mut self, cumulative: &[f64]) -> usize {
        let total = *cumulative.last().expect("empty distribution");
        let target = self.uniform() * total;
        let idx = cumulative.partition_point(|&c| c <= target);
        idx.min(cumulative.len() - 1)
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        items.shuffle(&mut self.rng);
    }
}

/// Seeded generator; see the module docs for the algorithm.
pub fn seeded_rng(seed: u64) -> RandomSource {
    RandomSource::new(seed)
}
