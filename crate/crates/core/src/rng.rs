//! The seeded generator behind random initial conditions.
//!
//! The algorithm is fixed so that a seed reproduces the same rows on every
//! platform and release:
//!
//! 1. `ChaCha8Rng::seed_from_u64(seed)` from `rand_chacha`.
//! 2. For each cell, left to right and row after row, draw one `u64`,
//!    keep its top 53 bits as `u`, and emit state `1` iff `u * 2^-53 < density`.
//!
//! Density `0.0` therefore never emits a `1` and density `1.0` always does.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const UNIT: f64 = 1.0 / (1u64 << 53) as f64;

pub struct BernoulliRows {
    rng: ChaCha8Rng,
    density: f64,
}

impl BernoulliRows {
    pub fn new(seed: u64, density: f64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed), density }
    }

    pub fn next_cell(&mut self) -> u8 {
        let u = (self.rng.next_u64() >> 11) as f64 * UNIT;
        u8::from(u < self.density)
    }

    pub fn next_row(&mut self, width: usize) -> Vec<u8> {
        (0..width).map(|_| self.next_cell()).collect()
    }
}
