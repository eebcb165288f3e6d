//! Counter-keyed random streams.
//!
//! Every random quantity in a simulation is addressed by a tuple
//! `(seed, domain, index, substream)`. The tuple keys a ChaCha8 stream, so a draw does
//! not depend on how many other draws happened before it or on which worker made it.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Domain tags separating independent uses of one experiment seed.
pub mod domain {
    pub const ESTIMATE: u64 = 0x4553_5449;
    pub const TRUE_ERROR: u64 = 0x5452_5545;
    pub const OPTIMIZE_ERROR: u64 = 0x4f50_5449;
    pub const EVALUATE_ERROR: u64 = 0x4556_414c;
    pub const PAYLOAD: u64 = 0x5041_594c;
    pub const NOISE: u64 = 0x4e4f_4953;
}

/// Deterministic stream for one `(seed, domain, index, substream)` key.
#[derive(Debug, Clone)]
pub struct CounterStream {
    rng: ChaCha8Rng,
}

impl CounterStream {
    pub fn new(seed: u64, domain: u64, index: u64, substream: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        key[8..16].copy_from_slice(&domain.to_le_bytes());
        key[16..24].copy_from_slice(&index.to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(substream);
        Self { rng }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Pair of independent standard normals by Box-Muller.
    pub fn normal_pair(&mut self) -> (f64, f64) {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = std::f64::consts::TAU * u2;
        (radius * angle.cos(), radius * angle.sin())
    }

    /// Circularly-symmetric complex Gaussian with variance `var` (real and imaginary
    /// parts each `var / 2`).
    pub fn complex_normal(&mut self, var: f64) -> (f64, f64) {
        let (a, b) = self.normal_pair();
        let s = (var / 2.0).sqrt();
        (a * s, b * s)
    }

    pub fn bit(&mut self) -> u8 {
        (self.rng.next_u64() >> 63) as u8
    }
}
