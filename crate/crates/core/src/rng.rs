//! Counter-based Gaussian noise.
//!
//! Every channel owns a ChaCha8 stream (`stream id = channel`), and draw `n` of a
//! channel always comes from word position `4·n`: one normal consumes exactly two
//! `u64` through the Box–Muller transform. A draw therefore depends only on
//! `(seed, channel, index)`, which makes noise random-access: a cycle can be
//! regenerated on its own and parallel workers reproduce serial output bit for bit.

use core::f64::consts::TAU;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::math::{cos, ln, sqrt};

/// Stream identifiers. Stable: changing one changes every synthetic dataset.
pub mod channel {
    pub const ACCEL_Z: u64 = 1;
    pub const ACCEL_X: u64 = 2;
    pub const ACCEL_Y: u64 = 3;
    pub const OMEGA_X: u64 = 4;
    pub const OMEGA_Y: u64 = 5;
    pub const OMEGA_Z: u64 = 6;
    pub const CA_NOISE: u64 = 7;
    pub const DETECTION: u64 = 8;
    pub const MODULATION: u64 = 10;
    /// Harmonic tables use `HARMONIC_BASE + 8·channel + band`.
    pub const HARMONIC_BASE: u64 = 16;
    /// Draws held over a cycle use `channel + HELD_OFFSET`.
    pub const HELD_OFFSET: u64 = 1 << 32;
}

const WORDS_PER_DRAW: u128 = 4;

#[derive(Clone)]
pub struct NoiseStream {
    rng: ChaCha8Rng,
}

impl NoiseStream {
    /// Stream for `channel`, positioned at draw `index`.
    pub fn at(seed: u64, channel: u64, index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(channel);
        rng.set_word_pos(WORDS_PER_DRAW * index as u128);
        Self { rng }
    }

    pub fn new(seed: u64, channel: u64) -> Self {
        Self::at(seed, channel, 0)
    }

    /// Uniform in (0, 1]; consumes one `u64`.
    #[inline]
    fn unit_open(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal draw.
    #[inline]
    pub fn normal(&mut self) -> f64 {
        let u1 = self.unit_open();
        let u2 = self.unit_open();
        sqrt(-2.0 * ln(u1)) * cos(TAU * u2)
    }

    /// Uniform draw in [0, 1). Consumes the same amount of stream as [`normal`](Self::normal).
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        let u = self.unit_open();
        let _ = self.rng.next_u64();
        1.0 - u
    }
}

/// Single standard-normal draw `index` of `channel`.
#[inline]
pub fn normal_at(seed: u64, channel: u64, index: u64) -> f64 {
    NoiseStream::at(seed, channel, index).normal()
}
