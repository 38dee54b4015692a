//! The single random stream that drives a run.
//!
//! Every random quantity is derived from uniforms drawn from one seeded
//! ChaCha8 generator, consumed time-major and then in ascending particle order.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct NoiseStream {
    rng: ChaCha8Rng,
}

impl NoiseStream {
    pub fn from_seed(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Uniform on `[0, 1)`.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Uniform on the open interval `(0, 1)`, safe for inverse-CDF sampling.
    #[inline]
    pub fn open_uniform(&mut self) -> f64 {
        const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * SCALE
    }

    /// Two-point variable: `+1` iff a fresh uniform is below one half.
    #[inline]
    pub fn sign(&mut self) -> f64 {
        if self.uniform() < 0.5 {
            1.0
        } else {
            -1.0
        }
    }
}

/// The pair of draws a particle may consume in one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseDraw {
    pub branch_uniform: f64,
    pub sign: f64,
}

impl NoiseDraw {
    pub fn draw(stream: &mut NoiseStream) -> Self {
        let branch_uniform = stream.uniform();
        let sign = stream.sign();
        Self {
            branch_uniform,
            sign,
        }
    }
}
