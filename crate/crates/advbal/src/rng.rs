//! Deterministic, portable pseudo-random stream.
//!
//! All randomness in this crate (benchmark generation, fold shuffling,
//! network initialization, bootstrap resampling) flows through [`RngStream`],
//! which wraps the SplitMix64 generator of Steele, Lea & Flood (2014).
//! SplitMix64 advances a 64-bit counter by a fixed odd constant and scrambles
//! it with two xor-multiply rounds, so the sequence for a given seed is
//! identical on every platform. Standard-normal deviates are produced with
//! the Box-Muller transform on consecutive uniforms rather than a
//! library-specific method, keeping generated benchmark data bit-reproducible
//! across implementations.

use std::f64::consts::PI;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Derive an independent stream seed from a base seed and a stream index.
///
/// One scramble round keeps nearby `(base, stream)` pairs from producing
/// correlated streams.
pub fn mix_seed(base: u64, stream: u64) -> u64 {
    scramble(
        base.wrapping_add(GOLDEN_GAMMA.wrapping_mul(stream.wrapping_add(1))),
    )
}

fn scramble(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A seeded SplitMix64 stream with Box-Muller normal deviates.
#[derive(Debug, Clone)]
pub struct RngStream {
    state: u64,
    spare_normal: Option<f64>,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        RngStream {
            state: seed,
            spare_normal: None,
        }
    }

    /// Next raw 64-bit word.
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        scramble(self.state)
    }

    /// Uniform deviate in `[0, 1)` with 53-bit resolution.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform deviate in `(0, 1]`; safe as a logarithm argument.
    fn uniform_open(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform deviate in `[lo, hi)`.
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Standard-normal deviate via Box-Muller on two consecutive uniforms.
    /// The paired deviate is cached and returned by the following call.
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        let u1 = self.uniform_open();
        let u2 = self.uniform();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = 2.0 * PI * u2;
        self.spare_normal = Some(radius * angle.sin());
        radius * angle.cos()
    }

    /// Bernoulli draw with success probability `p`.
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    /// Uniform index in `0..n`. Panics if `n == 0`.
    pub fn index(&mut self, n: usize) -> usize {
        assert!(n > 0, "index() requires n > 0");
        let i = (self.uniform() * n as f64) as usize;
        i.min(n - 1)
    }

    /// In-place Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, xs: &mut [T]) {
        for i in (1..xs.len()).rev() {
            let j = self.index(i + 1);
            xs.swap(i, j);
        }
    }
}
