//! Seeded pseudo-random numbers via SplitMix64.
//!
//! All randomized inputs (initial opinions, mean-field samples, perturbation
//! directions) are drawn from this single generator so that a `(config, seed)`
//! pair reproduces output byte-for-byte, and so that the stream can be
//! re-implemented from its published definition in any language. SplitMix64
//! advances a 64-bit counter by the golden-ratio constant and scrambles it
//! with two xor-shift-multiply rounds; doubles are formed from the top 53
//! bits as `(x >> 11) * 2^-53`.

/// SplitMix64 generator (Steele, Lea & Flood; the `SplittableRandom` mixer).
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform double in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform double in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + self.next_f64() * (hi - lo)
    }

    /// Standard normal via Box-Muller (consumes two uniforms per pair).
    pub fn next_gaussian(&mut self) -> f64 {
        // Avoid ln(0) by shifting the first uniform away from zero.
        let u1 = (self.next_u64() >> 11) as f64 + 0.5;
        let u1 = u1 * (1.0 / (1u64 << 53) as f64);
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}
