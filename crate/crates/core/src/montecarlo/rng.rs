//! SplitMix64 stream generator and the seed mixer used to derive
//! per-replication streams.
//!
//! Both are fixed so that traces are bit-identical across platforms:
//!
//! ```text
//! fmix(z)   = z ^= z >> 30; z *= 0xBF58476D1CE4E5B9;
//!             z ^= z >> 27; z *= 0x94D049BB133111EB;
//!             z ^ (z >> 31)                      (wrapping u64 arithmetic)
//! next()    = state += 0x9E3779B97F4A7C15; fmix(state)
//! mix64(s, r) = fmix(s ^ fmix(r ^ 0x9E3779B97F4A7C15))
//! uniform() = ((next() >> 11) + 1) · 2⁻⁵³        in (0, 1]
//! exp(rate) = −ln(uniform()) / rate
//! ```

pub const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

pub fn fmix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of replication `r` under master seed `seed`.
pub fn mix64(seed: u64, r: u64) -> u64 {
    fmix(seed ^ fmix(r ^ GOLDEN_GAMMA))
}

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        fmix(self.state)
    }

    /// Uniform on (0, 1].
    pub fn uniform(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn exponential(&mut self, rate: f64) -> f64 {
        -self.uniform().ln() / rate
    }
}
