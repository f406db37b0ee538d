//! Deterministic randomness.
//!
//! Two sources are used and both are fully determined by explicit seeds:
//!
//! - [`DetRng`], a ChaCha8 stream (from `rand_chacha` 0.3, seeded through
//!   `SeedableRng::seed_from_u64`) for sequential draws such as action sampling
//!   and trace generation.
//! - [`counter_uniform`], a SplitMix64-style counter hash used where a value
//!   must be addressable by `(seed, round, arm)` regardless of call order.
//!
//! Floats are produced from the top 53 bits of a `u64`, so the mapping does not
//! depend on any distribution code in `rand`.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Identifier written into reports so runs can be reproduced.
pub const RNG_ALGORITHM: &str =
    "chacha8 (rand_chacha 0.3, seed_from_u64, stream-selected); splitmix64 counter hash; f64 = (u64 >> 11) * 2^-53";

const F64_SCALE: f64 = 1.0 / (1u64 << 53) as f64;

/// Seeded ChaCha8 generator.
#[derive(Debug, Clone)]
pub struct DetRng(ChaCha8Rng);

impl DetRng {
    /// Generator for `seed` on stream 0.
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    /// Generator for `seed` on an independent stream.
    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        DetRng(inner)
    }

    /// Next raw 64-bit value.
    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform draw in `[0, 1)`.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * F64_SCALE
    }

    /// Uniform integer in `[0, n)`. `n` must be non-zero.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "below(0)");
        // Lemire's multiply-shift with rejection of the biased zone.
        let threshold = n.wrapping_neg() % n;
        loop {
            let m = (self.next_u64() as u128) * (n as u128);
            if (m as u64) >= threshold {
                return (m >> 64) as u64;
            }
        }
    }
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hash of `(seed, a, b)` into a well-mixed `u64`.
#[inline]
pub fn counter_hash(seed: u64, a: u64, b: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ a) ^ b)
}

/// Uniform `[0, 1)` value addressed by `(seed, a, b)`.
#[inline]
pub fn counter_uniform(seed: u64, a: u64, b: u64) -> f64 {
    (counter_hash(seed, a, b) >> 11) as f64 * F64_SCALE
}
