//! Reproducible random streams.
//!
//! Each `(seed, stream_id)` pair is an independent ChaCha8 keystream: the
//! seed expands to the key, the stream id selects the ChaCha stream. Normal
//! deviates use Box-Muller on two 53-bit uniforms, so every deviate pair
//! consumes exactly two words and replay is exact. `libm` supplies the
//! transcendental functions for platform-independent bits.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

#[derive(Debug, Clone)]
pub struct RandomStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl RandomStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            rng,
            spare: None,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Uniform on `(0, 1]`.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) + 1) as f64 * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Standard normal deviate.
    #[inline]
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = self.uniform();
        let u2 = self.uniform();
        let r = libm::sqrt(-2.0 * libm::log(u1));
        let (s, c) = libm::sincos(2.0 * std::f64::consts::PI * u2);
        self.spare = Some(r * s);
        r * c
    }
}

/// Draws one standard normal deviate from `stream`.
pub fn normal_deviate(stream: &mut RandomStream) -> f64 {
    stream.normal()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn moments_of_first_million() {
        let mut s = RandomStream::new(1, 0);
        let n = 1_000_000;
        let (mut sum, mut sum2) = (0.0, 0.0);
        for _ in 0..n {
            let z = normal_deviate(&mut s);
            sum += z;
            sum2 += z * z;
        }
        let mean = sum / n as f64;
        let var = sum2 / n as f64 - mean * mean;
        assert!(mean.abs() < 4e-3, "{mean}");
        assert!((var - 1.0).abs() < 0.01, "{var}");
    }

    #[test]
    fn replay_is_identical() {
        let mut a = RandomStream::new(42, 7);
        let mut b = RandomStream::new(42, 7);
        for _ in 0..100 {
            assert_eq!(a.normal().to_bits(), b.normal().to_bits());
        }
    }

    #[test]
    fn streams_are_uncorrelated() {
        let n = 200_000;
        let mut a = RandomStream::new(9, 0);
        let mut b = RandomStream::new(9, 1);
        let c: f64 = (0..n).map(|_| a.normal() * b.normal()).sum::<f64>() / n as f64;
        assert!(c.abs() < 5.0 / (n as f64).sqrt());
    }

    #[test]
    fn golden_prefix() {
        // Frozen so that a dependency upgrade changing the keystream is caught.
        let mut s = RandomStream::new(1, 0);
        let first: Vec<u64> = (0..3).map(|_| s.normal().to_bits()).collect();
        assert_eq!(first, [0x3ff2_e41f_8c9c_4e06, 0x3fe4_e3c4_fe94_36af, 0x3fc8_ebd7_3928_99f0]);
    }

    proptest! {
        #[test]
        fn uniform_in_unit_interval(seed in any::<u64>(), id in 0u64..1000) {
            let mut s = RandomStream::new(seed, id);
            for _ in 0..64 {
                let u = s.uniform();
                prop_assert!(u > 0.0 && u <= 1.0);
            }
        }
    }
}
