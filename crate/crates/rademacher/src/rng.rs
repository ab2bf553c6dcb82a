//! Counter-based pseudo-random numbers.
//!
//! Monte Carlo sampling and the multi-start ascent both need streams that are
//! keyed by `(seed, stream index)` so that results do not depend on how work
//! is chunked across threads. SplitMix64 gives exactly that: a stateless mix
//! of a 64-bit counter, cheap enough to reseed once per sample.

/// SplitMix64 finalizer (Steele, Lea & Flood's `SplittableRandom` mixer).
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A tiny deterministic generator with SplitMix64 state transitions.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    /// Stream `stream` of the generator keyed by `seed`. Distinct streams are
    /// decorrelated by mixing the stream index through the finalizer before
    /// combining it with the seed.
    pub fn keyed(seed: u64, stream: u64) -> Self {
        let mut g = SplitMix64::new(seed ^ mix64(stream.wrapping_add(0x1234_5678_9ABC_DEF0)));
        g.next_u64();
        g
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[-1, 1)`.
    #[inline]
    pub fn next_unit(&mut self) -> f64 {
        2.0 * self.next_f64() - 1.0
    }

    /// Uniform integer in `[0, n)`.
    #[inline]
    pub fn next_below(&mut self, n: u64) -> u64 {
        // Multiply-shift; bias is < 2^-53 of n, irrelevant at our scales.
        ((self.next_u64() >> 11) as u128 * n as u128 >> 53) as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = {
            let mut g = SplitMix64::keyed(7, 3);
            (0..8).map(|_| g.next_u64()).collect()
        };
        let b: Vec<u64> = {
            let mut g = SplitMix64::keyed(7, 3);
            (0..8).map(|_| g.next_u64()).collect()
        };
        let c: Vec<u64> = {
            let mut g = SplitMix64::keyed(7, 4);
            (0..8).map(|_| g.next_u64()).collect()
        };
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn unit_draws_are_in_range_and_roughly_centered() {
        let mut g = SplitMix64::keyed(0, 0);
        let n = 100_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let x = g.next_unit();
            assert!((-1.0..1.0).contains(&x));
            sum += x;
        }
        assert!((sum / n as f64).abs() < 0.02);
    }
}
