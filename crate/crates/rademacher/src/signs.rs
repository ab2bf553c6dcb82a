//! Chunked Gray-code enumeration over sign patterns.
//!
//! Pattern `i` is the Gray code `i ^ (i >> 1)`; consecutive patterns differ
//! in exactly one bit (`trailing_zeros(i)`), so a running signed sum needs a
//! single `+- 2 x_k` update per step. The pattern space is cut into fixed
//! chunks of `2^16` and every chunk starts from a fresh from-scratch sum.
//! That both bounds floating-point drift and makes the per-pattern values
//! independent of how chunks are assigned to worker threads.

use rayon::prelude::*;

/// log2 of the fixed chunk length.
pub const CHUNK_BITS: u32 = 16;

/// The Gray code of `i`.
#[inline]
pub fn gray(i: u64) -> u64 {
    i ^ (i >> 1)
}

/// The bit that flips between `gray(i - 1)` and `gray(i)` (`i >= 1`).
#[inline]
pub fn flip_bit(i: u64) -> u32 {
    i.trailing_zeros()
}

/// Fixed `[start, end)` ranges covering `0..2^bits` in chunks of `2^CHUNK_BITS`.
pub fn chunk_ranges(bits: u32) -> Vec<(u64, u64)> {
    let total = 1u64 << bits;
    let chunk = 1u64 << CHUNK_BITS.min(bits);
    (0..total.div_ceil(chunk))
        .map(|c| (c * chunk, ((c + 1) * chunk).min(total)))
        .collect()
}

/// Run `f` over every chunk in parallel; results come back in chunk order
/// regardless of thread count.
pub fn map_chunks<R, F>(bits: u32, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(u64, u64) -> R + Sync,
{
    chunk_ranges(bits)
        .into_par_iter()
        .map(|(s, e)| f(s, e))
        .collect()
}

/// Maximum of an even function `f` over all `+-1` combinations
/// `sum_k u_k v_k` of the given vectors, with `u_0` fixed to `+1`.
///
/// Returns the maximum together with the Gray code of a maximizing pattern
/// (bit `k` set means `u_{k+1} = -1`); ties resolve to the pattern visited
/// first, so the witness is deterministic under any parallel schedule.
pub fn max_over_signed_sums<F>(vectors: &[Vec<f64>], f: F) -> (f64, u64)
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let k = vectors.len();
    assert!(k >= 1, "need at least one vector");
    assert!(k <= 25, "sign enumeration capped at 2^24 patterns");
    let len = vectors[0].len();
    let bits = (k - 1) as u32;

    let chunk_best = map_chunks(bits, |start, end| {
        let mut sum = vec![0.0f64; len];
        // From-scratch sum for the chunk's first pattern.
        let code = gray(start);
        for (idx, v) in vectors.iter().enumerate() {
            let sign = if idx == 0 || code >> (idx - 1) & 1 == 0 {
                1.0
            } else {
                -1.0
            };
            for (s, x) in sum.iter_mut().zip(v) {
                *s += sign * x;
            }
        }
        let mut best = f(&sum);
        let mut best_code = code;
        let mut code = code;
        for i in start + 1..end {
            let bit = flip_bit(i);
            let was_plus = code >> bit & 1 == 0;
            code ^= 1 << bit;
            let v = &vectors[bit as usize + 1];
            if was_plus {
                for (s, x) in sum.iter_mut().zip(v) {
                    *s -= 2.0 * x;
                }
            } else {
                for (s, x) in sum.iter_mut().zip(v) {
                    *s += 2.0 * x;
                }
            }
            let val = f(&sum);
            if val > best {
                best = val;
                best_code = code;
            }
        }
        (best, best_code)
    });

    chunk_best
        .into_iter()
        .reduce(|a, b| if b.0 > a.0 { b } else { a })
        .expect("at least one chunk")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gray_codes_visit_every_pattern_once() {
        let mut seen = vec![false; 64];
        for i in 0..64u64 {
            let g = gray(i) as usize;
            assert!(!seen[g]);
            seen[g] = true;
        }
        assert!(seen.iter().all(|&b| b));
        for i in 1..64u64 {
            assert_eq!(gray(i) ^ gray(i - 1), 1 << flip_bit(i));
        }
    }

    #[test]
    fn chunks_tile_the_pattern_space() {
        for bits in [0u32, 3, 16, 18] {
            let ranges = chunk_ranges(bits);
            assert_eq!(ranges[0].0, 0);
            assert_eq!(ranges.last().unwrap().1, 1u64 << bits);
            for w in ranges.windows(2) {
                assert_eq!(w[0].1, w[1].0);
            }
        }
    }

    #[test]
    fn signed_sum_max_matches_brute_force() {
        let vectors: Vec<Vec<f64>> = vec![
            vec![1.0, -0.5],
            vec![0.25, 2.0],
            vec![-1.5, 0.75],
            vec![0.4, 0.4],
        ];
        let f = |z: &[f64]| z.iter().map(|x| x * x).sum::<f64>().sqrt();
        let (fast, code) = max_over_signed_sums(&vectors, f);

        let mut brute = f64::NEG_INFINITY;
        for mask in 0..(1u64 << (vectors.len() - 1)) {
            let mut sum = vec![0.0; 2];
            for (idx, v) in vectors.iter().enumerate() {
                let sign = if idx == 0 || mask >> (idx - 1) & 1 == 0 {
                    1.0
                } else {
                    -1.0
                };
                sum[0] += sign * v[0];
                sum[1] += sign * v[1];
            }
            brute = brute.max(f(&sum));
        }
        assert!((fast - brute).abs() <= 1e-12);

        // The witness reproduces the value.
        let mut sum = vec![0.0; 2];
        for (idx, v) in vectors.iter().enumerate() {
            let sign = if idx == 0 || code >> (idx - 1) & 1 == 0 {
                1.0
            } else {
                -1.0
            };
            sum[0] += sign * v[0];
            sum[1] += sign * v[1];
        }
        assert!((f(&sum) - fast).abs() <= 1e-12);
    }
}
