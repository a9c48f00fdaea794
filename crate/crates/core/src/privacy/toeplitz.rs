//! Binary Toeplitz hashing over GF(2).
//!
//! A hash with input length `n` and output length `k` is described by
//! `n + k - 1` diagonal bits; matrix entry `(i, j)` is `diagonals[i - j + n - 1]`.
//! The family is 2-universal: for any `x != y`, exactly a `2^-k` fraction of
//! the family maps them to the same output.

use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{QkdError, Result};
use crate::rng::RandomStream;

// Above this many matrix entries the FFT route is used.
const FFT_THRESHOLD: usize = 1 << 24;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToeplitzHash {
    n: usize,
    k: usize,
    diagonals: BitString,
}

impl ToeplitzHash {
    pub fn new(n: usize, k: usize, diagonals: BitString) -> Result<Self> {
        if k < 1 || k > n {
            return Err(QkdError::InvalidHashDimensions { n, k });
        }
        if diagonals.len() != n + k - 1 {
            return Err(QkdError::LengthMismatch {
                expected: n + k - 1,
                actual: diagonals.len(),
            });
        }
        Ok(Self { n, k, diagonals })
    }

    pub fn input_len(&self) -> usize {
        self.n
    }

    pub fn output_len(&self) -> usize {
        self.k
    }

    pub fn diagonals(&self) -> &BitString {
        &self.diagonals
    }

    pub fn entry(&self, i: usize, j: usize) -> bool {
        self.diagonals.get(i + self.n - 1 - j)
    }

    /// Word-packed matrix-vector product, `O(nk / 64)`.
    pub fn apply_direct(&self, x: &BitString) -> BitString {
        let (n, k) = (self.n, self.k);
        // Row i is the window [k-1-i, k-1-i+n) of the reversed diagonals.
        let reversed: BitString = (0..n + k - 1)
            .map(|t| self.diagonals.get(n + k - 2 - t))
            .collect();
        let rev_words = reversed.to_words();
        let x_words = x.to_words();
        let full = n / 64;
        let tail = n % 64;
        (0..k)
            .map(|i| {
                let offset = k - 1 - i;
                let mut acc = 0u64;
                for (w, &xw) in x_words.iter().enumerate().take(full) {
                    acc ^= window(&rev_words, offset + 64 * w) & xw;
                }
                if tail > 0 {
                    let mask = (1u64 << tail) - 1;
                    acc ^= window(&rev_words, offset + 64 * full) & x_words[full] & mask;
                }
                acc.count_ones() & 1 == 1
            })
            .collect()
    }

    /// Same product via a floating-point cyclic convolution. Exact for the
    /// sizes used here since every convolution value is an integer of at
    /// most `n`.
    pub fn apply_fft(&self, x: &BitString) -> BitString {
        let (n, k) = (self.n, self.k);
        // y_i = sum_j d[i + n - 1 - j] x_j = (d * x)[i + n - 1]; a cyclic
        // length of at least n + k - 1 keeps those indices alias free.
        let len = (n + k - 1).next_power_of_two();
        let mut planner = FftPlanner::<f64>::new();
        let forward = planner.plan_fft_forward(len);
        let inverse = planner.plan_fft_inverse(len);
        let load = |bits: &BitString| {
            let mut buf = vec![Complex::new(0.0, 0.0); len];
            for (slot, b) in buf.iter_mut().zip(bits.iter()) {
                slot.re = f64::from(u8::from(b));
            }
            buf
        };
        let mut d = load(&self.diagonals);
        let mut v = load(x);
        forward.process(&mut d);
        forward.process(&mut v);
        for (a, b) in d.iter_mut().zip(&v) {
            *a *= *b;
        }
        inverse.process(&mut d);
        let scale = len as f64;
        (0..k)
            .map(|i| {
                let count = (d[i + n - 1].re / scale).round() as u64;
                count & 1 == 1
            })
            .collect()
    }
}

fn window(words: &[u64], bit_offset: usize) -> u64 {
    let (w, s) = (bit_offset / 64, bit_offset % 64);
    let lo = words.get(w).copied().unwrap_or(0);
    if s == 0 {
        lo
    } else {
        let hi = words.get(w + 1).copied().unwrap_or(0);
        (lo >> s) | (hi << (64 - s))
    }
}

pub fn sample_toeplitz(n: usize, k: usize, rng: &mut RandomStream) -> Result<ToeplitzHash> {
    if k < 1 || k > n {
        return Err(QkdError::InvalidHashDimensions { n, k });
    }
    let diagonals = (0..n + k - 1).map(|_| rng.bit()).collect();
    ToeplitzHash::new(n, k, diagonals)
}

pub fn apply_hash(h: &ToeplitzHash, x: &BitString) -> Result<BitString> {
    if x.len() != h.n {
        return Err(QkdError::LengthMismatch {
            expected: h.n,
            actual: x.len(),
        });
    }
    Ok(if h.n.saturating_mul(h.k) > FFT_THRESHOLD {
        h.apply_fft(x)
    } else {
        h.apply_direct(x)
    })
}

fn bits_of(value: u64, len: usize) -> BitString {
    (0..len).map(|i| (value >> i) & 1 == 1).collect()
}

/// Enumerates the whole family for input length `n`, output length `k`, and
/// returns the largest collision fraction over all pairs `x != y`.
pub fn exhaustive_worst_collision(n: usize, k: usize) -> Result<f64> {
    if k < 1 || k > n || n + k - 1 > 20 {
        return Err(QkdError::InvalidHashDimensions { n, k });
    }
    let family = 1u64 << (n + k - 1);
    let inputs = 1usize << n;
    let xs: Vec<BitString> = (0..inputs as u64).map(|v| bits_of(v, n)).collect();
    let mut collisions = vec![0u64; inputs * inputs];
    let mut outputs = Vec::with_capacity(inputs);
    for d in 0..family {
        let h = ToeplitzHash::new(n, k, bits_of(d, n + k - 1))?;
        outputs.clear();
        outputs.extend(xs.iter().map(|x| h.apply_direct(x)));
        for a in 0..inputs {
            for b in a + 1..inputs {
                if outputs[a] == outputs[b] {
                    collisions[a * inputs + b] += 1;
                }
            }
        }
    }
    let worst = (0..inputs)
        .flat_map(|a| (a + 1..inputs).map(move |b| (a, b)))
        .map(|(a, b)| collisions[a * inputs + b])
        .max()
        .unwrap_or(0);
    Ok(worst as f64 / family as f64)
}

/// Monte Carlo collision rate: draws `trials` (hash, x, y) triples with
/// `x != y` and reports the fraction with `h(x) = h(y)`.
pub fn sampled_collision_rate(
    n: usize,
    k: usize,
    trials: usize,
    rng: &mut RandomStream,
) -> Result<f64> {
    if n < 1 {
        return Err(QkdError::InvalidHashDimensions { n, k });
    }
    let mut hits = 0usize;
    for _ in 0..trials {
        let h = sample_toeplitz(n, k, rng)?;
        let x: BitString = (0..n).map(|_| rng.bit()).collect();
        let mut y: BitString = (0..n).map(|_| rng.bit()).collect();
        if x == y {
            y.flip(rng.below(n));
        }
        hits += usize::from(apply_hash(&h, &x)? == apply_hash(&h, &y)?);
    }
    Ok(hits as f64 / trials.max(1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Reference product straight from the entry definition.
    fn naive_product(h: &ToeplitzHash, x: &BitString) -> BitString {
        (0..h.output_len())
            .map(|i| {
                (0..h.input_len()).fold(false, |acc, j| {
                    acc ^ (h.diagonals().get(i + h.input_len() - 1 - j) & x.get(j))
                })
            })
            .collect()
    }

    fn random_bits(len: usize, rng: &mut RandomStream) -> BitString {
        (0..len).map(|_| rng.bit()).collect()
    }

    #[test]
    fn dimensions() {
        let mut rng = RandomStream::new(0);
        assert_eq!(
            sample_toeplitz(8, 3, &mut rng).unwrap().diagonals().len(),
            10
        );
        assert!(sample_toeplitz(3, 4, &mut rng).is_err());
        assert!(sample_toeplitz(3, 0, &mut rng).is_err());
        assert!(ToeplitzHash::new(4, 2, BitString::zeros(4)).is_err());
    }

    #[test]
    fn degenerate_single_bit() {
        for d in [false, true] {
            let h = ToeplitzHash::new(1, 1, vec![d].into()).unwrap();
            for x in [false, true] {
                assert_eq!(apply_hash(&h, &vec![x].into()).unwrap(), vec![d & x].into());
            }
        }
    }

    #[test]
    fn hand_computed_product() {
        let h = ToeplitzHash::new(2, 1, vec![true, true].into()).unwrap();
        assert_eq!(
            apply_hash(&h, &vec![true, false].into()).unwrap(),
            vec![true].into()
        );
        let h = ToeplitzHash::new(5, 3, BitString::from(vec![true; 7])).unwrap();
        assert_eq!(
            apply_hash(&h, &BitString::zeros(5)).unwrap(),
            BitString::zeros(3)
        );
        assert!(apply_hash(&h, &BitString::zeros(4)).is_err());
    }

    #[test]
    fn direct_and_fft_agree_with_reference() {
        let mut rng = RandomStream::new(5);
        for &(n, k) in &[
            (1, 1),
            (7, 3),
            (64, 64),
            (65, 1),
            (130, 77),
            (300, 129),
            (1000, 999),
        ] {
            let h = sample_toeplitz(n, k, &mut rng).unwrap();
            let x = random_bits(n, &mut rng);
            let reference = naive_product(&h, &x);
            assert_eq!(h.apply_direct(&x), reference, "direct n={n} k={k}");
            assert_eq!(h.apply_fft(&x), reference, "fft n={n} k={k}");
        }
    }

    #[test]
    fn fft_matches_direct_at_scale() {
        let mut rng = RandomStream::new(6);
        let h = sample_toeplitz(20_000, 12_000, &mut rng).unwrap();
        let x = random_bits(20_000, &mut rng);
        assert_eq!(h.apply_fft(&x), h.apply_direct(&x));
    }

    #[test]
    fn sampling_is_uniform() {
        // chi-square over the 32 diagonal strings of (n=4, k=2), 31 dof.
        let draws = 160_000;
        let mut rng = RandomStream::new(7);
        let mut counts = [0usize; 32];
        for _ in 0..draws {
            let h = sample_toeplitz(4, 2, &mut rng).unwrap();
            let idx = h
                .diagonals()
                .iter()
                .enumerate()
                .fold(0, |acc, (i, b)| acc | (usize::from(b) << i));
            counts[idx] += 1;
        }
        let expected = draws as f64 / 32.0;
        let chi2: f64 = counts
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        // 99th percentile of chi-square with 31 degrees of freedom.
        assert!(chi2 < 52.191, "chi2 = {chi2}");
    }

    #[test]
    fn exhaustive_family_fraction_for_one_pair() {
        // n=4, k=2: count hashes (out of 32) mapping x and y together.
        let x = bits_of(0b0101, 4);
        let y = bits_of(0b0011, 4);
        let hits = (0..32u64)
            .filter(|&d| {
                let h = ToeplitzHash::new(4, 2, bits_of(d, 5)).unwrap();
                naive_product(&h, &x) == naive_product(&h, &y)
            })
            .count();
        assert!(hits as f64 / 32.0 <= 0.25);
        assert_eq!(hits, 8);
    }

    #[test]
    fn two_universal_up_to_six_bits() {
        for n in 1..=6 {
            for k in 1..=n.min(3) {
                let worst = exhaustive_worst_collision(n, k).unwrap();
                assert!(worst <= 0.5f64.powi(k as i32), "n={n} k={k} worst={worst}");
            }
        }
        assert!(exhaustive_worst_collision(20, 10).is_err());
    }

    #[test]
    fn sampled_rate_near_two_to_minus_k() {
        let mut rng = RandomStream::new(8);
        let rate = sampled_collision_rate(32, 2, 20_000, &mut rng).unwrap();
        assert!(
            (rate - 0.25).abs() < 4.0 * (0.25 * 0.75 / 20_000f64).sqrt(),
            "{rate}"
        );
    }

    proptest! {
        #[test]
        fn linear_over_gf2(seed in any::<u64>(), n in 1usize..200, kfrac in 0.0f64..1.0) {
            let k = 1 + ((n - 1) as f64 * kfrac) as usize;
            let mut rng = RandomStream::new(seed);
            let h = sample_toeplitz(n, k, &mut rng).unwrap();
            let x = random_bits(n, &mut rng);
            let y = random_bits(n, &mut rng);
            let lhs = apply_hash(&h, &x.xor(&y).unwrap()).unwrap();
            let rhs = apply_hash(&h, &x).unwrap().xor(&apply_hash(&h, &y).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
            prop_assert_eq!(apply_hash(&h, &BitString::zeros(n)).unwrap(), BitString::zeros(k));
        }
    }
}
