//! Deterministic, splittable random streams.
//!
//! A [`RandomStream`] is a ChaCha12 generator keyed from a 64-bit seed. Child
//! streams are derived by hashing the parent seed with a text label, so every
//! protocol stage owns its own stream and the draws of one stage never shift
//! the draws of another.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

#[derive(Debug, Clone)]
pub struct RandomStream {
    seed: u64,
    rng: ChaCha12Rng,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha12Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Derives an independent child stream. Splitting does not consume any
    /// draws from `self`.
    pub fn split(&self, label: &str) -> RandomStream {
        RandomStream::new(derive_seed(self.seed, label, 0))
    }

    /// Like [`split`](Self::split) but additionally keyed by an index, for
    /// families of streams such as sweep points or trials.
    pub fn split_indexed(&self, label: &str, index: u64) -> RandomStream {
        RandomStream::new(derive_seed(self.seed, label, index.wrapping_add(1)))
    }

    pub fn bit(&mut self) -> bool {
        self.rng.next_u32() & 1 == 1
    }

    /// Returns `true` with probability `p`; `p` must lie in [0, 1].
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p)
    }

    /// Uniform draw from [0, 1).
    pub fn unit(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }

    pub fn below(&mut self, bound: usize) -> usize {
        self.rng.gen_range(0..bound)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform sample of `amount` distinct elements of `pool`, without
    /// replacement, returned in ascending order.
    pub fn sample_without_replacement(&mut self, pool: &[usize], amount: usize) -> Vec<usize> {
        assert!(amount <= pool.len(), "sample larger than pool");
        let mut picked = rand::seq::index::sample(&mut self.rng, pool.len(), amount)
            .into_iter()
            .map(|i| pool[i])
            .collect::<Vec<_>>();
        picked.sort_unstable();
        picked
    }

    /// Fisher-Yates shuffle of `items`.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        use rand::seq::SliceRandom;
        items.shuffle(&mut self.rng);
    }
}

// FNV-1a over the label, then a splitmix64 finalizer over (seed, label, index).
fn derive_seed(seed: u64, label: &str, index: u64) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    let mut z = seed
        ^ h.rotate_left(17)
        ^ index.wrapping_mul(0xd6e8_feb8_6659_fd93)
        ^ 0x9e37_79b9_7f4a_7c15;
    for _ in 0..2 {
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^= z >> 31;
    }
    z
}
