//! Deterministic random streams.
//!
//! Every stochastic component draws from a ChaCha8 stream keyed by a 64-bit
//! seed plus a stream label, so reveal sequences depend only on (seed, key)
//! and never on query interleaving. All variates are derived from raw 53-bit
//! uniforms by inverse CDF, keeping outputs bit-identical across runs.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// splitmix64 step; used to expand a seed and to fold stream labels in.
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// FNV-1a over a byte string; stable label hash for cell ids.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Replica seeds derive as a hash chain from the run seed; documented so that
/// alternate implementations can reproduce outputs.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut s = seed ^ 0x5851_f42d_4c95_7f2d;
    let a = splitmix64(&mut s);
    let mut t = index.wrapping_add(a);
    splitmix64(&mut t)
}

/// One deterministic uniform stream.
#[derive(Clone, Debug)]
pub struct Stream {
    rng: ChaCha8Rng,
}

impl Stream {
    /// Stream keyed by (seed, label); the full 256-bit ChaCha key is expanded
    /// from the pair with splitmix64.
    pub fn keyed(seed: u64, label: u64) -> Self {
        let mut state = seed ^ label.rotate_left(32);
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        Stream {
            rng: ChaCha8Rng::from_seed(key),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform in [0, 1) with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in (0, 1]; safe as a log argument.
    pub fn uniform_open(&mut self) -> f64 {
        1.0 - self.uniform()
    }

    /// Mean-1 exponential by inverse CDF.
    pub fn exp1(&mut self) -> f64 {
        -self.uniform_open().ln()
    }

    /// Mean-1 exponential conditioned to be at most `bound`.
    pub fn exp1_truncated(&mut self, bound: f64) -> f64 {
        let u = self.uniform();
        -(1.0 - u * (1.0 - (-bound).exp())).ln()
    }

    /// Poisson count as the number of unit-rate arrivals in [0, mean); exact
    /// for any finite mean, O(mean) uniforms per draw.
    pub fn poisson(&mut self, mean: f64) -> u64 {
        assert!(
            mean.is_finite() && mean >= 0.0,
            "poisson mean must be finite"
        );
        let mut total = 0.0;
        let mut count = 0u64;
        loop {
            total += self.exp1();
            if total >= mean {
                return count;
            }
            count += 1;
        }
    }

    /// Index into `weights` proportional to the weights.
    pub fn weighted_index(&mut self, weights: &[f64]) -> usize {
        let total: f64 = weights.iter().sum();
        let mut target = self.uniform() * total;
        for (i, w) in weights.iter().enumerate() {
            target -= w;
            if target < 0.0 {
                return i;
            }
        }
        weights.len() - 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible() {
        let mut a = Stream::keyed(42, 7);
        let mut b = Stream::keyed(42, 7);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn distinct_labels_decorrelate() {
        let mut a = Stream::keyed(42, 7);
        let mut b = Stream::keyed(42, 8);
        assert_ne!(a.next_u64(), b.next_u64());
    }

    #[test]
    fn poisson_mean_is_close() {
        let mut s = Stream::keyed(1, 1);
        let n = 20_000;
        let mean = 3.7;
        let total: u64 = (0..n).map(|_| s.poisson(mean)).sum();
        let emp = total as f64 / n as f64;
        let sigma = (mean / n as f64).sqrt();
        assert!((emp - mean).abs() < 4.0 * sigma, "empirical mean {emp}");
    }

    #[test]
    fn truncated_exponential_stays_in_range() {
        let mut s = Stream::keyed(9, 9);
        for _ in 0..10_000 {
            let x = s.exp1_truncated(0.8);
            assert!(x > 0.0 && x <= 0.8);
        }
    }

    #[test]
    fn derive_seed_differs_per_replica() {
        let s = derive_seed(123, 0);
        let t = derive_seed(123, 1);
        assert_ne!(s, t);
    }
}
