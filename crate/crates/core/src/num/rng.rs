//! Deterministic random streams.
//!
//! Every stochastic routine takes an [`RngStream`]. Streams are ChaCha
//! (counter-based) generators keyed by a 64-bit seed; child streams are keyed
//! by hashing the parent seed together with a label, so a simulation can hand
//! each (scenario, iteration, purpose) its own reproducible stream without
//! any shared state.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    rng: ChaCha12Rng,
}

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha12Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent stream derived from this stream's seed and `label`.
    ///
    /// Depends only on the seed, never on how many draws the parent has made.
    pub fn child(&self, label: &str) -> RngStream {
        RngStream::new(mix64(self.seed ^ mix64(fnv1a(label.as_bytes()))))
    }

    /// Child stream keyed by an integer index, e.g. an iteration number.
    pub fn child_indexed(&self, label: &str, index: u64) -> RngStream {
        RngStream::new(mix64(
            self.seed ^ mix64(fnv1a(label.as_bytes()) ^ mix64(index)),
        ))
    }

    /// Uniform draw on the open interval (0, 1).
    #[inline]
    pub fn uniform_open(&mut self) -> f64 {
        loop {
            // 53 random mantissa bits, offset by half an ulp to exclude 0
            let u = ((self.rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64);
            if u > 0.0 && u < 1.0 {
                return u;
            }
        }
    }

    #[inline]
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    #[inline]
    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    #[inline]
    pub fn normal(&mut self, mean: f64, sd: f64) -> f64 {
        mean + sd * self.standard_normal()
    }

    /// Exponential draw with unit rate.
    #[inline]
    pub fn standard_exponential(&mut self) -> f64 {
        -self.uniform_open().ln()
    }

    #[inline]
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    /// Uniform integer in `0..n`.
    pub fn below(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_sequence() {
        let mut a = RngStream::new(42);
        let mut b = RngStream::new(42);
        for _ in 0..1000 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
        let na: Vec<f64> = (0..10).map(|_| a.standard_normal()).collect();
        let nb: Vec<f64> = (0..10).map(|_| b.standard_normal()).collect();
        assert_eq!(na, nb);
    }

    #[test]
    fn children_ignore_parent_position() {
        let a = RngStream::new(7);
        let mut b = RngStream::new(7);
        b.next_u64();
        assert_eq!(a.child("dev-data").next_u64(), b.child("dev-data").next_u64());
        assert_ne!(a.child("dev-data").next_u64(), a.child("val-data").next_u64());
        assert_ne!(
            a.child_indexed("iter", 1).next_u64(),
            a.child_indexed("iter", 2).next_u64()
        );
    }

    #[test]
    fn sibling_streams_uncorrelated() {
        let root = RngStream::new(2024);
        let mut s1 = root.child_indexed("iter", 0);
        let mut s2 = root.child_indexed("iter", 1);
        let n = 100_000;
        let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
        for _ in 0..n {
            let x = s1.standard_normal();
            let y = s2.standard_normal();
            sxy += x * y;
            sxx += x * x;
            syy += y * y;
        }
        let corr = sxy / (sxx * syy).sqrt();
        // 4 standard errors of a null correlation
        assert!(corr.abs() < 4.0 / (n as f64).sqrt(), "corr={corr}");
    }

    #[test]
    fn uniform_open_excludes_endpoints() {
        let mut r = RngStream::new(1);
        for _ in 0..100_000 {
            let u = r.uniform_open();
            assert!(u > 0.0 && u < 1.0);
        }
    }
}
