//! The one random source used everywhere: SplitMix64.
//!
//! Every draw is defined on top of `next_u64` so that other implementations
//! can reproduce generated corpora exactly:
//!
//! * `coin(p)`: take `next_u64() >> 11`, scale by `2^-53`, return `u < p`.
//! * `below(n)`: `next_u64() % n`.

use rand_core::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;

#[derive(Debug, Clone)]
pub struct Prng(SplitMix64);

impl Prng {
    pub fn new(seed: u64) -> Self {
        Prng(SplitMix64::seed_from_u64(seed))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Bernoulli draw with probability `p`.
    pub fn coin(&mut self, p: f64) -> bool {
        let u = (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        u < p
    }

    /// Uniform-ish index in `0..n`; `n` must be positive.
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0, "below(0)");
        (self.next_u64() % n as u64) as usize
    }

    /// Derives an independent seed for sub-task `index`.
    pub fn derive(seed: u64, index: u64) -> u64 {
        let mut r = Prng::new(seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        r.next_u64()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splitmix_reference_vector() {
        // first outputs of the reference splitmix64.c for seed 0
        let mut r = Prng::new(0);
        assert_eq!(r.next_u64(), 0xe220a8397b1dcdaf);
        assert_eq!(r.next_u64(), 0x6e789e6aa1b965f4);
    }

    #[test]
    fn coin_extremes() {
        let mut r = Prng::new(7);
        assert!((0..1000).all(|_| r.coin(1.0)));
        assert!((0..1000).all(|_| !r.coin(0.0)));
    }
}
