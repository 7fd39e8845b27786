//! Seeded, splittable random streams.
//!
//! Every stochastic component takes a `(master_seed, instance_id)` pair so
//! Monte-Carlo trials, frequency bins and solver instances each get an
//! independent, reproducible stream. Normal variates use the Box-Muller
//! transform of two uniforms, so draws are bitwise stable.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(GOLDEN);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic PRNG substream identified by `(master_seed, instance_id)`.
#[derive(Debug, Clone)]
pub struct RngStream {
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(master_seed: u64, instance_id: u64) -> Self {
        // Expand the pair into a 256-bit ChaCha seed via splitmix64.
        let mut state = master_seed ^ instance_id.wrapping_mul(GOLDEN);
        let mut seed = [0u8; 32];
        for chunk in seed.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        Self {
            inner: ChaCha8Rng::from_seed(seed),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform draw in [0, 1) with 53 bits of precision.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal via Box-Muller: with u1 ∈ (0,1], u2 ∈ [0,1),
    /// returns sqrt(-2 ln u1) · cos(2π u2). Two uniforms per draw.
    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Unbiased uniform integer in [0, bound) by rejection.
    pub fn uniform_int(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "bound must be positive");
        let zone = u64::MAX - (u64::MAX % bound);
        loop {
            let v = self.next_u64();
            if v < zone {
                return v % bound;
            }
        }
    }

    /// `k` distinct indices from [0, n), in draw order (partial Fisher-Yates).
    pub fn sample_indices(&mut self, n: usize, k: usize) -> Vec<usize> {
        assert!(k <= n, "cannot sample {k} distinct values from {n}");
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = i + self.uniform_int((n - i) as u64) as usize;
            pool.swap(i, j);
        }
        pool.truncate(k);
        pool
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_and_id_reproduces_stream() {
        let mut a = RngStream::new(42, 7);
        let mut b = RngStream::new(42, 7);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn distinct_ids_give_distinct_streams() {
        // Collision check over a small id matrix.
        for seed in [0u64, 1, 99, u64::MAX] {
            for id_a in 0..4u64 {
                for id_b in (id_a + 1)..4 {
                    let mut a = RngStream::new(seed, id_a);
                    let mut b = RngStream::new(seed, id_b);
                    let draws_a: Vec<u64> = (0..10).map(|_| a.next_u64()).collect();
                    let draws_b: Vec<u64> = (0..10).map(|_| b.next_u64()).collect();
                    assert_ne!(draws_a, draws_b, "seed {seed} ids {id_a}/{id_b}");
                }
            }
        }
    }

    #[test]
    fn normal_moments() {
        let mut rng = RngStream::new(2024, 0);
        let n = 100_000;
        let draws: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 0.02, "mean {mean}");
        assert!((var - 1.0).abs() < 0.03, "var {var}");
    }

    #[test]
    fn uniform_stays_in_unit_interval() {
        let mut rng = RngStream::new(1, 1);
        for _ in 0..10_000 {
            let u = rng.uniform();
            assert!((0.0..1.0).contains(&u));
        }
    }

    #[test]
    fn sample_indices_distinct_and_in_range() {
        let mut rng = RngStream::new(3, 3);
        let picks = rng.sample_indices(40, 16);
        assert_eq!(picks.len(), 16);
        let mut sorted = picks.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), 16);
        assert!(picks.iter().all(|&i| i < 40));
    }
}
