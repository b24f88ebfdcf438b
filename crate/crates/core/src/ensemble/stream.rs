//! Reproducible random substreams.
//!
//! Each substream is a ChaCha8 keystream whose 256-bit key is derived from
//! the master seed and a [`StreamPath`] by SplitMix64 mixing. Gaussian
//! variates come from the Marsaglia polar method on 53-bit uniforms, so the
//! sequence for a given `(seed, path)` is fixed independently of threads,
//! scheduling or which other streams were consumed.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

/// What a substream is used for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StreamDomain {
    /// Entries of one GOE/GUE block of `Phi_{n,r}`.
    Block,
    /// Site sampling inside experiments.
    Sites,
    /// Synthetic reference processes used by checks.
    Synthetic,
}

impl StreamDomain {
    fn tag(self) -> u64 {
        match self {
            StreamDomain::Block => 0x424c_4f43,
            StreamDomain::Sites => 0x5349_5445,
            StreamDomain::Synthetic => 0x5359_4e54,
        }
    }
}

/// Identifies an independent substream: `(trial, level r, block index)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StreamPath {
    pub domain: StreamDomain,
    pub trial: u64,
    pub level: u32,
    pub block: u64,
}

impl StreamPath {
    pub fn block(trial: u64, level: u32, block: u64) -> Self {
        StreamPath {
            domain: StreamDomain::Block,
            trial,
            level,
            block,
        }
    }

    pub fn sites(trial: u64) -> Self {
        StreamPath {
            domain: StreamDomain::Sites,
            trial,
            level: 0,
            block: 0,
        }
    }

    pub fn synthetic(trial: u64, block: u64) -> Self {
        StreamPath {
            domain: StreamDomain::Synthetic,
            trial,
            level: 0,
            block,
        }
    }
}

#[inline]
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A deterministic random source for one [`StreamPath`].
pub struct RngStream {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl RngStream {
    pub fn new(master_seed: u64, path: StreamPath) -> Self {
        let mut state = master_seed;
        let words = [
            path.domain.tag(),
            path.trial,
            path.level as u64,
            path.block,
        ];
        let mut acc = splitmix64(&mut state);
        for w in words {
            state ^= w.wrapping_mul(0xd6e8_feb8_6659_fd93).rotate_left(17) ^ acc;
            acc = splitmix64(&mut state);
        }
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        RngStream {
            rng: ChaCha8Rng::from_seed(key),
            spare: None,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `0..bound` (rejection sampling, unbiased).
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0);
        let zone = u64::MAX - u64::MAX % bound;
        loop {
            let v = self.rng.next_u64();
            if v < zone {
                return v % bound;
            }
        }
    }

    /// Standard normal variate (polar method).
    pub fn gaussian(&mut self) -> f64 {
        if let Some(g) = self.spare.take() {
            return g;
        }
        loop {
            let u = 2.0 * self.uniform() - 1.0;
            let v = 2.0 * self.uniform() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let f = (-2.0 * s.ln() / s).sqrt();
                self.spare = Some(v * f);
                return u * f;
            }
        }
    }

    /// Exponential variate with unit mean.
    pub fn exponential(&mut self) -> f64 {
        -(1.0 - self.uniform()).ln()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_path_same_output() {
        let p = StreamPath::block(3, 2, 1);
        let mut a = RngStream::new(7, p);
        let mut b = RngStream::new(7, p);
        for _ in 0..100 {
            assert_eq!(a.gaussian().to_bits(), b.gaussian().to_bits());
        }
    }

    #[test]
    fn distinct_paths_differ() {
        let paths = [
            StreamPath::block(0, 0, 0),
            StreamPath::block(1, 0, 0),
            StreamPath::block(0, 1, 0),
            StreamPath::block(0, 0, 1),
            StreamPath::sites(0),
            StreamPath::synthetic(0, 0),
        ];
        let firsts: Vec<u64> = paths
            .iter()
            .map(|&p| RngStream::new(11, p).next_u64())
            .collect();
        for i in 0..firsts.len() {
            for j in 0..i {
                assert_ne!(firsts[i], firsts[j]);
            }
        }
        assert_ne!(
            RngStream::new(1, paths[0]).next_u64(),
            RngStream::new(2, paths[0]).next_u64()
        );
    }

    #[test]
    fn gaussian_moments() {
        let mut s = RngStream::new(5, StreamPath::synthetic(0, 0));
        let n = 200_000;
        let (mut m1, mut m2) = (0.0, 0.0);
        for _ in 0..n {
            let g = s.gaussian();
            m1 += g;
            m2 += g * g;
        }
        m1 /= n as f64;
        m2 /= n as f64;
        assert!(m1.abs() < 5.0 / (n as f64).sqrt());
        assert!((m2 - 1.0).abs() < 5.0 * (2.0 / n as f64).sqrt());
    }

    #[test]
    fn below_is_in_range() {
        let mut s = RngStream::new(5, StreamPath::sites(9));
        for _ in 0..1000 {
            assert!(s.below(7) < 7);
        }
    }
}
