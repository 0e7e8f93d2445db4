//! Seeded generators for random initial configurations.
//!
//! Every trial owns a `(seed, stream)` pair. ChaCha is counter based, so
//! stream `t` is available directly without drawing streams `0..t`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::BallConfig;
use crate::dist::ColorDist;
use crate::error::{BbsError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Seed {
    pub value: u64,
    pub stream: u64,
}

impl Seed {
    pub fn new(value: u64, stream: u64) -> Self {
        Self { value, stream }
    }

    pub fn with_stream(self, stream: u64) -> Self {
        Self { stream, ..self }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.value);
        rng.set_stream(self.stream);
        rng
    }
}

/// Stream index for trial `trial` of ladder point `point`.
pub fn trial_stream(offset: u64, point: usize, trial: usize) -> u64 {
    offset + ((point as u64) << 32) + trial as u64
}

/// A uniformly random permutation together with the uniforms that ranked it.
#[derive(Debug, Clone, PartialEq)]
pub struct PermutationSample {
    pub config: BallConfig,
    pub uniforms: Vec<f64>,
}

/// `n` i.i.d. uniforms from the seed, in order.
pub fn uniforms(n: usize, seed: Seed) -> Vec<f64> {
    let mut rng = seed.rng();
    (0..n).map(|_| rng.random::<f64>()).collect()
}

/// Permutation of `1..=n` on sites `1..=n`, with `X(s)` the rank of `U_s`
/// among `U_1, ..., U_n` (rank 1 is the smallest).
pub fn gen_permutation(n: usize, seed: Seed) -> Result<PermutationSample> {
    if n == 0 {
        return Err(BbsError::InvalidArgument("n must be at least 1".into()));
    }
    let kappa = u32::try_from(n).map_err(|_| BbsError::InvalidArgument("n too large".into()))?;
    let us = uniforms(n, seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| us[a].total_cmp(&us[b]));
    let mut cells = vec![0u32; n];
    for (rank, &site) in order.iter().enumerate() {
        cells[site] = rank as u32 + 1;
    }
    Ok(PermutationSample { config: BallConfig::new(kappa, cells)?, uniforms: us })
}

/// Infinite i.i.d. color stream drawn by inverse CDF over half-open bins.
pub struct IidStream {
    cum: Vec<f64>,
    rng: ChaCha8Rng,
}

impl IidStream {
    pub fn new(p: &ColorDist, seed: Seed) -> Self {
        Self { cum: p.cumulative(), rng: seed.rng() }
    }

    pub fn next_color(&mut self) -> u32 {
        let u: f64 = self.rng.random();
        self.cum.partition_point(|&c| c <= u) as u32
    }
}

impl Iterator for IidStream {
    type Item = u32;

    fn next(&mut self) -> Option<u32> {
        Some(self.next_color())
    }
}

/// Cells `1..=n` i.i.d. from `p`.
pub fn gen_iid(n: usize, p: &ColorDist, seed: Seed) -> Result<BallConfig> {
    if n == 0 {
        return Err(BbsError::InvalidArgument("n must be at least 1".into()));
    }
    let cells = IidStream::new(p, seed).take(n).collect();
    BallConfig::new(p.kappa(), cells)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutation_is_a_bijection() {
        let s = gen_permutation(50, Seed::new(7, 3)).unwrap();
        let mut cells = s.config.cells().to_vec();
        cells.sort_unstable();
        assert_eq!(cells, (1..=50).collect::<Vec<u32>>());
        assert_eq!(s.uniforms, uniforms(50, Seed::new(7, 3)));
        for i in 0..50 {
            for j in 0..50 {
                assert_eq!(s.uniforms[i] < s.uniforms[j], s.config.cells()[i] < s.config.cells()[j]);
            }
        }
    }

    #[test]
    fn singleton_and_errors() {
        assert_eq!(gen_permutation(1, Seed::new(1, 0)).unwrap().config.cells(), &[1]);
        assert!(gen_permutation(0, Seed::new(1, 0)).is_err());
        let p = ColorDist::uniform(2).unwrap();
        assert!(gen_iid(0, &p, Seed::new(1, 0)).is_err());
    }

    #[test]
    fn deterministic_streams() {
        let p: ColorDist = "0.5,0.3,0.2".parse().unwrap();
        let a = gen_iid(200, &p, Seed::new(42, 9)).unwrap();
        let b = gen_iid(200, &p, Seed::new(42, 9)).unwrap();
        let c = gen_iid(200, &p, Seed::new(42, 10)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(trial_stream(5, 1, 2), 5 + (1 << 32) + 2);
    }

    #[test]
    fn color_frequencies() {
        let p: ColorDist = "0.5,0.3,0.2".parse().unwrap();
        let n = 100_000;
        let x = gen_iid(n, &p, Seed::new(1, 0)).unwrap();
        let mut counts = [0usize; 3];
        for c in x.colors().take(n) {
            counts[c as usize] += 1;
        }
        for (i, &c) in counts.iter().enumerate() {
            let pi = p.p(i as u32);
            let sd = (n as f64 * pi * (1.0 - pi)).sqrt();
            assert!((c as f64 - n as f64 * pi).abs() < 3.0 * sd, "color {i}: {c}");
        }
    }

    #[test]
    fn sparse_balls() {
        let p: ColorDist = "0.98,0.02".parse().unwrap();
        let n = 20_000;
        let balls = gen_iid(n, &p, Seed::new(3, 0)).unwrap().ball_count() as f64;
        let sd = (n as f64 * 0.02 * 0.98).sqrt();
        assert!((balls - 0.02 * n as f64).abs() < 3.0 * sd);
    }
}
