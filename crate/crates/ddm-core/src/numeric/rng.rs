//! Deterministic, splittable random streams.
//!
//! A stream is identified by a root seed plus a split lineage (a path of
//! indices). The concrete generator seed is derived by hashing the pair, so
//! child streams are reproducible regardless of how many draws the parent
//! made before splitting.

use crate::error::Result;
use crate::numeric::matrix::DenseMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    path: Vec<u64>,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self::with_path(seed, Vec::new())
    }

    fn with_path(seed: u64, path: Vec<u64>) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(seed.to_le_bytes());
        hasher.update((path.len() as u64).to_le_bytes());
        for p in &path {
            hasher.update(p.to_le_bytes());
        }
        let digest = hasher.finalize();
        let mut key = [0u8; 32];
        key.copy_from_slice(&digest);
        RngStream {
            seed,
            path,
            rng: ChaCha8Rng::from_seed(key),
        }
    }

    /// Child stream at split index `idx`. Does not consume parent state:
    /// splitting twice with the same index yields identical children.
    pub fn split(&self, idx: u64) -> RngStream {
        let mut path = self.path.clone();
        path.push(idx);
        Self::with_path(self.seed, path)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn path(&self) -> &[u64] {
        &self.path
    }

    /// Uniform in [0, 1).
    pub fn uniform(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }

    /// Uniform integer in [0, n).
    pub fn uniform_usize(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..n)
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Matrix of i.i.d. standard normal entries.
    pub fn gaussian(&mut self, rows: usize, cols: usize) -> Result<DenseMatrix> {
        let data = (0..rows * cols).map(|_| self.standard_normal()).collect();
        DenseMatrix::from_vec(rows, cols, data)
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.uniform_usize(i + 1);
            items.swap(i, j);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recreated_stream_is_identical() {
        let mut a = RngStream::new(42).split(3);
        let mut b = RngStream::new(42).split(3);
        let ma = a.gaussian(4, 4).unwrap();
        let mb = b.gaussian(4, 4).unwrap();
        assert_eq!(ma, mb);
    }

    #[test]
    fn split_independent_of_parent_draws() {
        let mut parent = RngStream::new(7);
        let child_before = parent.split(0);
        let _ = parent.gaussian(10, 10).unwrap();
        let child_after = parent.split(0);
        let a = child_before.clone().gaussian(2, 2).unwrap();
        let b = child_after.clone().gaussian(2, 2).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn gaussian_moments() {
        let mut rng = RngStream::new(123);
        let n = 1_000_000;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for _ in 0..n {
            let v = rng.standard_normal();
            sum += v;
            sumsq += v * v;
        }
        let mean = sum / n as f64;
        let var = sumsq / n as f64 - mean * mean;
        assert!(mean.abs() < 0.005, "mean {mean}");
        assert!((var - 1.0).abs() < 0.01, "var {var}");
    }

    #[test]
    fn split_streams_uncorrelated() {
        let root = RngStream::new(99);
        let mut a = root.split(1);
        let mut b = root.split(2);
        let n = 100_000;
        let (mut sa, mut sb, mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for _ in 0..n {
            let x = a.standard_normal();
            let y = b.standard_normal();
            sa += x;
            sb += y;
            sab += x * y;
            saa += x * x;
            sbb += y * y;
        }
        let n = n as f64;
        let cov = sab / n - (sa / n) * (sb / n);
        let corr = cov / ((saa / n - (sa / n).powi(2)) * (sbb / n - (sb / n).powi(2))).sqrt();
        assert!(corr.abs() <= 0.01, "corr {corr}");
    }
}
