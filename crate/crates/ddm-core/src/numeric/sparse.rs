//! Sparse adjacency matrices stored as sorted COO triples.

use crate::error::{Error, Result};
use crate::numeric::matrix::DenseMatrix;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseAdjacency {
    node_count: usize,
    /// (row, col, weight), sorted row-major, deduplicated.
    entries: Vec<(usize, usize, f64)>,
}

impl SparseAdjacency {
    pub fn empty(node_count: usize) -> Self {
        SparseAdjacency {
            node_count,
            entries: Vec::new(),
        }
    }

    /// Builds from raw triples: sorts, merges duplicates (weights summed? no —
    /// duplicates are rejected), validates indices and weights.
    pub fn from_entries(node_count: usize, mut entries: Vec<(usize, usize, f64)>) -> Result<Self> {
        for &(r, c, w) in &entries {
            if r >= node_count || c >= node_count {
                return Err(Error::Contract(format!(
                    "adjacency entry ({r},{c}) out of range for {node_count} nodes"
                )));
            }
            if !w.is_finite() || w < 0.0 {
                return Err(Error::Contract(format!(
                    "adjacency weight at ({r},{c}) must be finite and >= 0, got {w}"
                )));
            }
        }
        entries.sort_unstable_by_key(|&(r, c, _)| (r, c));
        entries.dedup_by(|a, b| a.0 == b.0 && a.1 == b.1);
        Ok(SparseAdjacency {
            node_count,
            entries,
        })
    }

    /// Undirected construction: each (u, v) edge inserts both directions.
    pub fn from_undirected_edges(
        node_count: usize,
        edges: &[(usize, usize)],
        weight: f64,
    ) -> Result<Self> {
        let mut entries = Vec::with_capacity(edges.len() * 2);
        for &(u, v) in edges {
            entries.push((u, v, weight));
            entries.push((v, u, weight));
        }
        Self::from_entries(node_count, entries)
    }

    pub fn identity(node_count: usize) -> Self {
        SparseAdjacency {
            node_count,
            entries: (0..node_count).map(|i| (i, i, 1.0)).collect(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_symmetric(&self) -> bool {
        self.entries.iter().all(|&(r, c, w)| {
            self.entries
                .binary_search_by(|&(er, ec, _)| (er, ec).cmp(&(c, r)))
                .map(|i| (self.entries[i].2 - w).abs() < 1e-12)
                .unwrap_or(false)
        })
    }

    /// Sparse-dense product `self * x`.
    pub fn spmm(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        self.spmm_inner(x, false)
    }

    /// Transposed product `selfᵀ * x` (used in backward passes).
    pub fn spmm_transpose(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        self.spmm_inner(x, true)
    }

    fn spmm_inner(&self, x: &DenseMatrix, transpose: bool) -> Result<DenseMatrix> {
        if x.rows() != self.node_count {
            return Err(Error::Dimension {
                op: "spmm",
                expected: format!("{} rows", self.node_count),
                actual: format!("{} rows", x.rows()),
            });
        }
        let cols = x.cols();
        let mut out = DenseMatrix::zeros(self.node_count, cols);
        let xs = x.values();
        let os = out.values_mut();
        for &(r, c, w) in &self.entries {
            let (dst, src) = if transpose { (c, r) } else { (r, c) };
            let s0 = src * cols;
            let d0 = dst * cols;
            for j in 0..cols {
                os[d0 + j] += w * xs[s0 + j];
            }
        }
        out.check_finite("spmm")?;
        Ok(out)
    }

    /// Densifies; test/oracle helper for small graphs.
    pub fn to_dense(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.node_count, self.node_count);
        for &(r, c, w) in &self.entries {
            out.set(r, c, w);
        }
        out
    }

    /// Symmetric normalization with self-loops:
    /// `Â = D^{-1/2} (A + I) D^{-1/2}` where D is the degree matrix of A + I.
    pub fn normalize(&self) -> Result<SparseAdjacency> {
        let n = self.node_count;
        let mut with_loops: Vec<(usize, usize, f64)> = Vec::with_capacity(self.entries.len() + n);
        let mut has_loop = vec![false; n];
        for &(r, c, w) in &self.entries {
            if r == c {
                has_loop[r] = true;
                with_loops.push((r, c, w + 1.0));
            } else {
                with_loops.push((r, c, w));
            }
        }
        for (i, present) in has_loop.iter().enumerate() {
            if !present {
                with_loops.push((i, i, 1.0));
            }
        }
        let mut degree = vec![0.0f64; n];
        for &(r, _, w) in &with_loops {
            degree[r] += w;
        }
        let inv_sqrt: Vec<f64> = degree.iter().map(|&d| 1.0 / d.sqrt()).collect();
        let entries = with_loops
            .into_iter()
            .map(|(r, c, w)| (r, c, inv_sqrt[r] * w * inv_sqrt[c]))
            .collect();
        SparseAdjacency::from_entries(n, entries)
    }

    /// Stacks adjacencies into one block-diagonal matrix.
    pub fn block_diagonal(blocks: &[&SparseAdjacency]) -> Result<SparseAdjacency> {
        let total: usize = blocks.iter().map(|b| b.node_count).sum();
        let mut entries = Vec::new();
        let mut offset = 0;
        for b in blocks {
            entries.extend(b.entries.iter().map(|&(r, c, w)| (r + offset, c + offset, w)));
            offset += b.node_count;
        }
        Self::from_entries(total, entries)
    }
}

/// Free-function alias matching the loader surface.
pub fn normalize_adjacency(a: &SparseAdjacency) -> Result<SparseAdjacency> {
    a.normalize()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rng::RngStream;

    #[test]
    fn spmm_identity() {
        let mut rng = RngStream::new(1);
        let x = rng.gaussian(4, 3).unwrap();
        let id = SparseAdjacency::identity(4);
        assert_eq!(id.spmm(&x).unwrap(), x);
    }

    #[test]
    fn spmm_empty_is_zero() {
        let mut rng = RngStream::new(2);
        let x = rng.gaussian(4, 3).unwrap();
        let a = SparseAdjacency::empty(4);
        let y = a.spmm(&x).unwrap();
        assert_eq!(y, DenseMatrix::zeros(4, 3));
    }

    #[test]
    fn spmm_matches_dense_oracle() {
        let mut rng = RngStream::new(3);
        let mut edges = Vec::new();
        for r in 0..6 {
            for c in 0..6 {
                if rng.uniform() < 0.3 {
                    edges.push((r, c, rng.uniform()));
                }
            }
        }
        let a = SparseAdjacency::from_entries(6, edges).unwrap();
        let x = rng.gaussian(6, 2).unwrap();
        let sparse = a.spmm(&x).unwrap();
        let dense = a.to_dense().matmul(&x).unwrap();
        assert!(sparse.max_abs_diff(&dense) <= 1e-12);
    }

    #[test]
    fn normalize_single_node() {
        let a = SparseAdjacency::empty(1);
        let n = a.normalize().unwrap();
        assert_eq!(n.entries(), &[(0, 0, 1.0)]);
    }

    #[test]
    fn normalize_two_connected_nodes() {
        let a = SparseAdjacency::from_undirected_edges(2, &[(0, 1)], 1.0).unwrap();
        let n = a.normalize().unwrap();
        let d = n.to_dense();
        for r in 0..2 {
            for c in 0..2 {
                assert!((d.get(r, c) - 0.5).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn normalize_matches_dense_oracle() {
        let mut rng = RngStream::new(4);
        let mut edges = Vec::new();
        for u in 0..8usize {
            for v in (u + 1)..8 {
                if rng.uniform() < 0.4 {
                    edges.push((u, v));
                }
            }
        }
        let a = SparseAdjacency::from_undirected_edges(8, &edges, 1.0).unwrap();
        let norm = a.normalize().unwrap();

        // dense oracle
        let mut dense = a.to_dense();
        for i in 0..8 {
            dense.set(i, i, dense.get(i, i) + 1.0);
        }
        let mut deg = vec![0.0; 8];
        for r in 0..8 {
            for c in 0..8 {
                deg[r] += dense.get(r, c);
            }
        }
        let mut expect = DenseMatrix::zeros(8, 8);
        for r in 0..8 {
            for c in 0..8 {
                expect.set(r, c, dense.get(r, c) / (deg[r] * deg[c]).sqrt());
            }
        }
        assert!(norm.to_dense().max_abs_diff(&expect) <= 1e-12);

        // symmetric, entries in (0, 1]
        assert!(norm.is_symmetric());
        for &(_, _, w) in norm.entries() {
            assert!(w > 0.0 && w <= 1.0);
        }
    }

    #[test]
    fn block_diagonal_has_no_cross_entries() {
        let a = SparseAdjacency::from_undirected_edges(2, &[(0, 1)], 1.0).unwrap();
        let b = SparseAdjacency::from_undirected_edges(3, &[(0, 1), (1, 2)], 1.0).unwrap();
        let blk = SparseAdjacency::block_diagonal(&[&a, &b]).unwrap();
        assert_eq!(blk.node_count(), 5);
        for &(r, c, _) in blk.entries() {
            let same_block = (r < 2 && c < 2) || (r >= 2 && c >= 2);
            assert!(same_block, "cross-block entry ({r},{c})");
        }
    }
}
