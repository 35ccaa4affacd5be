//! Shared fixtures for the benchmark suite.

use ddm_core::numeric::{DenseMatrix, RngStream, SparseAdjacency};

/// Random dense matrix with a fixed seed.
pub fn random_matrix(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
    let mut rng = RngStream::new(seed);
    rng.gaussian(rows, cols).expect("gaussian matrix")
}

/// Random undirected graph with roughly `avg_degree` neighbours per node.
pub fn random_adjacency(nodes: usize, avg_degree: usize, seed: u64) -> SparseAdjacency {
    let mut rng = RngStream::new(seed);
    let mut edges = Vec::new();
    for u in 0..nodes {
        for _ in 0..avg_degree.div_ceil(2) {
            let v = (rng.standard_normal().abs() * nodes as f64 / 3.0) as usize % nodes;
            if u != v {
                edges.push((u, v));
            }
        }
    }
    SparseAdjacency::from_undirected_edges(nodes, &edges, 1.0).expect("adjacency")
}
