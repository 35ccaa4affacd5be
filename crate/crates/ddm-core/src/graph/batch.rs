//! Block-diagonal mini-batching for graph-level datasets.

use crate::error::{Error, Result};
use crate::graph::io::{Dataset, Task};
use crate::numeric::{DenseMatrix, RngStream, SparseAdjacency};

#[derive(Debug, Clone)]
pub struct BatchedGraph {
    /// Block-diagonal adjacency (raw, unnormalized).
    pub adjacency: SparseAdjacency,
    /// Stacked node features in block order.
    pub features: DenseMatrix,
    /// Row index -> position within `graph_ids`.
    pub node_to_graph: Vec<usize>,
    /// Dataset graph indices in block order.
    pub graph_ids: Vec<usize>,
}

fn build_batch(ds: &Dataset, ids: &[usize]) -> Result<BatchedGraph> {
    let blocks: Vec<&SparseAdjacency> = ids.iter().map(|&i| &ds.graphs[i].adjacency).collect();
    let adjacency = SparseAdjacency::block_diagonal(&blocks)?;
    let total: usize = ids.iter().map(|&i| ds.graphs[i].node_count).sum();
    let d = ds.feature_dim;
    let mut features = DenseMatrix::zeros(total, d);
    let mut node_to_graph = Vec::with_capacity(total);
    let mut row = 0;
    for (pos, &gid) in ids.iter().enumerate() {
        let g = &ds.graphs[gid];
        for r in 0..g.node_count {
            features.row_mut(row).copy_from_slice(g.features.row(r));
            node_to_graph.push(pos);
            row += 1;
        }
    }
    Ok(BatchedGraph {
        adjacency,
        features,
        node_to_graph,
        graph_ids: ids.to_vec(),
    })
}

/// Shuffles graphs with `rng` and groups them into block-diagonal batches;
/// every graph appears exactly once. Node-level datasets always produce a
/// single full-batch covering the whole graph set.
pub fn make_batches(
    ds: &Dataset,
    batch_size: usize,
    rng: &mut RngStream,
) -> Result<Vec<BatchedGraph>> {
    if batch_size < 1 {
        return Err(Error::Contract("batch_size must be >= 1".into()));
    }
    if ds.task == Task::Node {
        let ids: Vec<usize> = (0..ds.graphs.len()).collect();
        return Ok(vec![build_batch(ds, &ids)?]);
    }
    let mut ids: Vec<usize> = (0..ds.graphs.len()).collect();
    rng.shuffle(&mut ids);
    ids.chunks(batch_size).map(|c| build_batch(ds, c)).collect()
}

/// Batches in original graph order, no shuffling; used for representation
/// extraction so rows map back to graphs deterministically.
pub fn sequential_batches(ds: &Dataset, batch_size: usize) -> Result<Vec<BatchedGraph>> {
    if batch_size < 1 {
        return Err(Error::Contract("batch_size must be >= 1".into()));
    }
    if ds.task == Task::Node {
        let ids: Vec<usize> = (0..ds.graphs.len()).collect();
        return Ok(vec![build_batch(ds, &ids)?]);
    }
    let ids: Vec<usize> = (0..ds.graphs.len()).collect();
    ids.chunks(batch_size).map(|c| build_batch(ds, c)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::io::{Graph, Split};

    fn tiny_dataset(sizes: &[usize]) -> Dataset {
        let mut rng = RngStream::new(9);
        let graphs = sizes
            .iter()
            .map(|&n| {
                let edges: Vec<(usize, usize)> = (1..n).map(|i| (i - 1, i)).collect();
                Graph {
                    node_count: n,
                    adjacency: SparseAdjacency::from_undirected_edges(n, &edges, 1.0).unwrap(),
                    features: rng.gaussian(n, 2).unwrap(),
                    node_labels: None,
                    graph_label: Some(0),
                }
            })
            .collect::<Vec<_>>();
        let folds = (0..sizes.len()).map(|i| i % 10).collect();
        Dataset {
            graphs,
            task: Task::Graph,
            num_classes: 1,
            feature_dim: 2,
            split: Split::GraphFolds(folds),
        }
    }

    #[test]
    fn block_diagonal_definition() {
        let ds = tiny_dataset(&[2, 3]);
        let mut rng = RngStream::new(1);
        let batches = make_batches(&ds, 2, &mut rng).unwrap();
        assert_eq!(batches.len(), 1);
        let b = &batches[0];
        assert_eq!(b.features.rows(), 5);
        // cross-block entries absent
        let boundary = ds.graphs[b.graph_ids[0]].node_count;
        for &(r, c, _) in b.adjacency.entries() {
            assert_eq!(r < boundary, c < boundary);
        }
    }

    #[test]
    fn batch_size_one_is_identity() {
        let ds = tiny_dataset(&[2, 3, 4]);
        let mut rng = RngStream::new(2);
        let batches = make_batches(&ds, 1, &mut rng).unwrap();
        assert_eq!(batches.len(), 3);
        for b in &batches {
            let g = &ds.graphs[b.graph_ids[0]];
            assert_eq!(b.features, g.features);
            assert_eq!(b.adjacency, g.adjacency);
        }
    }

    #[test]
    fn partition_property() {
        let ds = tiny_dataset(&[2; 10]);
        let mut rng = RngStream::new(3);
        let batches = make_batches(&ds, 3, &mut rng).unwrap();
        let sizes: Vec<usize> = batches.iter().map(|b| b.graph_ids.len()).collect();
        assert_eq!(sizes, vec![3, 3, 3, 1]);
        let mut all: Vec<usize> = batches.iter().flat_map(|b| b.graph_ids.clone()).collect();
        all.sort_unstable();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn batching_preserves_feature_multiset() {
        let ds = tiny_dataset(&[3, 2, 4, 5]);
        let mut rng = RngStream::new(4);
        let batches = make_batches(&ds, 2, &mut rng).unwrap();
        for b in &batches {
            let mut row = 0;
            for &gid in &b.graph_ids {
                let g = &ds.graphs[gid];
                for r in 0..g.node_count {
                    assert_eq!(b.features.row(row), g.features.row(r));
                    row += 1;
                }
            }
        }
    }

    #[test]
    fn node_task_is_full_batch() {
        let mut ds = tiny_dataset(&[4, 4]);
        ds.task = Task::Node;
        ds.split = Split::NodeMasks {
            train: vec![true; 8],
            val: vec![false; 8],
            test: vec![false; 8],
        };
        let mut rng = RngStream::new(5);
        let batches = make_batches(&ds, 1, &mut rng).unwrap();
        assert_eq!(batches.len(), 1);
        assert_eq!(batches[0].features.rows(), 8);
        assert_eq!(batches[0].graph_ids, vec![0, 1]);
    }
}
