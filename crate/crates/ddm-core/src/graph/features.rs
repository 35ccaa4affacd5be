//! Synthesized initial node features.

use crate::error::{Error, Result};
use crate::graph::io::Graph;
use crate::numeric::DenseMatrix;

/// One-hot of `min(degree(i), cap)`; output dimension `cap + 1`.
/// Self-loops and edge weights are ignored: the degree is the number of
/// distinct neighbors.
pub fn degree_onehot_features(g: &Graph, cap: usize) -> Result<DenseMatrix> {
    if cap < 1 {
        return Err(Error::Contract("degree cap must be >= 1".into()));
    }
    let mut degree = vec![0usize; g.node_count];
    for &(r, c, _) in g.adjacency.entries() {
        if r != c {
            degree[r] += 1;
        }
    }
    let d = cap + 1;
    let mut out = DenseMatrix::zeros(g.node_count, d);
    for (i, &deg) in degree.iter().enumerate() {
        out.set(i, deg.min(cap), 1.0);
    }
    Ok(out)
}

/// One-hot of the categorical node label; output dimension `num_node_labels`.
pub fn label_onehot_features(g: &Graph, num_node_labels: usize) -> Result<DenseMatrix> {
    let labels = g
        .node_labels
        .as_ref()
        .ok_or_else(|| Error::Contract("label_onehot_features requires node labels".into()))?;
    let mut out = DenseMatrix::zeros(g.node_count, num_node_labels);
    for (i, &l) in labels.iter().enumerate() {
        if l >= num_node_labels {
            return Err(Error::Contract(format!(
                "node label {l} >= num_node_labels {num_node_labels}"
            )));
        }
        out.set(i, l, 1.0);
    }
    Ok(out)
}
