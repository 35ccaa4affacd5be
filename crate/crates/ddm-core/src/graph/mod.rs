//! Graph datasets: on-disk format, feature synthesis, adjacency
//! normalization, and block-diagonal mini-batching.

pub mod batch;
pub mod features;
pub mod io;

pub use batch::{make_batches, sequential_batches, BatchedGraph};
pub use features::{degree_onehot_features, label_onehot_features};
pub use io::{load_dataset, write_dataset, Dataset, FeatureKind, Graph, Split, Task};
