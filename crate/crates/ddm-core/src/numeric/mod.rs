//! Dense/sparse numeric kernel, deterministic randomness, reverse-mode
//! differentiation, and the Adam optimizer.

pub mod adam;
pub mod matrix;
pub mod rng;
pub mod sparse;
pub mod tape;

pub use adam::{AdamConfig, AdamState};
pub use matrix::{jacobi_eigen, solve_linear, DenseMatrix};
pub use rng::RngStream;
pub use sparse::{normalize_adjacency, SparseAdjacency};
pub use tape::{NodeId, ParamStore, Tape};
