//! Directional diffusion models for unsupervised graph representation
//! learning: anisotropic forward noise, an X0-predicting GNN denoiser,
//! representation extraction with downstream evaluation, and diagnostic
//! probes (Fisher SNR curves, SVD projections, two-ellipse simulation).

pub mod denoiser;
pub mod diffusion;
pub mod error;
pub mod eval;
pub mod graph;
pub mod numeric;
pub mod probes;
pub mod synthetic;

pub use error::{Error, Result};
pub use numeric::{
    AdamConfig, AdamState, DenseMatrix, ParamStore, RngStream, SparseAdjacency, Tape,
};
