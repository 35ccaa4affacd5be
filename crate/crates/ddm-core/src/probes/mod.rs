//! Diagnostic experiments: Fisher SNR decay along the forward process,
//! SVD anisotropy projection, and the two-ellipse noise simulation.

pub mod curve;
pub mod ellipse;
pub mod extractor;
pub mod fisher;
pub mod svd;

pub use curve::{snr_curve, write_snr_csv, SnrCurve};
pub use ellipse::{
    simulate_two_ellipses, EllipseCloud, EllipseScore, EllipseSimConfig, EllipseSimResult,
};
pub use extractor::{train_probe_extractor, ProbeConfig, ProbeExtractor};
pub use fisher::{fisher_fit, scatter_matrices, snr_along, FisherDiscriminant, FISHER_RIDGE};
pub use svd::{svd_project_2d, write_projection_csv, ProjectionResult};
