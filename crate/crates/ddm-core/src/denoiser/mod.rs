//! The denoising network f(X_t, A, t) -> X0 and its training loop.

pub mod checkpoint;
pub mod net;
pub mod train;

pub use checkpoint::{load_checkpoint, read_store, save_checkpoint, write_store};
pub use net::{
    denoiser_forward, forward_traced, init_params, time_embed, training_loss, ActivationTrace,
    DenoiserConfig, TracedForward, PARAM_NAMES,
};
pub use train::{train, TrainingLog};
