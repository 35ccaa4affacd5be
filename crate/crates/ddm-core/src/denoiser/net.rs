//! The X0-predicting denoiser: two encoder GNN layers, two decoder GNN
//! layers with additive skips from the first encoder, and a two-layer MLP
//! head mapping the latent code back to the input dimension.

use crate::error::{Error, Result};
use crate::numeric::{DenseMatrix, NodeId, ParamStore, RngStream, SparseAdjacency, Tape};
use serde::{Deserialize, Serialize};
use std::rc::Rc;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DenoiserConfig {
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub time_embed_dim: usize,
    pub t_max: usize,
    pub beta_start: f64,
    pub beta_end: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub noise_mode: crate::diffusion::NoiseMode,
    pub seed: u64,
}

impl DenoiserConfig {
    pub fn with_input_dim(input_dim: usize) -> Self {
        DenoiserConfig {
            input_dim,
            hidden_dim: 64,
            time_embed_dim: 16,
            t_max: 1000,
            beta_start: 1e-4,
            beta_end: 0.02,
            learning_rate: 1e-3,
            epochs: 200,
            batch_size: 32,
            noise_mode: crate::diffusion::NoiseMode::Directional,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim < 1 || self.hidden_dim < 1 || self.t_max < 1 {
            return Err(Error::Contract("denoiser dims and t_max must be >= 1".into()));
        }
        if self.time_embed_dim % 2 != 0 || self.time_embed_dim == 0 {
            return Err(Error::Contract("time_embed_dim must be even and >= 2".into()));
        }
        Ok(())
    }

    /// Representation width: concat of the two decoder activations.
    pub fn rep_dim(&self) -> usize {
        2 * self.hidden_dim
    }
}

/// Sinusoidal embedding of step `t` as a 1 x dim row:
/// first half `sin(t * w_k)`, second half `cos(t * w_k)` with
/// `w_k = 10000^{-2k/dim}`.
pub fn time_embed(t: usize, dim: usize) -> Result<DenseMatrix> {
    if dim % 2 != 0 || dim == 0 {
        return Err(Error::Contract(format!(
            "time embedding dimension must be even and positive, got {dim}"
        )));
    }
    let half = dim / 2;
    let mut row = vec![0.0; dim];
    for k in 0..half {
        let freq = (10000f64).powf(-2.0 * k as f64 / dim as f64);
        let angle = t as f64 * freq;
        row[k] = angle.sin();
        row[half + k] = angle.cos();
    }
    DenseMatrix::from_vec(1, dim, row)
}

/// Per-layer activations of one forward pass; the decoder activations are
/// the representation source.
#[derive(Debug, Clone)]
pub struct ActivationTrace {
    pub enc1: DenseMatrix,
    pub enc2: DenseMatrix,
    pub dec1: DenseMatrix,
    pub dec2: DenseMatrix,
    pub prediction: DenseMatrix,
}

pub const PARAM_NAMES: [&str; 10] = [
    "enc1.w", "enc2.w", "dec1.w", "dec2.w", "time1.w", "time2.w", "mlp.w1", "mlp.b1", "mlp.w2",
    "mlp.b2",
];

fn glorot(rng: &mut RngStream, fan_in: usize, fan_out: usize) -> DenseMatrix {
    let s = (6.0 / (fan_in + fan_out) as f64).sqrt();
    let data = (0..fan_in * fan_out)
        .map(|_| (rng.uniform() * 2.0 - 1.0) * s)
        .collect();
    DenseMatrix::from_vec(fan_in, fan_out, data).expect("finite init")
}

/// Fresh parameter store with uniform Glorot weights and zero biases.
pub fn init_params(cfg: &DenoiserConfig, rng: &mut RngStream) -> Result<ParamStore> {
    cfg.validate()?;
    let (d, h, te) = (cfg.input_dim, cfg.hidden_dim, cfg.time_embed_dim);
    let mut params = ParamStore::new();
    params.insert("enc1.w", glorot(rng, d, h));
    params.insert("enc2.w", glorot(rng, h, h));
    params.insert("dec1.w", glorot(rng, h, h));
    params.insert("dec2.w", glorot(rng, h, h));
    params.insert("time1.w", glorot(rng, te, d));
    params.insert("time2.w", glorot(rng, te, h));
    params.insert("mlp.w1", glorot(rng, h, h));
    params.insert("mlp.b1", DenseMatrix::zeros(1, h));
    params.insert("mlp.w2", glorot(rng, h, d));
    params.insert("mlp.b2", DenseMatrix::zeros(1, d));
    Ok(params)
}

pub struct TracedForward {
    pub enc1: NodeId,
    pub enc2: NodeId,
    pub dec1: NodeId,
    pub dec2: NodeId,
    pub prediction: NodeId,
}

/// Builds the forward graph on `tape`:
///
/// ```text
/// enc1 = relu(A_hat (x_t + time1(emb)) W1)
/// enc2 = relu(A_hat (enc1 + time2(emb)) W2)
/// dec1 = relu(A_hat (enc2 + enc1) W3)
/// dec2 = relu(A_hat (dec1 + enc1) W4)
/// pred = relu(dec2 Wm1 + bm1) Wm2 + bm2
/// ```
pub fn forward_traced(
    tape: &mut Tape,
    params: &ParamStore,
    cfg: &DenoiserConfig,
    x_t: &DenseMatrix,
    adj_hat: &Rc<SparseAdjacency>,
    t: usize,
) -> Result<TracedForward> {
    if x_t.cols() != cfg.input_dim {
        return Err(Error::Dimension {
            op: "denoiser_forward",
            expected: format!("{} feature columns", cfg.input_dim),
            actual: format!("{} feature columns", x_t.cols()),
        });
    }
    let emb = time_embed(t, cfg.time_embed_dim)?;
    let emb = tape.constant(emb);
    let x = tape.constant(x_t.clone());

    let w1 = tape.param(params, "enc1.w")?;
    let w2 = tape.param(params, "enc2.w")?;
    let w3 = tape.param(params, "dec1.w")?;
    let w4 = tape.param(params, "dec2.w")?;
    let p1 = tape.param(params, "time1.w")?;
    let p2 = tape.param(params, "time2.w")?;
    let mw1 = tape.param(params, "mlp.w1")?;
    let mb1 = tape.param(params, "mlp.b1")?;
    let mw2 = tape.param(params, "mlp.w2")?;
    let mb2 = tape.param(params, "mlp.b2")?;

    let t1 = tape.matmul(emb, p1)?;
    let xin = tape.add_row(x, t1)?;
    let agg1 = tape.spmm(adj_hat.clone(), xin)?;
    let pre1 = tape.matmul(agg1, w1)?;
    let enc1 = tape.relu(pre1);

    let t2 = tape.matmul(emb, p2)?;
    let ein = tape.add_row(enc1, t2)?;
    let agg2 = tape.spmm(adj_hat.clone(), ein)?;
    let pre2 = tape.matmul(agg2, w2)?;
    let enc2 = tape.relu(pre2);

    let skip1 = tape.add(enc2, enc1)?;
    let agg3 = tape.spmm(adj_hat.clone(), skip1)?;
    let pre3 = tape.matmul(agg3, w3)?;
    let dec1 = tape.relu(pre3);

    let skip2 = tape.add(dec1, enc1)?;
    let agg4 = tape.spmm(adj_hat.clone(), skip2)?;
    let pre4 = tape.matmul(agg4, w4)?;
    let dec2 = tape.relu(pre4);

    let m1 = tape.matmul(dec2, mw1)?;
    let m1 = tape.add_row(m1, mb1)?;
    let m1 = tape.relu(m1);
    let m2 = tape.matmul(m1, mw2)?;
    let prediction = tape.add_row(m2, mb2)?;

    Ok(TracedForward {
        enc1,
        enc2,
        dec1,
        dec2,
        prediction,
    })
}

/// Pure forward pass returning concrete activations.
pub fn denoiser_forward(
    params: &ParamStore,
    cfg: &DenoiserConfig,
    x_t: &DenseMatrix,
    adj_hat: &Rc<SparseAdjacency>,
    t: usize,
) -> Result<ActivationTrace> {
    let mut tape = Tape::new();
    let f = forward_traced(&mut tape, params, cfg, x_t, adj_hat, t)?;
    Ok(ActivationTrace {
        enc1: tape.value(f.enc1).clone(),
        enc2: tape.value(f.enc2).clone(),
        dec1: tape.value(f.dec1).clone(),
        dec2: tape.value(f.dec2).clone(),
        prediction: tape.value(f.prediction).clone(),
    })
}

/// Builds the Eq.-style reconstruction loss `mean((pred - x0)^2)` on a fresh
/// tape; returns the tape and the scalar loss node.
pub fn training_loss(
    params: &ParamStore,
    cfg: &DenoiserConfig,
    x0: &DenseMatrix,
    adj_hat: &Rc<SparseAdjacency>,
    t: usize,
    sched: &crate::diffusion::NoiseSchedule,
    mode: crate::diffusion::NoiseMode,
    stats: &crate::diffusion::BatchStats,
    rng: &mut RngStream,
) -> Result<(Tape, NodeId)> {
    let x_t = crate::diffusion::diffuse_to_step(x0, t, sched, mode, stats, rng)?;
    let mut tape = Tape::new();
    let f = forward_traced(&mut tape, params, cfg, &x_t, adj_hat, t)?;
    let loss = tape.mse(f.prediction, x0)?;
    Ok((tape, loss))
}
