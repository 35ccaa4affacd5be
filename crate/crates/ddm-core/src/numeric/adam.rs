//! Adam optimizer with bias correction.

use crate::error::{Error, Result};
use crate::numeric::matrix::DenseMatrix;
use crate::numeric::tape::ParamStore;
use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

#[derive(Debug)]
pub struct AdamState {
    cfg: AdamConfig,
    first_moment: IndexMap<String, DenseMatrix>,
    second_moment: IndexMap<String, DenseMatrix>,
    step: u64,
}

impl AdamState {
    pub fn new(cfg: AdamConfig) -> Self {
        AdamState {
            cfg,
            first_moment: IndexMap::new(),
            second_moment: IndexMap::new(),
            step: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// One Adam update over every slot. Requires a preceding backward pass.
    pub fn step(&mut self, params: &mut ParamStore) -> Result<()> {
        if !params.grads_ready() {
            return Err(Error::Contract(
                "adam_step called before any backward pass populated gradients".into(),
            ));
        }
        self.step += 1;
        let t = self.step as i32;
        let b1 = self.cfg.beta1;
        let b2 = self.cfg.beta2;
        let bc1 = 1.0 - b1.powi(t);
        let bc2 = 1.0 - b2.powi(t);
        let lr = self.cfg.learning_rate;
        let eps = self.cfg.epsilon;

        for (name, slot) in params.iter_mut() {
            let (rows, cols) = slot.value.shape();
            let m = self
                .first_moment
                .entry(name.to_string())
                .or_insert_with(|| DenseMatrix::zeros(rows, cols));
            let v = self
                .second_moment
                .entry(name.to_string())
                .or_insert_with(|| DenseMatrix::zeros(rows, cols));
            if m.shape() != (rows, cols) {
                return Err(Error::Dimension {
                    op: "adam_step",
                    expected: format!("{rows}x{cols}"),
                    actual: format!("{}x{}", m.rows(), m.cols()),
                });
            }
            let g = slot.grad.values();
            let mv = m.values_mut();
            let vv = v.values_mut();
            let pv = slot.value.values_mut();
            for i in 0..g.len() {
                mv[i] = b1 * mv[i] + (1.0 - b1) * g[i];
                vv[i] = b2 * vv[i] + (1.0 - b2) * g[i] * g[i];
                let m_hat = mv[i] / bc1;
                let v_hat = vv[i] / bc2;
                pv[i] -= lr * m_hat / (v_hat.sqrt() + eps);
            }
            slot.value.check_finite("adam_step")?;
        }
        Ok(())
    }
}
