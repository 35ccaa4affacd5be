//! Fisher SNR along the forward diffusion process.

use crate::diffusion::{compute_batch_stats, diffuse_to_step, NoiseMode, NoiseSchedule};
use crate::error::{Error, Result};
use crate::graph::{sequential_batches, Dataset, Task};
use crate::numeric::RngStream;
use crate::probes::extractor::ProbeExtractor;
use crate::probes::fisher::{fisher_fit, scatter_matrices, snr_along};
use std::fs::File;
use std::io::Write;
use std::path::Path;

#[derive(Debug, Clone)]
pub struct SnrCurve {
    pub mode: NoiseMode,
    pub steps: Vec<usize>,
    pub snr: Vec<f64>,
}

impl SnrCurve {
    /// Trapezoidal area under the curve over the step axis.
    pub fn area(&self) -> f64 {
        self.steps
            .windows(2)
            .zip(self.snr.windows(2))
            .map(|(s, v)| (s[1] - s[0]) as f64 * 0.5 * (v[0] + v[1]))
            .sum()
    }
}

/// Diffuses the node features to each step, embeds them through the probe
/// extractor, and reports the Fisher quotient. The discriminant direction
/// is fit once on the clean embeddings and held fixed unless `refit_w`.
pub fn snr_curve(
    extractor: &ProbeExtractor,
    ds: &Dataset,
    sched: &NoiseSchedule,
    mode: NoiseMode,
    steps: &[usize],
    refit_w: bool,
    rng: &RngStream,
) -> Result<SnrCurve> {
    if ds.task != Task::Node {
        return Err(Error::Contract("snr_curve needs a node-level dataset".into()));
    }
    if steps.is_empty() {
        return Err(Error::Contract("snr_curve needs at least one step".into()));
    }
    if steps.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Contract("snr_curve steps must be strictly increasing".into()));
    }
    if let Some(&last) = steps.last() {
        if last > sched.t_max() {
            return Err(Error::Contract(format!(
                "step {last} beyond schedule t_max {}",
                sched.t_max()
            )));
        }
    }
    let labels: Vec<usize> = {
        let mut all = Vec::new();
        for g in &ds.graphs {
            let per = g
                .node_labels
                .as_ref()
                .ok_or_else(|| Error::Contract("snr_curve needs node labels".into()))?;
            all.extend_from_slice(per);
        }
        all
    };
    let batch = sequential_batches(ds, 1)?.remove(0);
    let adj_hat = batch.adjacency.normalize()?;
    let stats = compute_batch_stats(&batch.features)?;

    let h0 = extractor.hidden(&batch.features, &adj_hat)?;
    let baseline = fisher_fit(&h0, &labels)?;

    let mut snr = Vec::with_capacity(steps.len());
    for (i, &t) in steps.iter().enumerate() {
        let mut step_rng = rng.split(i as u64);
        let x_t = diffuse_to_step(&batch.features, t, sched, mode, &stats, &mut step_rng)?;
        let h_t = extractor.hidden(&x_t, &adj_hat)?;
        let value = if refit_w {
            fisher_fit(&h_t, &labels)?.snr()
        } else {
            let (s_b, s_w) = scatter_matrices(&h_t, &labels)?;
            snr_along(&baseline.w, &s_b, &s_w)
        };
        if !value.is_finite() {
            return Err(Error::Numeric(format!("non-finite SNR at step {t}")));
        }
        snr.push(value.max(0.0));
    }
    Ok(SnrCurve {
        mode,
        steps: steps.to_vec(),
        snr,
    })
}

/// Rows `mode,step,snr`, one block per curve.
pub fn write_snr_csv(path: &Path, curves: &[SnrCurve]) -> Result<()> {
    let mut out = String::from("mode,step,snr\n");
    for curve in curves {
        for (&t, &v) in curve.steps.iter().zip(&curve.snr) {
            out.push_str(&format!("{},{t},{v}\n", curve.mode.tag()));
        }
    }
    let mut f = File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    f.write_all(out.as_bytes())
        .map_err(|e| Error::io(path.display().to_string(), e))
}
