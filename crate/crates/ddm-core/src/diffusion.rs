//! Forward diffusion: variance schedule, per-batch feature statistics, and
//! the three noise modes (directional, anisotropic-only, white).
//!
//! Directional noise constrains the raw Gaussian draw in two stages: first it
//! is rescaled to the per-coordinate batch mean/std, then its sign pattern is
//! rotated onto the sign pattern of the clean features, so diffused entries
//! never cross into the opposite orthant of their clean value.

use crate::error::{Error, Result};
use crate::numeric::{DenseMatrix, RngStream};
use serde::{Deserialize, Serialize};

/// Floor applied to per-coordinate standard deviations.
pub const SIGMA_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseMode {
    /// Batch-statistics rescaling plus sign rotation.
    Directional,
    /// Batch-statistics rescaling only ("w/o R").
    AnisoOnly,
    /// Plain isotropic Gaussian noise ("w/o S&R").
    White,
}

impl NoiseMode {
    pub const ALL: [NoiseMode; 3] = [NoiseMode::Directional, NoiseMode::AnisoOnly, NoiseMode::White];

    pub fn tag(&self) -> &'static str {
        match self {
            NoiseMode::Directional => "directional",
            NoiseMode::AnisoOnly => "aniso_only",
            NoiseMode::White => "white",
        }
    }
}

impl std::str::FromStr for NoiseMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "directional" => Ok(NoiseMode::Directional),
            "aniso_only" => Ok(NoiseMode::AnisoOnly),
            "white" => Ok(NoiseMode::White),
            other => Err(Error::Contract(format!(
                "unknown noise mode {other:?}, expected one of {{directional, aniso_only, white}}"
            ))),
        }
    }
}

/// Variance schedule `beta_1..beta_T` with cumulative products
/// `alpha_bar_t = prod_{i<=t} (1 - beta_i)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NoiseSchedule {
    beta: Vec<f64>,
    alpha_bar: Vec<f64>,
}

impl NoiseSchedule {
    /// Linear interpolation from `beta_start` to `beta_end` over `t_max` steps.
    pub fn linear(t_max: usize, beta_start: f64, beta_end: f64) -> Result<Self> {
        if t_max < 1 {
            return Err(Error::Contract("schedule needs T >= 1".into()));
        }
        if !(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0) {
            return Err(Error::Contract(format!(
                "schedule bounds must satisfy 0 < beta_start <= beta_end < 1, got {beta_start}, {beta_end}"
            )));
        }
        let beta: Vec<f64> = (0..t_max)
            .map(|i| {
                if t_max == 1 {
                    beta_start
                } else {
                    beta_start + (beta_end - beta_start) * i as f64 / (t_max - 1) as f64
                }
            })
            .collect();
        let mut alpha_bar = Vec::with_capacity(t_max);
        let mut prod = 1.0;
        for b in &beta {
            prod *= 1.0 - b;
            alpha_bar.push(prod);
        }
        Ok(NoiseSchedule { beta, alpha_bar })
    }

    pub fn t_max(&self) -> usize {
        self.beta.len()
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    /// `alpha_bar` at step `t`, with the t = 0 convention `alpha_bar_0 = 1`.
    pub fn alpha_bar(&self, t: usize) -> Result<f64> {
        if t == 0 {
            return Ok(1.0);
        }
        self.alpha_bar
            .get(t - 1)
            .copied()
            .ok_or_else(|| Error::Contract(format!("step {t} out of range 0..={}", self.t_max())))
    }
}

/// Per-coordinate mean and (floored) population standard deviation over the
/// nodes of a batch.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchStats {
    pub mu: Vec<f64>,
    pub sigma: Vec<f64>,
}

pub fn compute_batch_stats(x: &DenseMatrix) -> Result<BatchStats> {
    if x.rows() == 0 {
        return Err(Error::Contract("batch stats need at least one row".into()));
    }
    let d = x.cols();
    let n = x.rows() as f64;
    let mut mu = vec![0.0; d];
    for r in 0..x.rows() {
        for (c, m) in mu.iter_mut().enumerate() {
            *m += x.get(r, c);
        }
    }
    for m in &mut mu {
        *m /= n;
    }
    let mut sigma = vec![0.0; d];
    for r in 0..x.rows() {
        for (c, s) in sigma.iter_mut().enumerate() {
            let dlt = x.get(r, c) - mu[c];
            *s += dlt * dlt;
        }
    }
    for s in &mut sigma {
        *s = (*s / n).sqrt().max(SIGMA_FLOOR);
    }
    Ok(BatchStats { mu, sigma })
}

/// Sign with the sgn(0) := +1 convention used by the directional noise.
#[inline]
pub fn sign_plus(v: f64) -> f64 {
    // sgn(0) := +1 keeps noise alive on zero-valued features
    if v < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// One noise draw per node and coordinate, constrained per `mode`.
pub fn sample_noise(
    mode: NoiseMode,
    x0: &DenseMatrix,
    stats: &BatchStats,
    rng: &mut RngStream,
) -> Result<DenseMatrix> {
    if stats.mu.len() != x0.cols() {
        return Err(Error::Dimension {
            op: "sample_noise",
            expected: format!("{} coordinates", x0.cols()),
            actual: format!("{} coordinates", stats.mu.len()),
        });
    }
    let raw = rng.gaussian(x0.rows(), x0.cols())?;
    match mode {
        NoiseMode::White => Ok(raw),
        NoiseMode::AnisoOnly => {
            let mut out = raw;
            for r in 0..out.rows() {
                for c in 0..out.cols() {
                    out.set(r, c, stats.mu[c] + stats.sigma[c] * out.get(r, c));
                }
            }
            out.check_finite("sample_noise")?;
            Ok(out)
        }
        NoiseMode::Directional => {
            let mut out = raw;
            for r in 0..out.rows() {
                for c in 0..out.cols() {
                    let rescaled = stats.mu[c] + stats.sigma[c] * out.get(r, c);
                    out.set(r, c, sign_plus(x0.get(r, c)) * rescaled.abs());
                }
            }
            out.check_finite("sample_noise")?;
            Ok(out)
        }
    }
}

/// Closed-form jump to step `t`:
/// `x_t = sqrt(alpha_bar_t) * x0 + sqrt(1 - alpha_bar_t) * noise`.
pub fn diffuse_to_step(
    x0: &DenseMatrix,
    t: usize,
    sched: &NoiseSchedule,
    mode: NoiseMode,
    stats: &BatchStats,
    rng: &mut RngStream,
) -> Result<DenseMatrix> {
    let ab = sched.alpha_bar(t)?;
    if t == 0 {
        return Ok(x0.clone());
    }
    let noise = sample_noise(mode, x0, stats, rng)?;
    let signal = ab.sqrt();
    let noise_scale = (1.0 - ab).sqrt();
    let mut out = x0.scale(signal);
    for (o, n) in out.values_mut().iter_mut().zip(noise.values()) {
        *o += noise_scale * n;
    }
    out.check_finite("diffuse_to_step")?;
    Ok(out)
}
