//! Two-ellipse noise simulation: how long does a linear decision boundary
//! survive under each forward-noise mode?

use crate::diffusion::{compute_batch_stats, diffuse_to_step, NoiseMode, NoiseSchedule};
use crate::error::{Error, Result};
use crate::eval::logistic;
use crate::numeric::{DenseMatrix, RngStream};
use std::fs::File;
use std::io::Write;
use std::path::Path;

#[derive(Debug, Clone)]
pub struct EllipseSimConfig {
    pub samples_per_class: usize,
    pub centers: [(f64, f64); 2],
    /// (major, minor); the major axis runs along the local y axis before
    /// rotation, so the default clouds stay inside |x| < 2.
    pub semi_axes: (f64, f64),
    /// Per-class rotation in degrees, counterclockwise.
    pub rotations_deg: (f64, f64),
    pub boundary_noise_std: f64,
    pub checkpoint_steps: Vec<usize>,
    pub seeds: Vec<u64>,
}

impl Default for EllipseSimConfig {
    fn default() -> EllipseSimConfig {
        EllipseSimConfig {
            samples_per_class: 500,
            centers: [(-2.0, 0.0), (2.0, 0.0)],
            semi_axes: (3.0, 1.0),
            rotations_deg: (-30.0, 30.0),
            boundary_noise_std: 0.1,
            checkpoint_steps: vec![0, 100, 500, 800, 1000],
            seeds: vec![0, 1, 2],
        }
    }
}

impl EllipseSimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples_per_class < 2 {
            return Err(Error::Contract("samples_per_class must be >= 2".into()));
        }
        if self.checkpoint_steps.is_empty() || self.seeds.is_empty() {
            return Err(Error::Contract(
                "checkpoint_steps and seeds must be nonempty".into(),
            ));
        }
        if self.boundary_noise_std < 0.0 {
            return Err(Error::Contract("boundary_noise_std must be >= 0".into()));
        }
        Ok(())
    }
}

/// Point clouds for the first seed, one per (mode, step).
#[derive(Debug, Clone)]
pub struct EllipseCloud {
    pub mode: NoiseMode,
    pub step: usize,
    pub points: DenseMatrix,
    pub labels: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct EllipseScore {
    pub mode: NoiseMode,
    pub step: usize,
    /// Accuracy of the t=0-trained linear classifier on the diffused
    /// points, averaged over seeds.
    pub separability: f64,
}

#[derive(Debug, Clone)]
pub struct EllipseSimResult {
    pub clouds: Vec<EllipseCloud>,
    pub scores: Vec<EllipseScore>,
}

fn sample_clouds(cfg: &EllipseSimConfig, rng: &mut RngStream) -> (DenseMatrix, Vec<usize>) {
    let n = 2 * cfg.samples_per_class;
    let mut points = DenseMatrix::zeros(n, 2);
    let mut labels = Vec::with_capacity(n);
    let (major, minor) = cfg.semi_axes;
    let rotations = [cfg.rotations_deg.0, cfg.rotations_deg.1];
    let mut row = 0;
    for class in 0..2 {
        let (cx, cy) = cfg.centers[class];
        let phi = rotations[class].to_radians();
        let (sin_phi, cos_phi) = phi.sin_cos();
        for _ in 0..cfg.samples_per_class {
            let theta = 2.0 * std::f64::consts::PI * rng.uniform();
            let u = minor * theta.cos();
            let v = major * theta.sin();
            let x = cx + u * cos_phi - v * sin_phi + cfg.boundary_noise_std * rng.standard_normal();
            let y = cy + u * sin_phi + v * cos_phi + cfg.boundary_noise_std * rng.standard_normal();
            points.set(row, 0, x);
            points.set(row, 1, y);
            labels.push(class);
            row += 1;
        }
    }
    (points, labels)
}

/// For each seed: sample both clouds, fit a linear classifier on the clean
/// points, then score it on the diffused points at every checkpoint step
/// under every mode. Scores average over seeds; clouds come from the first
/// seed.
pub fn simulate_two_ellipses(
    cfg: &EllipseSimConfig,
    modes: &[NoiseMode],
    sched: &NoiseSchedule,
) -> Result<EllipseSimResult> {
    cfg.validate()?;
    if modes.is_empty() {
        return Err(Error::Contract("at least one noise mode required".into()));
    }
    let mut steps = cfg.checkpoint_steps.clone();
    steps.sort_unstable();
    steps.dedup();
    if let Some(&last) = steps.last() {
        if last > sched.t_max() {
            return Err(Error::Contract(format!(
                "checkpoint step {last} beyond schedule t_max {}",
                sched.t_max()
            )));
        }
    }

    let mut clouds = Vec::new();
    let mut score_acc = vec![vec![0.0f64; steps.len()]; modes.len()];
    for (si, &seed) in cfg.seeds.iter().enumerate() {
        let root = RngStream::new(seed);
        let (x0, labels) = sample_clouds(cfg, &mut root.split(0));
        let stats = compute_batch_stats(&x0)?;
        let model = logistic::fit(&x0, &labels, 2, 1e-3, &mut root.split(1))?;
        for (mi, &mode) in modes.iter().enumerate() {
            for (ti, &t) in steps.iter().enumerate() {
                let mut noise_rng = root.split(2).split(mi as u64).split(ti as u64);
                let x_t = diffuse_to_step(&x0, t, sched, mode, &stats, &mut noise_rng)?;
                let acc = model.accuracy(&x_t, &labels)?;
                score_acc[mi][ti] += acc;
                if si == 0 {
                    clouds.push(EllipseCloud {
                        mode,
                        step: t,
                        points: x_t,
                        labels: labels.clone(),
                    });
                }
            }
        }
    }
    let n_seeds = cfg.seeds.len() as f64;
    let mut scores = Vec::new();
    for (mi, &mode) in modes.iter().enumerate() {
        for (ti, &t) in steps.iter().enumerate() {
            scores.push(EllipseScore {
                mode,
                step: t,
                separability: score_acc[mi][ti] / n_seeds,
            });
        }
    }
    Ok(EllipseSimResult { clouds, scores })
}

impl EllipseSimResult {
    /// Rows `mode,step,point_id,x,y,label`.
    pub fn write_clouds_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::from("mode,step,point_id,x,y,label\n");
        for cloud in &self.clouds {
            for (i, &l) in cloud.labels.iter().enumerate() {
                out.push_str(&format!(
                    "{},{},{i},{},{},{l}\n",
                    cloud.mode.tag(),
                    cloud.step,
                    cloud.points.get(i, 0),
                    cloud.points.get(i, 1)
                ));
            }
        }
        write_text(path, &out)
    }

    /// Rows `mode,step,separability`.
    pub fn write_scores_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::from("mode,step,separability\n");
        for s in &self.scores {
            out.push_str(&format!("{},{},{}\n", s.mode.tag(), s.step, s.separability));
        }
        write_text(path, &out)
    }

    pub fn score(&self, mode: NoiseMode, step: usize) -> Option<f64> {
        self.scores
            .iter()
            .find(|s| s.mode == mode && s.step == step)
            .map(|s| s.separability)
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    f.write_all(text.as_bytes())
        .map_err(|e| Error::io(path.display().to_string(), e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffusion::sign_plus;

    fn quick_cfg() -> EllipseSimConfig {
        EllipseSimConfig {
            samples_per_class: 100,
            seeds: vec![0],
            ..EllipseSimConfig::default()
        }
    }

    fn default_schedule() -> NoiseSchedule {
        NoiseSchedule::linear(1000, 1e-4, 0.02).unwrap()
    }

    #[test]
    fn clean_step_is_fully_separable() {
        let cfg = EllipseSimConfig {
            centers: [(-4.0, 0.0), (4.0, 0.0)],
            boundary_noise_std: 0.01,
            checkpoint_steps: vec![0],
            ..quick_cfg()
        };
        let result =
            simulate_two_ellipses(&cfg, &[NoiseMode::White], &default_schedule()).unwrap();
        assert_eq!(result.score(NoiseMode::White, 0), Some(1.0));
    }

    #[test]
    fn directional_clouds_preserve_quadrant_signs() {
        let cfg = quick_cfg();
        let result =
            simulate_two_ellipses(&cfg, &[NoiseMode::Directional], &default_schedule()).unwrap();
        let base = result
            .clouds
            .iter()
            .find(|c| c.step == 0)
            .expect("step 0 cloud present");
        for cloud in &result.clouds {
            for i in 0..cloud.points.rows() {
                for c in 0..2 {
                    let x0 = base.points.get(i, c);
                    let xt = cloud.points.get(i, c);
                    if x0 != 0.0 && xt != 0.0 {
                        assert_eq!(
                            sign_plus(x0),
                            sign_plus(xt),
                            "sign flip at point {i} coord {c} step {}",
                            cloud.step
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn directional_outlasts_white_at_final_step() {
        let cfg = quick_cfg();
        let result = simulate_two_ellipses(
            &cfg,
            &[NoiseMode::White, NoiseMode::Directional],
            &default_schedule(),
        )
        .unwrap();
        let white = result.score(NoiseMode::White, 1000).unwrap();
        let dir = result.score(NoiseMode::Directional, 1000).unwrap();
        assert!(white <= 0.7, "white separability {white} at t=1000");
        assert!(dir >= 0.9, "directional separability {dir} at t=1000");
    }

    #[test]
    fn degenerate_config_rejected() {
        let cfg = EllipseSimConfig {
            samples_per_class: 1,
            ..EllipseSimConfig::default()
        };
        assert!(simulate_two_ellipses(&cfg, &[NoiseMode::White], &default_schedule()).is_err());
    }
}
