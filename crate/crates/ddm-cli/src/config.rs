//! Run configuration: file parsing (key=value or JSON) plus command-line
//! overrides, overrides winning.

use crate::CliError;
use ddm_core::diffusion::NoiseMode;
use std::path::PathBuf;

pub const VALID_KEYS: &[&str] = &[
    "dataset",
    "out_dir",
    "tag",
    "seed",
    "hidden_dim",
    "time_embed_dim",
    "t_max",
    "beta_start",
    "beta_end",
    "learning_rate",
    "epochs",
    "batch_size",
    "noise_mode",
    "steps",
    "repetitions",
    "reg",
    "checkpoint",
    "representations",
    "refit_w",
    "csv",
    "ablate",
    "kind",
    "n_graphs",
    "nodes_per_class",
    "samples_per_class",
    "boundary_noise_std",
    "checkpoint_steps",
    "ellipse_seeds",
];

const BOOL_KEYS: &[&str] = &["refit_w", "csv", "ablate"];

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub dataset: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub tag: String,
    pub seed: u64,
    pub hidden_dim: usize,
    pub time_embed_dim: usize,
    pub t_max: usize,
    pub beta_start: f64,
    pub beta_end: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub noise_mode: NoiseMode,
    /// Extraction / probe steps; `None` keeps the per-command default.
    pub steps: Option<Vec<usize>>,
    pub repetitions: usize,
    pub reg: f64,
    pub checkpoint: Option<PathBuf>,
    pub representations: Option<PathBuf>,
    pub refit_w: bool,
    pub csv: bool,
    pub ablate: bool,
    pub kind: String,
    pub n_graphs: usize,
    pub nodes_per_class: usize,
    pub samples_per_class: usize,
    pub boundary_noise_std: f64,
    pub checkpoint_steps: Vec<usize>,
    pub ellipse_seeds: Vec<u64>,
}

impl Default for RunConfig {
    fn default() -> RunConfig {
        RunConfig {
            dataset: None,
            out_dir: PathBuf::from("out"),
            tag: "run".into(),
            seed: 0,
            hidden_dim: 64,
            time_embed_dim: 16,
            t_max: 1000,
            beta_start: 1e-4,
            beta_end: 0.02,
            learning_rate: 1e-3,
            epochs: 200,
            batch_size: 32,
            noise_mode: NoiseMode::Directional,
            steps: None,
            repetitions: 1,
            reg: 1e-3,
            checkpoint: None,
            representations: None,
            refit_w: false,
            csv: false,
            ablate: false,
            kind: "benchmark".into(),
            n_graphs: 100,
            nodes_per_class: 200,
            samples_per_class: 500,
            boundary_noise_std: 0.1,
            checkpoint_steps: vec![0, 100, 500, 800, 1000],
            ellipse_seeds: vec![0, 1, 2],
        }
    }
}

fn usage_err(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>, CliError> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<T>()
                .map_err(|_| usage_err(format!("{key}: cannot parse {s:?}")))
        })
        .collect()
}

fn parse_scalar<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .parse::<T>()
        .map_err(|_| usage_err(format!("{key}: cannot parse {value:?}")))
}

impl RunConfig {
    pub fn apply(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        match key {
            "dataset" => self.dataset = Some(PathBuf::from(value)),
            "out_dir" => self.out_dir = PathBuf::from(value),
            "tag" => self.tag = value.to_string(),
            "seed" => self.seed = parse_scalar(key, value)?,
            "hidden_dim" => self.hidden_dim = parse_scalar(key, value)?,
            "time_embed_dim" => self.time_embed_dim = parse_scalar(key, value)?,
            "t_max" => self.t_max = parse_scalar(key, value)?,
            "beta_start" => self.beta_start = parse_scalar(key, value)?,
            "beta_end" => self.beta_end = parse_scalar(key, value)?,
            "learning_rate" => self.learning_rate = parse_scalar(key, value)?,
            "epochs" => self.epochs = parse_scalar(key, value)?,
            "batch_size" => self.batch_size = parse_scalar(key, value)?,
            "noise_mode" => {
                self.noise_mode = value.parse().map_err(|_| {
                    usage_err(format!(
                        "noise_mode: unknown mode {value:?}, expected one of {{directional, aniso_only, white}}"
                    ))
                })?
            }
            "steps" => self.steps = Some(parse_list(key, value)?),
            "repetitions" => self.repetitions = parse_scalar(key, value)?,
            "reg" => self.reg = parse_scalar(key, value)?,
            "checkpoint" => self.checkpoint = Some(PathBuf::from(value)),
            "representations" => self.representations = Some(PathBuf::from(value)),
            "refit_w" => self.refit_w = parse_scalar(key, value)?,
            "csv" => self.csv = parse_scalar(key, value)?,
            "ablate" => self.ablate = parse_scalar(key, value)?,
            "kind" => self.kind = value.to_string(),
            "n_graphs" => self.n_graphs = parse_scalar(key, value)?,
            "nodes_per_class" => self.nodes_per_class = parse_scalar(key, value)?,
            "samples_per_class" => self.samples_per_class = parse_scalar(key, value)?,
            "boundary_noise_std" => self.boundary_noise_std = parse_scalar(key, value)?,
            "checkpoint_steps" => self.checkpoint_steps = parse_list(key, value)?,
            "ellipse_seeds" => self.ellipse_seeds = parse_list(key, value)?,
            other => {
                return Err(usage_err(format!(
                    "unknown key {other:?}; valid keys: {}",
                    VALID_KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    pub fn load_file(&mut self, path: &str) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| usage_err(format!("cannot read config {path}: {e}")))?;
        let trimmed = text.trim_start();
        if trimmed.starts_with('{') {
            let map: serde_json::Map<String, serde_json::Value> = serde_json::from_str(&text)
                .map_err(|e| usage_err(format!("config {path}: invalid JSON: {e}")))?;
            for (key, value) in &map {
                let value = match value {
                    serde_json::Value::String(s) => s.clone(),
                    serde_json::Value::Array(items) => items
                        .iter()
                        .map(|v| match v {
                            serde_json::Value::String(s) => s.clone(),
                            other => other.to_string(),
                        })
                        .collect::<Vec<_>>()
                        .join(","),
                    other => other.to_string(),
                };
                self.apply(key, &value)?;
            }
        } else {
            for (ln, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (key, value) = line.split_once('=').ok_or_else(|| {
                    usage_err(format!("config {path}:{}: expected key=value", ln + 1))
                })?;
                self.apply(key.trim(), value.trim())?;
            }
        }
        Ok(())
    }

    /// Extraction steps with a per-command default.
    pub fn steps_or(&self, default: &[usize]) -> Vec<usize> {
        self.steps.clone().unwrap_or_else(|| default.to_vec())
    }

    pub fn require_dataset(&self) -> Result<&PathBuf, CliError> {
        self.dataset
            .as_ref()
            .ok_or_else(|| usage_err("this command needs --dataset <dir>"))
    }
}

/// Parses `[--config path] [--key value ...]`; bare boolean flags are
/// accepted for refit_w / csv / ablate.
pub fn parse_config(args: &[String]) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::default();
    // config file first so overrides win regardless of position
    let mut i = 0;
    let mut overrides: Vec<(String, String)> = Vec::new();
    while i < args.len() {
        let arg = &args[i];
        let key = arg
            .strip_prefix("--")
            .ok_or_else(|| usage_err(format!("expected --key value, found {arg:?}")))?;
        let value = args.get(i + 1);
        let bare_bool = BOOL_KEYS.contains(&key)
            && value.map(|v| v.starts_with("--")).unwrap_or(true);
        if bare_bool {
            overrides.push((key.to_string(), "true".into()));
            i += 1;
        } else {
            let value =
                value.ok_or_else(|| usage_err(format!("--{key} needs a value")))?;
            if key == "config" {
                cfg.load_file(value)?;
            } else {
                overrides.push((key.to_string(), value.clone()));
            }
            i += 2;
        }
    }
    for (key, value) in &overrides {
        cfg.apply(key, value)?;
    }
    if let Ok(seed) = std::env::var("DDM_SEED") {
        cfg.seed = seed
            .parse()
            .map_err(|_| usage_err(format!("DDM_SEED: cannot parse {seed:?} as u64")))?;
    }
    Ok(cfg)
}
