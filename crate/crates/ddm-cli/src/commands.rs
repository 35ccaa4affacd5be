//! Subcommand implementations. Every command writes into
//! `<out_dir>/<command>/<tag>/` and prints the artifact paths it produced.

use crate::config::RunConfig;
use crate::CliError;
use ddm_core::denoiser::{
    load_checkpoint, read_store, save_checkpoint, train, write_store, DenoiserConfig,
};
use ddm_core::diffusion::{NoiseMode, NoiseSchedule};
use ddm_core::eval::{
    evaluate_graph_task, evaluate_node_task, extract_node_representations, EvalReport,
    RepresentationSet,
};
use ddm_core::graph::{load_dataset, write_dataset, Dataset, Task};
use ddm_core::numeric::{DenseMatrix, RngStream};
use ddm_core::probes::{
    simulate_two_ellipses, snr_curve, svd_project_2d, train_probe_extractor, write_projection_csv,
    write_snr_csv, EllipseSimConfig, ProbeConfig,
};
use ddm_core::synthetic::{anisotropic_node_dataset, benchmark_graph_dataset};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

const EXTRACT_STEP_DEFAULT: &[usize] = &[50, 100, 200];
const SNR_STEP_DEFAULT: &[usize] = &[0, 25, 50, 100, 200, 350, 500, 750, 1000];

#[derive(Serialize, Deserialize)]
struct RepHeader {
    kind: String,
    steps: Vec<usize>,
    config: DenoiserConfig,
}

fn out_dir(cfg: &RunConfig, command: &str) -> Result<PathBuf, CliError> {
    let dir = cfg.out_dir.join(command).join(&cfg.tag);
    std::fs::create_dir_all(&dir)
        .map_err(|e| CliError::Usage(format!("cannot create {}: {e}", dir.display())))?;
    Ok(dir)
}

fn load(cfg: &RunConfig) -> Result<Dataset, CliError> {
    Ok(load_dataset(cfg.require_dataset()?)?)
}

fn denoiser_config(cfg: &RunConfig, input_dim: usize) -> DenoiserConfig {
    DenoiserConfig {
        input_dim,
        hidden_dim: cfg.hidden_dim,
        time_embed_dim: cfg.time_embed_dim,
        t_max: cfg.t_max,
        beta_start: cfg.beta_start,
        beta_end: cfg.beta_end,
        learning_rate: cfg.learning_rate,
        epochs: cfg.epochs,
        batch_size: cfg.batch_size,
        noise_mode: cfg.noise_mode,
        seed: cfg.seed,
    }
}

fn schedule(cfg: &DenoiserConfig) -> Result<NoiseSchedule, CliError> {
    Ok(NoiseSchedule::linear(cfg.t_max, cfg.beta_start, cfg.beta_end)?)
}

fn wrote(path: &Path) {
    println!("wrote {}", path.display());
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text)
        .map_err(|e| CliError::Core(ddm_core::Error::io(path.display().to_string(), e)))?;
    wrote(path);
    Ok(())
}

pub fn cmd_train(cfg: &RunConfig) -> Result<(), CliError> {
    let ds = load(cfg)?;
    let dcfg = denoiser_config(cfg, ds.feature_dim);
    let (params, log) = train(&ds, &dcfg)?;
    let dir = out_dir(cfg, "train")?;

    let ckpt = dir.join("checkpoint.ddm");
    save_checkpoint(&params, &dcfg, &ckpt)?;
    wrote(&ckpt);

    let mut csv = String::from("epoch,loss\n");
    for (epoch, loss) in log.epoch_loss.iter().enumerate() {
        csv.push_str(&format!("{epoch},{loss}\n"));
    }
    write_text(&dir.join("loss_log.csv"), &csv)
}

fn require_checkpoint(cfg: &RunConfig) -> Result<&PathBuf, CliError> {
    let path = cfg
        .checkpoint
        .as_ref()
        .ok_or_else(|| CliError::Usage("this command needs --checkpoint <file>".into()))?;
    if !path.is_file() {
        return Err(CliError::Usage(format!(
            "checkpoint {} does not exist",
            path.display()
        )));
    }
    Ok(path)
}

fn extract_reps(cfg: &RunConfig, ds: &Dataset) -> Result<(RepresentationSet, DenoiserConfig), CliError> {
    let (params, dcfg) = load_checkpoint(require_checkpoint(cfg)?)?;
    let sched = schedule(&dcfg)?;
    let steps = cfg.steps_or(EXTRACT_STEP_DEFAULT);
    let reps = extract_node_representations(
        &params,
        &dcfg,
        ds,
        &steps,
        &sched,
        dcfg.noise_mode,
        &RngStream::new(cfg.seed),
    )?;
    Ok((reps, dcfg))
}

pub fn cmd_extract(cfg: &RunConfig) -> Result<(), CliError> {
    let ds = load(cfg)?;
    let (reps, dcfg) = extract_reps(cfg, &ds)?;
    let dir = out_dir(cfg, "extract")?;

    let header = serde_json::to_string(&RepHeader {
        kind: "representations".into(),
        steps: reps.steps.clone(),
        config: dcfg,
    })
    .expect("header serializes");
    let map_matrix = DenseMatrix::from_vec(
        reps.node_to_graph.len(),
        1,
        reps.node_to_graph.iter().map(|&g| g as f64).collect(),
    )?;
    let mut slots: Vec<(String, &DenseMatrix)> = reps
        .steps
        .iter()
        .zip(&reps.reps)
        .map(|(&k, m)| (format!("step_{k}"), m))
        .collect();
    slots.push(("node_to_graph".into(), &map_matrix));
    let path = dir.join("representations.ddm");
    write_store(&path, &header, &slots)?;
    wrote(&path);

    if cfg.csv {
        let mut csv = String::from("step,node,graph,values\n");
        for (si, &k) in reps.steps.iter().enumerate() {
            let m = &reps.reps[si];
            for r in 0..m.rows() {
                let values: Vec<String> = m.row(r).iter().map(|v| v.to_string()).collect();
                csv.push_str(&format!(
                    "{k},{r},{},{}\n",
                    reps.node_to_graph[r],
                    values.join(";")
                ));
            }
        }
        write_text(&dir.join("representations.csv"), &csv)?;
    }
    Ok(())
}

fn read_reps(path: &Path) -> Result<RepresentationSet, CliError> {
    if !path.is_file() {
        return Err(CliError::Usage(format!(
            "representations {} do not exist",
            path.display()
        )));
    }
    let (header, matrices) = read_store(path)?;
    let header: RepHeader = serde_json::from_str(&header).map_err(|e| {
        CliError::Core(ddm_core::Error::Checkpoint(format!(
            "{}: bad header: {e}",
            path.display()
        )))
    })?;
    if header.kind != "representations" {
        return Err(CliError::Core(ddm_core::Error::Checkpoint(format!(
            "{}: expected a representations file, found kind {:?}",
            path.display(),
            header.kind
        ))));
    }
    let mut reps = Vec::new();
    let mut node_to_graph = Vec::new();
    for (name, matrix) in matrices {
        if name == "node_to_graph" {
            node_to_graph = matrix.values().iter().map(|&v| v as usize).collect();
        } else {
            reps.push(matrix);
        }
    }
    if reps.len() != header.steps.len() {
        return Err(CliError::Core(ddm_core::Error::Checkpoint(format!(
            "{}: {} step slots for {} steps",
            path.display(),
            reps.len(),
            header.steps.len()
        ))));
    }
    Ok(RepresentationSet {
        steps: header.steps,
        reps,
        node_to_graph,
    })
}

fn evaluate(ds: &Dataset, reps: &RepresentationSet, cfg: &RunConfig) -> Result<EvalReport, CliError> {
    let rng = RngStream::new(cfg.seed);
    Ok(match ds.task {
        Task::Graph => evaluate_graph_task(ds, reps, cfg.repetitions, cfg.reg, &rng)?,
        Task::Node => evaluate_node_task(ds, reps, &rng)?,
    })
}

pub fn cmd_eval(cfg: &RunConfig) -> Result<(), CliError> {
    let ds = load(cfg)?;
    let dir = out_dir(cfg, "eval")?;
    if cfg.ablate {
        return ablate(cfg, &ds, &dir);
    }
    let reps_path = cfg
        .representations
        .as_ref()
        .ok_or_else(|| CliError::Usage("eval needs --representations <file> (or --ablate)".into()))?;
    let reps = read_reps(reps_path)?;
    let report = evaluate(&ds, &reps, cfg)?;
    let csv = dir.join("report.csv");
    report.write_csv(&csv)?;
    wrote(&csv);
    let json = dir.join("report.json");
    report.write_json(&json)?;
    wrote(&json);
    Ok(())
}

/// Trains, extracts, and evaluates under every noise mode, emitting a
/// comparison table.
fn ablate(cfg: &RunConfig, ds: &Dataset, dir: &Path) -> Result<(), CliError> {
    let mut table = String::from("mode,voted_accuracy,voted_std\n");
    println!("mode            voted accuracy");
    for &mode in &NoiseMode::ALL {
        let dcfg = DenoiserConfig {
            noise_mode: mode,
            ..denoiser_config(cfg, ds.feature_dim)
        };
        let (params, _) = train(ds, &dcfg)?;
        let sched = schedule(&dcfg)?;
        let steps = cfg.steps_or(EXTRACT_STEP_DEFAULT);
        let reps = extract_node_representations(
            &params,
            &dcfg,
            ds,
            &steps,
            &sched,
            mode,
            &RngStream::new(cfg.seed),
        )?;
        let report = evaluate(ds, &reps, cfg)?;
        table.push_str(&format!(
            "{},{},{}\n",
            mode.tag(),
            report.voted_accuracy,
            report.voted_std
        ));
        println!("{:<15} {:.4}", mode.tag(), report.voted_accuracy);
    }
    write_text(&dir.join("ablation.csv"), &table)
}

pub fn cmd_snr(cfg: &RunConfig) -> Result<(), CliError> {
    let ds = load(cfg)?;
    let dir = out_dir(cfg, "snr")?;
    let probe_cfg = ProbeConfig {
        seed: cfg.seed,
        ..ProbeConfig::new(ds.feature_dim, ds.num_classes)
    };
    let extractor = train_probe_extractor(&ds, &probe_cfg)?;
    let dcfg = denoiser_config(cfg, ds.feature_dim);
    let sched = schedule(&dcfg)?;
    let steps = cfg.steps_or(SNR_STEP_DEFAULT);
    let rng = RngStream::new(cfg.seed);
    let mut curves = Vec::new();
    for &mode in &NoiseMode::ALL {
        curves.push(snr_curve(
            &extractor, &ds, &sched, mode, &steps, cfg.refit_w, &rng,
        )?);
    }
    let path = dir.join("snr_curve.csv");
    write_snr_csv(&path, &curves)?;
    wrote(&path);
    Ok(())
}

pub fn cmd_svdviz(cfg: &RunConfig) -> Result<(), CliError> {
    let ds = load(cfg)?;
    let dir = out_dir(cfg, "svdviz")?;
    let total = ds.total_nodes();
    let mut stacked = DenseMatrix::zeros(total, ds.feature_dim);
    let mut labels = Vec::with_capacity(total);
    let mut row = 0;
    for g in &ds.graphs {
        for r in 0..g.node_count {
            stacked.row_mut(row).copy_from_slice(g.features.row(r));
            let label = g
                .node_labels
                .as_ref()
                .map(|l| l[r])
                .or(g.graph_label)
                .unwrap_or(0);
            labels.push(label);
            row += 1;
        }
    }
    let proj = svd_project_2d(&stacked)?;
    eprintln!(
        "singular values: {:?}",
        &proj.singular_values[..proj.singular_values.len().min(8)]
    );
    let path = dir.join("svd_projection.csv");
    write_projection_csv(&path, &proj, &labels)?;
    wrote(&path);
    Ok(())
}

pub fn cmd_ellipse(cfg: &RunConfig) -> Result<(), CliError> {
    let dir = out_dir(cfg, "ellipse")?;
    let sim_cfg = EllipseSimConfig {
        samples_per_class: cfg.samples_per_class,
        boundary_noise_std: cfg.boundary_noise_std,
        checkpoint_steps: cfg.checkpoint_steps.clone(),
        seeds: cfg.ellipse_seeds.clone(),
        ..EllipseSimConfig::default()
    };
    let sched = NoiseSchedule::linear(cfg.t_max, cfg.beta_start, cfg.beta_end)?;
    let result = simulate_two_ellipses(&sim_cfg, &NoiseMode::ALL, &sched)?;
    let clouds = dir.join("ellipse_sim.csv");
    result.write_clouds_csv(&clouds)?;
    wrote(&clouds);
    let scores = dir.join("ellipse_scores.csv");
    result.write_scores_csv(&scores)?;
    wrote(&scores);
    Ok(())
}

/// Materializes one of the built-in synthetic datasets as a TSV directory.
pub fn cmd_gen(cfg: &RunConfig) -> Result<(), CliError> {
    let target = cfg.require_dataset()?;
    let ds = match cfg.kind.as_str() {
        "benchmark" => benchmark_graph_dataset(cfg.seed, cfg.n_graphs)?,
        "node_anisotropic" => anisotropic_node_dataset(cfg.seed, cfg.nodes_per_class),
        other => {
            return Err(CliError::Usage(format!(
                "unknown dataset kind {other:?}; valid kinds: benchmark, node_anisotropic"
            )))
        }
    };
    write_dataset(&ds, target)?;
    wrote(target);
    Ok(())
}
