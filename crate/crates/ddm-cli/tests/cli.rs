//! End-to-end tests against the compiled `ddm` binary, including the
//! determinism acceptance criterion.

use ddm_core::denoiser::write_store;
use ddm_core::numeric::DenseMatrix;
use ddm_core::synthetic::benchmark_graph_dataset;
use std::path::Path;
use std::process::{Command, Output};

fn ddm(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ddm"))
        .args(args)
        .current_dir(dir)
        .env_remove("DDM_SEED")
        .output()
        .expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn gen_toy(dir: &Path) {
    let out = ddm(
        dir,
        &["gen", "--dataset", "data", "--kind", "benchmark", "--n_graphs", "8", "--seed", "3"],
    );
    assert!(out.status.success(), "{}", stderr(&out));
}

const FAST_TRAIN: &[&str] = &[
    "--dataset", "data", "--epochs", "5", "--hidden_dim", "8", "--time_embed_dim", "4",
];

#[test]
fn missing_command_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = ddm(dir.path(), &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("usage"));
}

#[test]
fn bad_noise_mode_lists_valid_modes() {
    let dir = tempfile::tempdir().unwrap();
    let out = ddm(dir.path(), &["train", "--noise_mode", "purple"]);
    assert_eq!(out.status.code(), Some(1));
    let msg = stderr(&out);
    assert!(msg.contains("directional") && msg.contains("aniso_only") && msg.contains("white"));
}

#[test]
fn unknown_key_lists_valid_keys() {
    let dir = tempfile::tempdir().unwrap();
    let out = ddm(dir.path(), &["train", "--flux_capacitor", "1"]);
    assert_eq!(out.status.code(), Some(1));
    let msg = stderr(&out);
    assert!(msg.contains("unknown key") && msg.contains("valid keys") && msg.contains("epochs"));
}

#[test]
fn broken_dataset_is_data_error() {
    let dir = tempfile::tempdir().unwrap();
    gen_toy(dir.path());
    std::fs::remove_file(dir.path().join("data/edges.tsv")).unwrap();
    let mut args = vec!["train"];
    args.extend_from_slice(FAST_TRAIN);
    let out = ddm(dir.path(), &args);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
}

#[test]
fn train_writes_checkpoint_and_loss_log() {
    let dir = tempfile::tempdir().unwrap();
    gen_toy(dir.path());
    let mut args = vec!["train"];
    args.extend_from_slice(FAST_TRAIN);
    let out = ddm(dir.path(), &args);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(dir.path().join("out/train/run/checkpoint.ddm").is_file());
    let log = std::fs::read_to_string(dir.path().join("out/train/run/loss_log.csv")).unwrap();
    let lines: Vec<&str> = log.lines().collect();
    assert_eq!(lines[0], "epoch,loss");
    assert_eq!(lines.len(), 6, "5 epochs plus header");
}

#[test]
fn config_file_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    gen_toy(dir.path());
    std::fs::write(
        dir.path().join("ddm.conf"),
        "epochs=50\nhidden_dim=8\ntime_embed_dim=4\ndataset=data\n",
    )
    .unwrap();
    let out = ddm(dir.path(), &["train", "--config", "ddm.conf", "--epochs", "2"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let log = std::fs::read_to_string(dir.path().join("out/train/run/loss_log.csv")).unwrap();
    assert_eq!(log.lines().count(), 3, "2 epochs plus header");
}

#[test]
fn ddm_seed_env_overrides_flag() {
    let dir = tempfile::tempdir().unwrap();
    gen_toy(dir.path());
    let mut base = vec!["train"];
    base.extend_from_slice(FAST_TRAIN);

    let mut with_flag = base.clone();
    with_flag.extend_from_slice(&["--seed", "2", "--tag", "a"]);
    assert!(ddm(dir.path(), &with_flag).status.success());

    let mut with_env = base.clone();
    with_env.extend_from_slice(&["--seed", "1", "--tag", "b"]);
    let out = Command::new(env!("CARGO_BIN_EXE_ddm"))
        .args(&with_env)
        .current_dir(dir.path())
        .env("DDM_SEED", "2")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));

    let a = std::fs::read(dir.path().join("out/train/a/loss_log.csv")).unwrap();
    let b = std::fs::read(dir.path().join("out/train/b/loss_log.csv")).unwrap();
    assert_eq!(a, b, "DDM_SEED did not override --seed");
}

#[test]
fn eval_with_oracle_embeddings_scores_one() {
    let dir = tempfile::tempdir().unwrap();
    let ds = benchmark_graph_dataset(3, 8).unwrap();
    ddm_core::graph::write_dataset(&ds, &dir.path().join("data")).unwrap();

    // representations: per node, the one-hot of its graph's label
    let total = ds.total_nodes();
    let mut reps = DenseMatrix::zeros(total, 2);
    let mut node_to_graph = Vec::new();
    let mut row = 0;
    for (g, graph) in ds.graphs.iter().enumerate() {
        for _ in 0..graph.node_count {
            reps.set(row, graph.graph_label.unwrap(), 1.0);
            node_to_graph.push(g as f64);
            row += 1;
        }
    }
    let map = DenseMatrix::from_vec(total, 1, node_to_graph).unwrap();
    let header = format!(
        "{{\"kind\":\"representations\",\"steps\":[50],\"config\":{}}}",
        serde_json::to_string(&ddm_core::denoiser::DenoiserConfig::with_input_dim(
            ds.feature_dim
        ))
        .unwrap()
    );
    write_store(
        &dir.path().join("oracle.ddm"),
        &header,
        &[("step_50".into(), &reps), ("node_to_graph".into(), &map)],
    )
    .unwrap();

    let out = ddm(
        dir.path(),
        &["eval", "--dataset", "data", "--representations", "oracle.ddm"],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/eval/run/report.json")).unwrap())
            .unwrap();
    assert_eq!(report["voted_accuracy"], 1.0);
}

fn run_pipeline(dir: &Path, tag: &str) {
    let mut train = vec!["train", "--tag", tag, "--seed", "7"];
    train.extend_from_slice(FAST_TRAIN);
    let out = ddm(dir, &train);
    assert!(out.status.success(), "{}", stderr(&out));

    let ckpt = format!("out/train/{tag}/checkpoint.ddm");
    let out = ddm(
        dir,
        &["extract", "--dataset", "data", "--checkpoint", &ckpt, "--tag", tag, "--seed", "7"],
    );
    assert!(out.status.success(), "{}", stderr(&out));

    let reps = format!("out/extract/{tag}/representations.ddm");
    let out = ddm(
        dir,
        &["eval", "--dataset", "data", "--representations", &reps, "--tag", tag, "--seed", "7"],
    );
    assert!(out.status.success(), "{}", stderr(&out));
}

#[test]
fn criterion_9_pipeline_determinism() {
    let dir = tempfile::tempdir().unwrap();
    gen_toy(dir.path());
    run_pipeline(dir.path(), "a");
    run_pipeline(dir.path(), "b");
    let mut ok = true;
    for file in ["report.csv", "report.json"] {
        let a = std::fs::read(dir.path().join("out/eval/a").join(file)).unwrap();
        let b = std::fs::read(dir.path().join("out/eval/b").join(file)).unwrap();
        ok &= a == b;
    }
    // the intermediate artifacts are deterministic too
    for (dir_name, file) in [
        ("train", "checkpoint.ddm"),
        ("train", "loss_log.csv"),
        ("extract", "representations.ddm"),
    ] {
        let a = std::fs::read(dir.path().join(format!("out/{dir_name}/a/{file}"))).unwrap();
        let b = std::fs::read(dir.path().join(format!("out/{dir_name}/b/{file}"))).unwrap();
        ok &= a == b;
    }
    if ok {
        println!("criterion 9 (determinism): pass");
    } else {
        println!("criterion 9 (determinism): FAIL");
        panic!("pipeline artifacts differ between identical runs");
    }
}

#[test]
fn snr_and_ellipse_emit_probe_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let out = ddm(
        dir.path(),
        &["gen", "--dataset", "nodes", "--kind", "node_anisotropic", "--nodes_per_class", "40"],
    );
    assert!(out.status.success(), "{}", stderr(&out));

    let out = ddm(
        dir.path(),
        &["snr", "--dataset", "nodes", "--steps", "0,100,500"],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = std::fs::read_to_string(dir.path().join("out/snr/run/snr_curve.csv")).unwrap();
    assert!(csv.starts_with("mode,step,snr\n"));
    // three modes, three steps each
    assert_eq!(csv.lines().count(), 10);

    let out = ddm(
        dir.path(),
        &["ellipse", "--samples_per_class", "50", "--ellipse_seeds", "0"],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let scores =
        std::fs::read_to_string(dir.path().join("out/ellipse/run/ellipse_scores.csv")).unwrap();
    assert!(scores.starts_with("mode,step,separability\n"));
    assert!(dir.path().join("out/ellipse/run/ellipse_sim.csv").is_file());
}
