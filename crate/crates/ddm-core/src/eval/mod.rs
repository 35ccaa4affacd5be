//! Representation extraction and downstream evaluation: per-step linear
//! classifiers combined by majority vote.

pub mod logistic;
pub mod report;

pub use logistic::{fit as train_linear_classifier, LinearModel};
pub use report::{EvalReport, EvalRow};

use crate::denoiser::{denoiser_forward, DenoiserConfig};
use crate::diffusion::{compute_batch_stats, diffuse_to_step, NoiseMode, NoiseSchedule};
use crate::error::{Error, Result};
use crate::graph::{sequential_batches, Dataset, Split};
use crate::numeric::{DenseMatrix, ParamStore, RngStream};
use std::rc::Rc;

/// Default regularization grid for node-task model selection.
pub const REG_GRID: [f64; 4] = [1e-4, 1e-3, 1e-2, 1e-1];

/// Per-step node embeddings `H_k`, rows in dataset graph order.
#[derive(Debug, Clone)]
pub struct RepresentationSet {
    pub steps: Vec<usize>,
    /// One N x (2h) matrix per step, same row order for all steps.
    pub reps: Vec<DenseMatrix>,
    /// Row -> dataset graph index.
    pub node_to_graph: Vec<usize>,
}

/// Diffuses the clean features to each requested step, runs the denoiser,
/// and concatenates the two decoder activations per node.
///
/// Batch statistics come from the evaluation batch itself, mirroring
/// training. Batches are walked in dataset order so rows map back to graphs.
pub fn extract_node_representations(
    params: &ParamStore,
    cfg: &DenoiserConfig,
    ds: &Dataset,
    steps: &[usize],
    sched: &NoiseSchedule,
    mode: NoiseMode,
    rng: &RngStream,
) -> Result<RepresentationSet> {
    let mut steps = steps.to_vec();
    steps.sort_unstable();
    steps.dedup();
    if steps.is_empty() {
        return Err(Error::Contract("at least one extraction step required".into()));
    }
    for &k in &steps {
        if k < 1 || k > sched.t_max() {
            return Err(Error::Contract(format!(
                "extraction step {k} out of range 1..={}",
                sched.t_max()
            )));
        }
    }
    let batches = sequential_batches(ds, cfg.batch_size)?;
    let total_nodes = ds.total_nodes();
    let mut reps: Vec<DenseMatrix> = steps
        .iter()
        .map(|_| DenseMatrix::zeros(total_nodes, cfg.rep_dim()))
        .collect();
    let mut node_to_graph = vec![0usize; total_nodes];

    let mut row_offset = 0;
    for (bi, batch) in batches.iter().enumerate() {
        let stats = compute_batch_stats(&batch.features)?;
        let adj_hat = Rc::new(batch.adjacency.normalize()?);
        let rows = batch.features.rows();
        for (si, &k) in steps.iter().enumerate() {
            let mut step_rng = rng.split(bi as u64).split(si as u64);
            let x_k = diffuse_to_step(&batch.features, k, sched, mode, &stats, &mut step_rng)?;
            let trace = denoiser_forward(params, cfg, &x_k, &adj_hat, k)?;
            let h = trace.dec1.concat_cols(&trace.dec2)?;
            for r in 0..rows {
                reps[si].row_mut(row_offset + r).copy_from_slice(h.row(r));
            }
        }
        for (r, &pos) in batch.node_to_graph.iter().enumerate() {
            node_to_graph[row_offset + r] = batch.graph_ids[pos];
        }
        row_offset += rows;
    }
    Ok(RepresentationSet {
        steps,
        reps,
        node_to_graph,
    })
}

/// Mean-pools node embeddings per graph; output row g is the mean of the
/// rows mapped to graph g.
pub fn pool_graph(h: &DenseMatrix, node_to_graph: &[usize]) -> Result<DenseMatrix> {
    if node_to_graph.len() != h.rows() {
        return Err(Error::Dimension {
            op: "pool_graph",
            expected: format!("{} mapped rows", h.rows()),
            actual: format!("{} mapped rows", node_to_graph.len()),
        });
    }
    let num_graphs = node_to_graph.iter().max().map(|m| m + 1).unwrap_or(0);
    let mut counts = vec![0usize; num_graphs];
    let mut out = DenseMatrix::zeros(num_graphs, h.cols());
    for (r, &g) in node_to_graph.iter().enumerate() {
        counts[g] += 1;
        for c in 0..h.cols() {
            out.set(g, c, out.get(g, c) + h.get(r, c));
        }
    }
    for (g, &n) in counts.iter().enumerate() {
        if n == 0 {
            return Err(Error::Contract(format!("graph {g} has no nodes to pool")));
        }
        let inv = 1.0 / n as f64;
        for c in 0..h.cols() {
            out.set(g, c, out.get(g, c) * inv);
        }
    }
    Ok(out)
}

/// Modal label per sample. Ties go to the prediction of the
/// earliest (lowest-step) classifier among the tied labels.
pub fn majority_vote(per_step_predictions: &[Vec<usize>]) -> Result<Vec<usize>> {
    let Some(first) = per_step_predictions.first() else {
        return Err(Error::Contract("majority_vote needs at least one predictor".into()));
    };
    let n = first.len();
    if per_step_predictions.iter().any(|p| p.len() != n) {
        return Err(Error::Contract("prediction vectors must share length".into()));
    }
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let votes: Vec<usize> = per_step_predictions.iter().map(|p| p[i]).collect();
        let max_label = votes.iter().max().copied().unwrap_or(0);
        let mut counts = vec![0usize; max_label + 1];
        for &v in &votes {
            counts[v] += 1;
        }
        let best = counts.iter().max().copied().unwrap_or(0);
        // earliest predictor whose label is among the tied winners
        let winner = votes
            .iter()
            .find(|&&v| counts[v] == best)
            .copied()
            .unwrap_or(votes[0]);
        out.push(winner);
    }
    Ok(out)
}

/// 10-fold cross-validation on pooled graph embeddings: one classifier per
/// step per fold, majority vote across steps, repeated with fresh
/// classifier seeds.
pub fn evaluate_graph_task(
    ds: &Dataset,
    reps: &RepresentationSet,
    repetitions: usize,
    reg: f64,
    rng: &RngStream,
) -> Result<EvalReport> {
    let Split::GraphFolds(folds) = &ds.split else {
        return Err(Error::Contract("graph-task evaluation needs fold assignments".into()));
    };
    let labels: Vec<usize> = ds
        .graphs
        .iter()
        .map(|g| {
            g.graph_label
                .ok_or_else(|| Error::Contract("graph-task evaluation needs graph labels".into()))
        })
        .collect::<Result<_>>()?;
    let num_folds = ds.num_folds();
    if num_folds < 2 {
        return Err(Error::Contract("need at least two folds".into()));
    }
    let pooled: Vec<DenseMatrix> = reps
        .reps
        .iter()
        .map(|h| pool_graph(h, &reps.node_to_graph))
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    let mut voted_accs = Vec::new();
    for rep in 0..repetitions {
        for fold in 0..num_folds {
            let train_idx: Vec<usize> = (0..ds.graphs.len()).filter(|&g| folds[g] != fold).collect();
            let test_idx: Vec<usize> = (0..ds.graphs.len()).filter(|&g| folds[g] == fold).collect();
            if test_idx.is_empty() {
                continue;
            }
            let y_train: Vec<usize> = train_idx.iter().map(|&g| labels[g]).collect();
            let y_test: Vec<usize> = test_idx.iter().map(|&g| labels[g]).collect();
            let mut per_step_preds = Vec::new();
            for (si, h) in pooled.iter().enumerate() {
                let x_train = select_rows(h, &train_idx);
                let x_test = select_rows(h, &test_idx);
                let mut fit_rng = rng
                    .split(rep as u64)
                    .split(fold as u64)
                    .split(si as u64);
                let model = logistic::fit(&x_train, &y_train, ds.num_classes, reg, &mut fit_rng)?;
                let preds = model.predict(&x_test)?;
                let acc = accuracy_of(&preds, &y_test);
                rows.push(EvalRow {
                    step: Some(reps.steps[si]),
                    fold,
                    repetition: rep,
                    accuracy: acc,
                });
                per_step_preds.push(preds);
            }
            let voted = majority_vote(&per_step_preds)?;
            let acc = accuracy_of(&voted, &y_test);
            rows.push(EvalRow {
                step: None,
                fold,
                repetition: rep,
                accuracy: acc,
            });
            voted_accs.push(acc);
        }
    }
    Ok(EvalReport::from_rows(rows, &reps.steps, &voted_accs))
}

/// Node-task evaluation: per step, fit on the train mask, pick the L2
/// penalty from [`REG_GRID`] on the validation mask, then predict the test
/// mask; vote across steps.
pub fn evaluate_node_task(
    ds: &Dataset,
    reps: &RepresentationSet,
    rng: &RngStream,
) -> Result<EvalReport> {
    let Split::NodeMasks { train, val, test } = &ds.split else {
        return Err(Error::Contract("node-task evaluation needs train/val/test masks".into()));
    };
    let labels: Vec<usize> = {
        let mut all = Vec::new();
        for g in &ds.graphs {
            let per = g
                .node_labels
                .as_ref()
                .ok_or_else(|| Error::Contract("node-task evaluation needs node labels".into()))?;
            all.extend_from_slice(per);
        }
        all
    };
    let idx_of = |mask: &[bool]| -> Vec<usize> {
        mask.iter()
            .enumerate()
            .filter(|(_, &m)| m)
            .map(|(i, _)| i)
            .collect()
    };
    let train_idx = idx_of(train);
    let val_idx = idx_of(val);
    let test_idx = idx_of(test);
    if train_idx.is_empty() || test_idx.is_empty() {
        return Err(Error::Contract("node-task masks must cover train and test".into()));
    }
    let gather = |idx: &[usize]| -> Vec<usize> { idx.iter().map(|&i| labels[i]).collect() };
    let y_train = gather(&train_idx);
    let y_val = gather(&val_idx);
    let y_test = gather(&test_idx);

    let mut rows = Vec::new();
    let mut per_step_preds = Vec::new();
    for (si, h) in reps.reps.iter().enumerate() {
        let x_train = select_rows(h, &train_idx);
        let x_val = select_rows(h, &val_idx);
        let x_test = select_rows(h, &test_idx);
        let mut best: Option<(f64, LinearModel)> = None;
        for (ri, &reg) in REG_GRID.iter().enumerate() {
            let mut fit_rng = rng.split(si as u64).split(ri as u64);
            let model = logistic::fit(&x_train, &y_train, ds.num_classes, reg, &mut fit_rng)?;
            let val_acc = if y_val.is_empty() {
                0.0
            } else {
                model.accuracy(&x_val, &y_val)?
            };
            if best.as_ref().map(|(a, _)| val_acc > *a).unwrap_or(true) {
                best = Some((val_acc, model));
            }
        }
        let (_, model) = best.expect("grid is non-empty");
        let preds = model.predict(&x_test)?;
        rows.push(EvalRow {
            step: Some(reps.steps[si]),
            fold: 0,
            repetition: 0,
            accuracy: accuracy_of(&preds, &y_test),
        });
        per_step_preds.push(preds);
    }
    let voted = majority_vote(&per_step_preds)?;
    let acc = accuracy_of(&voted, &y_test);
    rows.push(EvalRow {
        step: None,
        fold: 0,
        repetition: 0,
        accuracy: acc,
    });
    Ok(EvalReport::from_rows(rows, &reps.steps, &[acc]))
}

fn select_rows(m: &DenseMatrix, idx: &[usize]) -> DenseMatrix {
    let mut out = DenseMatrix::zeros(idx.len(), m.cols());
    for (r, &i) in idx.iter().enumerate() {
        out.row_mut(r).copy_from_slice(m.row(i));
    }
    out
}

fn accuracy_of(preds: &[usize], truth: &[usize]) -> f64 {
    let hits = preds.iter().zip(truth).filter(|(p, t)| p == t).count();
    hits as f64 / truth.len() as f64
}
