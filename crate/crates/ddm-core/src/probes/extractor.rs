//! Supervised two-layer graph-convolution classifier whose penultimate
//! activations serve as the hidden space for the SNR probe.

use crate::error::{Error, Result};
use crate::graph::{sequential_batches, Dataset, Split, Task};
use crate::numeric::{AdamConfig, AdamState, DenseMatrix, ParamStore, RngStream, SparseAdjacency, Tape};
use std::rc::Rc;

#[derive(Debug, Clone)]
pub struct ProbeConfig {
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub num_classes: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl ProbeConfig {
    pub fn new(input_dim: usize, num_classes: usize) -> ProbeConfig {
        ProbeConfig {
            input_dim,
            hidden_dim: 32,
            num_classes,
            epochs: 200,
            learning_rate: 1e-2,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ProbeExtractor {
    pub cfg: ProbeConfig,
    pub params: ParamStore,
}

fn glorot(rng: &mut RngStream, fan_in: usize, fan_out: usize) -> DenseMatrix {
    let s = (6.0 / (fan_in + fan_out) as f64).sqrt();
    let mut m = DenseMatrix::zeros(fan_in, fan_out);
    for v in m.values_mut() {
        *v = s * (2.0 * rng.uniform() - 1.0);
    }
    m
}

/// Trains `H = relu(A_hat X W1)`, `Z = A_hat H W2` with full-batch MSE
/// against one-hot labels, restricted to the train mask.
pub fn train_probe_extractor(ds: &Dataset, cfg: &ProbeConfig) -> Result<ProbeExtractor> {
    if ds.task != Task::Node {
        return Err(Error::Contract(
            "probe extractor training needs a node-level dataset".into(),
        ));
    }
    if ds.feature_dim != cfg.input_dim {
        return Err(Error::Dimension {
            op: "train_probe_extractor",
            expected: format!("input_dim {}", cfg.input_dim),
            actual: format!("dataset feature_dim {}", ds.feature_dim),
        });
    }
    let Split::NodeMasks { train, .. } = &ds.split else {
        return Err(Error::Contract("probe extractor training needs node masks".into()));
    };
    let labels: Vec<usize> = {
        let mut all = Vec::new();
        for g in &ds.graphs {
            let per = g
                .node_labels
                .as_ref()
                .ok_or_else(|| Error::Contract("probe extractor training needs node labels".into()))?;
            all.extend_from_slice(per);
        }
        all
    };
    let batch = sequential_batches(ds, 1)?.remove(0);
    let n = batch.features.rows();
    let adj_hat = Rc::new(batch.adjacency.normalize()?);

    // one-hot targets, zero outside the train mask; matching row mask
    let mut target = DenseMatrix::zeros(n, cfg.num_classes);
    let mut mask = DenseMatrix::zeros(n, cfg.num_classes);
    for (i, &m) in train.iter().enumerate() {
        if m {
            if labels[i] >= cfg.num_classes {
                return Err(Error::Contract(format!(
                    "label {} out of range for {} classes",
                    labels[i], cfg.num_classes
                )));
            }
            target.set(i, labels[i], 1.0);
            for c in 0..cfg.num_classes {
                mask.set(i, c, 1.0);
            }
        }
    }
    if !train.iter().any(|&m| m) {
        return Err(Error::Contract("probe extractor training needs a nonempty train mask".into()));
    }

    let mut rng = RngStream::new(cfg.seed).split(0);
    let mut params = ParamStore::new();
    params.insert("w1", glorot(&mut rng, cfg.input_dim, cfg.hidden_dim));
    params.insert("w2", glorot(&mut rng, cfg.hidden_dim, cfg.num_classes));
    let mut adam = AdamState::new(AdamConfig {
        learning_rate: cfg.learning_rate,
        ..AdamConfig::default()
    });

    for epoch in 0..cfg.epochs {
        let mut tape = Tape::new();
        let x = tape.constant(batch.features.clone());
        let w1 = tape.param(&params, "w1")?;
        let w2 = tape.param(&params, "w2")?;
        let xw = tape.matmul(x, w1)?;
        let pre = tape.spmm(Rc::clone(&adj_hat), xw)?;
        let h = tape.relu(pre);
        let hw = tape.matmul(h, w2)?;
        let z = tape.spmm(Rc::clone(&adj_hat), hw)?;
        let m = tape.constant(mask.clone());
        let zm = tape.hadamard(z, m)?;
        let loss = tape.mse(zm, &target)?;
        if !tape.value(loss).get(0, 0).is_finite() {
            return Err(Error::Numeric(format!(
                "non-finite probe loss at epoch {epoch}"
            )));
        }
        tape.backward(loss, &mut params)?;
        adam.step(&mut params)?;
    }
    Ok(ProbeExtractor {
        cfg: cfg.clone(),
        params,
    })
}

impl ProbeExtractor {
    /// Penultimate activations `relu(A_hat X W1)`.
    pub fn hidden(&self, x: &DenseMatrix, adj_hat: &SparseAdjacency) -> Result<DenseMatrix> {
        let w1 = &self.params.get("w1")?.value;
        let mut h = adj_hat.spmm(&x.matmul(w1)?)?;
        for v in h.values_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        Ok(h)
    }

    pub fn logits(&self, x: &DenseMatrix, adj_hat: &SparseAdjacency) -> Result<DenseMatrix> {
        let h = self.hidden(x, adj_hat)?;
        let w2 = &self.params.get("w2")?.value;
        adj_hat.spmm(&h.matmul(w2)?)
    }

    pub fn predict(&self, x: &DenseMatrix, adj_hat: &SparseAdjacency) -> Result<Vec<usize>> {
        let z = self.logits(x, adj_hat)?;
        Ok((0..z.rows())
            .map(|r| {
                z.row(r)
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                    .map(|(i, _)| i)
                    .unwrap_or(0)
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;

    /// Two 10-node communities, features offset by class: trivially
    /// separable.
    fn separable_node_dataset() -> Dataset {
        let mut rng = RngStream::new(31);
        let n = 20;
        let mut edges = Vec::new();
        for block in 0..2 {
            let base = block * 10;
            for i in 1..10 {
                edges.push((base + i - 1, base + i));
            }
        }
        let mut features = DenseMatrix::zeros(n, 3);
        let mut labels = Vec::new();
        for i in 0..n {
            let c = i / 10;
            labels.push(c);
            let offset = if c == 0 { 2.0 } else { -2.0 };
            features.set(i, 0, offset + 0.1 * rng.standard_normal());
            features.set(i, 1, 0.1 * rng.standard_normal());
            features.set(i, 2, 0.1 * rng.standard_normal());
        }
        let graph = Graph {
            node_count: n,
            adjacency: SparseAdjacency::from_undirected_edges(n, &edges, 1.0).unwrap(),
            features,
            node_labels: Some(labels),
            graph_label: None,
        };
        Dataset {
            graphs: vec![graph],
            task: Task::Node,
            num_classes: 2,
            feature_dim: 3,
            split: Split::NodeMasks {
                train: vec![true; n],
                val: vec![false; n],
                test: vec![false; n],
            },
        }
    }

    #[test]
    fn separable_toy_set_reaches_perfect_train_accuracy() {
        let ds = separable_node_dataset();
        let cfg = ProbeConfig {
            hidden_dim: 8,
            epochs: 300,
            ..ProbeConfig::new(3, 2)
        };
        let ex = train_probe_extractor(&ds, &cfg).unwrap();
        let batch = sequential_batches(&ds, 1).unwrap().remove(0);
        let adj_hat = batch.adjacency.normalize().unwrap();
        let preds = ex.predict(&batch.features, &adj_hat).unwrap();
        let labels = ds.graphs[0].node_labels.as_ref().unwrap();
        assert_eq!(&preds, labels);
    }

    #[test]
    fn training_beats_majority_class_share() {
        let ds = separable_node_dataset();
        let cfg = ProbeConfig {
            hidden_dim: 8,
            epochs: 100,
            ..ProbeConfig::new(3, 2)
        };
        let ex = train_probe_extractor(&ds, &cfg).unwrap();
        let batch = sequential_batches(&ds, 1).unwrap().remove(0);
        let adj_hat = batch.adjacency.normalize().unwrap();
        let preds = ex.predict(&batch.features, &adj_hat).unwrap();
        let labels = ds.graphs[0].node_labels.as_ref().unwrap();
        let acc = preds.iter().zip(labels).filter(|(p, t)| p == t).count() as f64 / preds.len() as f64;
        assert!(acc > 0.5, "train accuracy {acc} not above majority share");
    }

    #[test]
    fn fixed_seed_is_deterministic() {
        let ds = separable_node_dataset();
        let cfg = ProbeConfig {
            hidden_dim: 8,
            epochs: 20,
            ..ProbeConfig::new(3, 2)
        };
        let a = train_probe_extractor(&ds, &cfg).unwrap();
        let b = train_probe_extractor(&ds, &cfg).unwrap();
        for (name, slot) in a.params.iter() {
            assert_eq!(slot.value, b.params.get(name).unwrap().value, "{name} differs");
        }
    }

    #[test]
    fn unlabeled_data_rejected() {
        let mut ds = separable_node_dataset();
        ds.graphs[0].node_labels = None;
        let cfg = ProbeConfig::new(3, 2);
        assert!(train_probe_extractor(&ds, &cfg).is_err());
    }
}
