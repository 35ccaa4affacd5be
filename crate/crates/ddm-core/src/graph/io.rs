//! Dataset directory format (UTF-8, tab-separated):
//!
//! - `meta.json`: `{"task": "node"|"graph", "num_classes": int,
//!   "feature_dim": int or "degree"/"node_label"}`
//! - `graphs.tsv`: `graph_id<TAB>num_nodes<TAB>graph_label(or -)`
//! - `edges.tsv`: `graph_id<TAB>src<TAB>dst` (undirected, listed once,
//!   node indices local to the graph)
//! - `features.tsv`: `graph_id<TAB>node_id<TAB>v1,v2,...,vd` (absent when
//!   features are synthesized)
//! - `labels.tsv`: `graph_id<TAB>node_id<TAB>label` — classification targets
//!   for node tasks, categorical node attributes when
//!   `feature_dim = "node_label"`
//! - `splits.tsv`: node task `node_id<TAB>train|val|test`;
//!   graph task `graph_id<TAB>fold_index(0..9)`

use crate::error::{Error, Result};
use crate::graph::features::{degree_onehot_features, label_onehot_features};
use crate::numeric::{DenseMatrix, SparseAdjacency};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;

/// Default cap for degree one-hot synthesis.
pub const DEFAULT_DEGREE_CAP: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Node,
    Graph,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FeatureKind {
    /// Explicit features of this dimension in `features.tsv`.
    Explicit(usize),
    /// `"degree"` or `"node_label"` synthesis.
    Synthesized(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Meta {
    task: Task,
    num_classes: usize,
    feature_dim: FeatureKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    pub node_count: usize,
    pub adjacency: SparseAdjacency,
    pub features: DenseMatrix,
    pub node_labels: Option<Vec<usize>>,
    pub graph_label: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Split {
    /// Per-graph fold assignment, graph tasks.
    GraphFolds(Vec<usize>),
    /// Per-node masks over the concatenated node range, node tasks.
    NodeMasks {
        train: Vec<bool>,
        val: Vec<bool>,
        test: Vec<bool>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub graphs: Vec<Graph>,
    pub task: Task,
    pub num_classes: usize,
    pub feature_dim: usize,
    pub split: Split,
}

impl Dataset {
    pub fn total_nodes(&self) -> usize {
        self.graphs.iter().map(|g| g.node_count).sum()
    }

    pub fn num_folds(&self) -> usize {
        match &self.split {
            Split::GraphFolds(folds) => folds.iter().max().map(|m| m + 1).unwrap_or(0),
            Split::NodeMasks { .. } => 0,
        }
    }
}

fn read_lines(dir: &Path, name: &str) -> Result<Vec<String>> {
    let path = dir.join(name);
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(path.display().to_string(), e))?;
    Ok(text.lines().map(|l| l.to_string()).collect())
}

fn schema_err(file: &str, line: usize, msg: impl Into<String>) -> Error {
    Error::Schema {
        file: file.to_string(),
        line,
        msg: msg.into(),
    }
}

fn parse_usize(file: &str, line: usize, field: &str, raw: &str) -> Result<usize> {
    raw.parse()
        .map_err(|_| schema_err(file, line, format!("invalid {field}: {raw:?}")))
}

/// Loads and validates a dataset directory, synthesizing features when the
/// meta file asks for `degree` or `node_label` inputs.
pub fn load_dataset(dir: &Path) -> Result<Dataset> {
    load_dataset_with_cap(dir, DEFAULT_DEGREE_CAP)
}

pub fn load_dataset_with_cap(dir: &Path, degree_cap: usize) -> Result<Dataset> {
    let meta_path = dir.join("meta.json");
    let meta_text = std::fs::read_to_string(&meta_path)
        .map_err(|e| Error::io(meta_path.display().to_string(), e))?;
    let meta: Meta = serde_json::from_str(&meta_text)
        .map_err(|e| schema_err("meta.json", 1, format!("invalid meta: {e}")))?;

    // graphs.tsv
    let mut node_counts = Vec::new();
    let mut graph_labels: Vec<Option<usize>> = Vec::new();
    for (i, line) in read_lines(dir, "graphs.tsv")?.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let ln = i + 1;
        let parts: Vec<&str> = line.split('\t').collect();
        if parts.len() != 3 {
            return Err(schema_err("graphs.tsv", ln, "expected 3 tab-separated fields"));
        }
        let gid = parse_usize("graphs.tsv", ln, "graph_id", parts[0])?;
        if gid != node_counts.len() {
            return Err(schema_err(
                "graphs.tsv",
                ln,
                format!("graph ids must be consecutive from 0, got {gid}"),
            ));
        }
        let n = parse_usize("graphs.tsv", ln, "num_nodes", parts[1])?;
        if n == 0 {
            return Err(schema_err("graphs.tsv", ln, "graph must have at least one node"));
        }
        node_counts.push(n);
        graph_labels.push(match parts[2] {
            "-" => None,
            raw => Some(parse_usize("graphs.tsv", ln, "graph_label", raw)?),
        });
    }
    if node_counts.is_empty() {
        return Err(schema_err("graphs.tsv", 1, "dataset contains no graphs"));
    }
    let num_graphs = node_counts.len();

    // edges.tsv
    let mut edges: Vec<Vec<(usize, usize)>> = vec![Vec::new(); num_graphs];
    for (i, line) in read_lines(dir, "edges.tsv")?.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let ln = i + 1;
        let parts: Vec<&str> = line.split('\t').collect();
        if parts.len() != 3 {
            return Err(schema_err("edges.tsv", ln, "expected 3 tab-separated fields"));
        }
        let gid = parse_usize("edges.tsv", ln, "graph_id", parts[0])?;
        if gid >= num_graphs {
            return Err(schema_err("edges.tsv", ln, format!("unknown graph id {gid}")));
        }
        let src = parse_usize("edges.tsv", ln, "src", parts[1])?;
        let dst = parse_usize("edges.tsv", ln, "dst", parts[2])?;
        let n = node_counts[gid];
        if src >= n || dst >= n {
            return Err(schema_err(
                "edges.tsv",
                ln,
                format!("edge ({src},{dst}) references node >= {n} in graph {gid}"),
            ));
        }
        edges[gid].push((src, dst));
    }

    // labels.tsv (node classification targets or categorical node attributes)
    let labels_path = dir.join("labels.tsv");
    let mut node_labels: Vec<Vec<Option<usize>>> =
        node_counts.iter().map(|&n| vec![None; n]).collect();
    let mut have_labels = false;
    if labels_path.exists() {
        have_labels = true;
        for (i, line) in read_lines(dir, "labels.tsv")?.iter().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let ln = i + 1;
            let parts: Vec<&str> = line.split('\t').collect();
            if parts.len() != 3 {
                return Err(schema_err("labels.tsv", ln, "expected 3 tab-separated fields"));
            }
            let gid = parse_usize("labels.tsv", ln, "graph_id", parts[0])?;
            if gid >= num_graphs {
                return Err(schema_err("labels.tsv", ln, format!("unknown graph id {gid}")));
            }
            let nid = parse_usize("labels.tsv", ln, "node_id", parts[1])?;
            if nid >= node_counts[gid] {
                return Err(schema_err(
                    "labels.tsv",
                    ln,
                    format!("node {nid} out of range for graph {gid}"),
                ));
            }
            node_labels[gid][nid] = Some(parse_usize("labels.tsv", ln, "label", parts[2])?);
        }
    }
    let node_labels: Vec<Option<Vec<usize>>> = node_labels
        .into_iter()
        .map(|per_graph| {
            if have_labels {
                per_graph.into_iter().collect::<Option<Vec<usize>>>()
            } else {
                None
            }
        })
        .collect();
    if have_labels && node_labels.iter().any(|l| l.is_none()) {
        return Err(schema_err("labels.tsv", 1, "labels.tsv present but incomplete"));
    }

    // features.tsv (explicit features only)
    let mut features: Vec<Option<DenseMatrix>> = vec![None; num_graphs];
    if let FeatureKind::Explicit(d) = &meta.feature_dim {
        let d = *d;
        let mut raw: Vec<Vec<Option<Vec<f64>>>> =
            node_counts.iter().map(|&n| vec![None; n]).collect();
        for (i, line) in read_lines(dir, "features.tsv")?.iter().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let ln = i + 1;
            let parts: Vec<&str> = line.split('\t').collect();
            if parts.len() != 3 {
                return Err(schema_err("features.tsv", ln, "expected 3 tab-separated fields"));
            }
            let gid = parse_usize("features.tsv", ln, "graph_id", parts[0])?;
            if gid >= num_graphs {
                return Err(schema_err("features.tsv", ln, format!("unknown graph id {gid}")));
            }
            let nid = parse_usize("features.tsv", ln, "node_id", parts[1])?;
            if nid >= node_counts[gid] {
                return Err(schema_err(
                    "features.tsv",
                    ln,
                    format!("node {nid} out of range for graph {gid}"),
                ));
            }
            let values: Vec<f64> = parts[2]
                .split(',')
                .map(|v| {
                    v.parse::<f64>()
                        .map_err(|_| schema_err("features.tsv", ln, format!("invalid value {v:?}")))
                })
                .collect::<Result<_>>()?;
            if values.len() != d {
                return Err(schema_err(
                    "features.tsv",
                    ln,
                    format!("expected {d} feature values, got {}", values.len()),
                ));
            }
            raw[gid][nid] = Some(values);
        }
        for (gid, rows) in raw.into_iter().enumerate() {
            let rows: Option<Vec<Vec<f64>>> = rows.into_iter().collect();
            let rows = rows.ok_or_else(|| {
                schema_err("features.tsv", 1, format!("missing feature rows for graph {gid}"))
            })?;
            features[gid] = Some(DenseMatrix::from_rows(&rows)?);
        }
    }

    // assemble graphs
    let mut graphs = Vec::with_capacity(num_graphs);
    let num_node_label_values = node_labels
        .iter()
        .flatten()
        .flatten()
        .max()
        .map(|m| m + 1)
        .unwrap_or(0);
    for gid in 0..num_graphs {
        let adjacency =
            SparseAdjacency::from_undirected_edges(node_counts[gid], &edges[gid], 1.0)?;
        let mut graph = Graph {
            node_count: node_counts[gid],
            adjacency,
            features: DenseMatrix::zeros(0, 0),
            node_labels: node_labels[gid].clone(),
            graph_label: graph_labels[gid],
        };
        graph.features = match &meta.feature_dim {
            FeatureKind::Explicit(_) => features[gid].take().expect("parsed above"),
            FeatureKind::Synthesized(kind) if kind == "degree" => {
                degree_onehot_features(&graph, degree_cap)?
            }
            FeatureKind::Synthesized(kind) if kind == "node_label" => {
                label_onehot_features(&graph, num_node_label_values)?
            }
            FeatureKind::Synthesized(kind) => {
                return Err(schema_err(
                    "meta.json",
                    1,
                    format!("unknown feature_dim {kind:?}, expected \"degree\" or \"node_label\""),
                ))
            }
        };
        graphs.push(graph);
    }
    let feature_dim = graphs[0].features.cols();
    if graphs.iter().any(|g| g.features.cols() != feature_dim) {
        return Err(schema_err("features.tsv", 1, "inconsistent feature dimensions"));
    }

    // splits.tsv
    let split = match meta.task {
        Task::Graph => {
            let mut folds = vec![usize::MAX; num_graphs];
            for (i, line) in read_lines(dir, "splits.tsv")?.iter().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let ln = i + 1;
                let parts: Vec<&str> = line.split('\t').collect();
                if parts.len() != 2 {
                    return Err(schema_err("splits.tsv", ln, "expected 2 tab-separated fields"));
                }
                let gid = parse_usize("splits.tsv", ln, "graph_id", parts[0])?;
                if gid >= num_graphs {
                    return Err(schema_err("splits.tsv", ln, format!("unknown graph id {gid}")));
                }
                let fold = parse_usize("splits.tsv", ln, "fold_index", parts[1])?;
                if fold >= 10 {
                    return Err(schema_err("splits.tsv", ln, "fold_index must be in 0..9"));
                }
                folds[gid] = fold;
            }
            if folds.iter().any(|&f| f == usize::MAX) {
                return Err(schema_err("splits.tsv", 1, "missing fold assignment"));
            }
            Split::GraphFolds(folds)
        }
        Task::Node => {
            let total: usize = node_counts.iter().sum();
            let mut train = vec![false; total];
            let mut val = vec![false; total];
            let mut test = vec![false; total];
            for (i, line) in read_lines(dir, "splits.tsv")?.iter().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let ln = i + 1;
                let parts: Vec<&str> = line.split('\t').collect();
                if parts.len() != 2 {
                    return Err(schema_err("splits.tsv", ln, "expected 2 tab-separated fields"));
                }
                let nid = parse_usize("splits.tsv", ln, "node_id", parts[0])?;
                if nid >= total {
                    return Err(schema_err("splits.tsv", ln, format!("node id {nid} out of range")));
                }
                match parts[1] {
                    "train" => train[nid] = true,
                    "val" => val[nid] = true,
                    "test" => test[nid] = true,
                    other => {
                        return Err(schema_err(
                            "splits.tsv",
                            ln,
                            format!("expected train|val|test, got {other:?}"),
                        ))
                    }
                }
            }
            for i in 0..total {
                let n = train[i] as u8 + val[i] as u8 + test[i] as u8;
                if n > 1 {
                    return Err(schema_err("splits.tsv", 1, format!("node {i} in multiple splits")));
                }
            }
            Split::NodeMasks { train, val, test }
        }
    };

    // label range checks
    for g in &graphs {
        if meta.task == Task::Graph {
            if let Some(l) = g.graph_label {
                if l >= meta.num_classes {
                    return Err(schema_err(
                        "graphs.tsv",
                        1,
                        format!("graph label {l} >= num_classes {}", meta.num_classes),
                    ));
                }
            }
        }
    }

    Ok(Dataset {
        graphs,
        task: meta.task,
        num_classes: meta.num_classes,
        feature_dim,
        split,
    })
}

/// Writes a dataset back to the directory format. Explicit features are
/// always written (synthesized features round-trip as explicit ones).
pub fn write_dataset(ds: &Dataset, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
    let meta = Meta {
        task: ds.task,
        num_classes: ds.num_classes,
        feature_dim: FeatureKind::Explicit(ds.feature_dim),
    };
    let write = |name: &str, contents: &str| -> Result<()> {
        let path = dir.join(name);
        std::fs::write(&path, contents).map_err(|e| Error::io(path.display().to_string(), e))
    };
    write(
        "meta.json",
        &(serde_json::to_string_pretty(&meta).expect("meta serializes") + "\n"),
    )?;

    let mut graphs_tsv = String::new();
    let mut edges_tsv = String::new();
    let mut features_tsv = String::new();
    let mut labels_tsv = String::new();
    let mut have_labels = false;
    for (gid, g) in ds.graphs.iter().enumerate() {
        let label = g
            .graph_label
            .map(|l| l.to_string())
            .unwrap_or_else(|| "-".to_string());
        let _ = writeln!(graphs_tsv, "{gid}\t{}\t{label}", g.node_count);
        for &(r, c, _) in g.adjacency.entries() {
            if r < c {
                let _ = writeln!(edges_tsv, "{gid}\t{r}\t{c}");
            }
        }
        for nid in 0..g.node_count {
            let row: Vec<String> = g.features.row(nid).iter().map(|v| format!("{v}")).collect();
            let _ = writeln!(features_tsv, "{gid}\t{nid}\t{}", row.join(","));
        }
        if let Some(labels) = &g.node_labels {
            have_labels = true;
            for (nid, l) in labels.iter().enumerate() {
                let _ = writeln!(labels_tsv, "{gid}\t{nid}\t{l}");
            }
        }
    }
    write("graphs.tsv", &graphs_tsv)?;
    write("edges.tsv", &edges_tsv)?;
    write("features.tsv", &features_tsv)?;
    if have_labels {
        write("labels.tsv", &labels_tsv)?;
    }

    let mut splits_tsv = String::new();
    match &ds.split {
        Split::GraphFolds(folds) => {
            for (gid, fold) in folds.iter().enumerate() {
                let _ = writeln!(splits_tsv, "{gid}\t{fold}");
            }
        }
        Split::NodeMasks { train, val, test } => {
            for i in 0..train.len() {
                if train[i] {
                    let _ = writeln!(splits_tsv, "{i}\ttrain");
                } else if val[i] {
                    let _ = writeln!(splits_tsv, "{i}\tval");
                } else if test[i] {
                    let _ = writeln!(splits_tsv, "{i}\ttest");
                }
            }
        }
    }
    write("splits.tsv", &splits_tsv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::RngStream;
    use std::fs;

    fn write_triangle(dir: &Path) {
        fs::write(
            dir.join("meta.json"),
            r#"{"task": "graph", "num_classes": 2, "feature_dim": 2}"#,
        )
        .unwrap();
        fs::write(dir.join("graphs.tsv"), "0\t3\t1\n").unwrap();
        fs::write(dir.join("edges.tsv"), "0\t0\t1\n0\t1\t2\n0\t2\t0\n").unwrap();
        fs::write(
            dir.join("features.tsv"),
            "0\t0\t1.0,0.0\n0\t1\t0.0,1.0\n0\t2\t1.0,1.0\n",
        )
        .unwrap();
        fs::write(dir.join("splits.tsv"), "0\t0\n").unwrap();
    }

    #[test]
    fn triangle_parses() {
        let dir = tempfile::tempdir().unwrap();
        write_triangle(dir.path());
        let ds = load_dataset(dir.path()).unwrap();
        assert_eq!(ds.graphs.len(), 1);
        assert_eq!(ds.graphs[0].node_count, 3);
        assert_eq!(ds.graphs[0].adjacency.nnz(), 6);
        assert_eq!(ds.feature_dim, 2);
        assert_eq!(ds.graphs[0].graph_label, Some(1));
    }

    #[test]
    fn dangling_edge_names_line() {
        let dir = tempfile::tempdir().unwrap();
        write_triangle(dir.path());
        fs::write(dir.path().join("edges.tsv"), "0\t0\t1\n0\t0\t99\n").unwrap();
        let err = load_dataset(dir.path()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("edges.tsv:2"), "{msg}");
        assert!(msg.contains("99"), "{msg}");
    }

    #[test]
    fn missing_file_is_io_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(load_dataset(dir.path()), Err(Error::Io { .. })));
    }

    #[test]
    fn roundtrip_random_dataset() {
        let mut rng = RngStream::new(77);
        let mut graphs = Vec::new();
        for _ in 0..10 {
            let n = 3 + rng.uniform_usize(5);
            let mut edges = Vec::new();
            for u in 0..n {
                for v in (u + 1)..n {
                    if rng.uniform() < 0.4 {
                        edges.push((u, v));
                    }
                }
            }
            let adjacency = SparseAdjacency::from_undirected_edges(n, &edges, 1.0).unwrap();
            let features = rng.gaussian(n, 3).unwrap();
            graphs.push(Graph {
                node_count: n,
                adjacency,
                features,
                node_labels: Some((0..n).map(|_| rng.uniform_usize(3)).collect()),
                graph_label: Some(rng.uniform_usize(2)),
            });
        }
        let folds = (0..10).map(|i| i % 10).collect();
        let ds = Dataset {
            graphs,
            task: Task::Graph,
            num_classes: 2,
            feature_dim: 3,
            split: Split::GraphFolds(folds),
        };
        let dir = tempfile::tempdir().unwrap();
        write_dataset(&ds, dir.path()).unwrap();
        let loaded = load_dataset(dir.path()).unwrap();
        assert_eq!(ds.task, loaded.task);
        assert_eq!(ds.num_classes, loaded.num_classes);
        assert_eq!(ds.split, loaded.split);
        assert_eq!(ds.graphs.len(), loaded.graphs.len());
        for (a, b) in ds.graphs.iter().zip(&loaded.graphs) {
            assert_eq!(a.node_count, b.node_count);
            assert_eq!(a.adjacency, b.adjacency);
            assert_eq!(a.node_labels, b.node_labels);
            assert_eq!(a.graph_label, b.graph_label);
            assert!(a.features.max_abs_diff(&b.features) == 0.0);
        }
    }
}
