//! Reverse-mode differentiation over the small operation set the denoiser
//! needs: matmul, spmm, add, row broadcast, hadamard, relu, concat, sum, mse.
//!
//! A tape is built per forward pass and consumed by `backward`, which writes
//! accumulated gradients into the [`ParamStore`] and frees the tape.

use crate::error::{Error, Result};
use crate::numeric::matrix::DenseMatrix;
use crate::numeric::sparse::SparseAdjacency;
use indexmap::IndexMap;
use std::rc::Rc;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeId(usize);

#[derive(Debug)]
enum Op {
    Const,
    Param(String),
    Matmul(NodeId, NodeId),
    Spmm(Rc<SparseAdjacency>, NodeId),
    Add(NodeId, NodeId),
    /// Broadcast-add a 1xC row to every row of the first operand.
    AddRow(NodeId, NodeId),
    Hadamard(NodeId, NodeId),
    Relu(NodeId),
    ConcatCols(NodeId, NodeId),
    Scale(NodeId, f64),
    Sum(NodeId),
    /// Mean squared error against a constant target.
    Mse(NodeId, DenseMatrix),
}

struct Node {
    value: DenseMatrix,
    op: Op,
}

/// Named parameter slots: value plus a same-shape gradient accumulator.
#[derive(Debug, Clone, Default)]
pub struct ParamStore {
    slots: IndexMap<String, Slot>,
    grads_ready: bool,
}

#[derive(Debug, Clone)]
pub struct Slot {
    pub value: DenseMatrix,
    pub grad: DenseMatrix,
}

impl ParamStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, value: DenseMatrix) {
        let grad = DenseMatrix::zeros(value.rows(), value.cols());
        self.slots.insert(name.into(), Slot { value, grad });
    }

    pub fn get(&self, name: &str) -> Result<&Slot> {
        self.slots
            .get(name)
            .ok_or_else(|| Error::Contract(format!("unknown parameter slot {name:?}")))
    }

    pub fn get_mut(&mut self, name: &str) -> Result<&mut Slot> {
        self.slots
            .get_mut(name)
            .ok_or_else(|| Error::Contract(format!("unknown parameter slot {name:?}")))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.slots.keys().map(|s| s.as_str())
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = (&str, &mut Slot)> {
        self.slots.iter_mut().map(|(k, v)| (k.as_str(), v))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Slot)> {
        self.slots.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn zero_grads(&mut self) {
        for slot in self.slots.values_mut() {
            slot.grad = DenseMatrix::zeros(slot.value.rows(), slot.value.cols());
        }
        self.grads_ready = false;
    }

    pub fn grads_ready(&self) -> bool {
        self.grads_ready
    }
}

#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn value(&self, id: NodeId) -> &DenseMatrix {
        &self.nodes[id.0].value
    }

    fn push(&mut self, value: DenseMatrix, op: Op) -> NodeId {
        self.nodes.push(Node { value, op });
        NodeId(self.nodes.len() - 1)
    }

    pub fn constant(&mut self, value: DenseMatrix) -> NodeId {
        self.push(value, Op::Const)
    }

    /// Leaf for a named parameter; its gradient flows back into the store.
    pub fn param(&mut self, store: &ParamStore, name: &str) -> Result<NodeId> {
        let value = store.get(name)?.value.clone();
        Ok(self.push(value, Op::Param(name.to_string())))
    }

    pub fn matmul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let v = self.value(a).matmul(self.value(b))?;
        Ok(self.push(v, Op::Matmul(a, b)))
    }

    pub fn spmm(&mut self, adj: Rc<SparseAdjacency>, x: NodeId) -> Result<NodeId> {
        let v = adj.spmm(self.value(x))?;
        Ok(self.push(v, Op::Spmm(adj, x)))
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let v = self.value(a).add(self.value(b))?;
        Ok(self.push(v, Op::Add(a, b)))
    }

    pub fn add_row(&mut self, a: NodeId, row: NodeId) -> Result<NodeId> {
        let v = self.value(a).add_row_broadcast(self.value(row))?;
        Ok(self.push(v, Op::AddRow(a, row)))
    }

    pub fn hadamard(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let v = self.value(a).hadamard(self.value(b))?;
        Ok(self.push(v, Op::Hadamard(a, b)))
    }

    pub fn relu(&mut self, a: NodeId) -> NodeId {
        let v = self.value(a).map(|x| x.max(0.0));
        self.push(v, Op::Relu(a))
    }

    pub fn concat_cols(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let v = self.value(a).concat_cols(self.value(b))?;
        Ok(self.push(v, Op::ConcatCols(a, b)))
    }

    pub fn scale(&mut self, a: NodeId, s: f64) -> NodeId {
        let v = self.value(a).scale(s);
        self.push(v, Op::Scale(a, s))
    }

    pub fn sum(&mut self, a: NodeId) -> NodeId {
        let v = DenseMatrix::from_vec(1, 1, vec![self.value(a).sum()]).expect("finite sum");
        self.push(v, Op::Sum(a))
    }

    /// Scalar node `mean((a - target)^2)` over all entries.
    pub fn mse(&mut self, a: NodeId, target: &DenseMatrix) -> Result<NodeId> {
        let av = self.value(a);
        if av.shape() != target.shape() {
            return Err(Error::Dimension {
                op: "mse",
                expected: format!("{}x{}", target.rows(), target.cols()),
                actual: format!("{}x{}", av.rows(), av.cols()),
            });
        }
        let n = (av.rows() * av.cols()) as f64;
        let sq: f64 = av
            .values()
            .iter()
            .zip(target.values())
            .map(|(p, t)| (p - t) * (p - t))
            .sum();
        let v = DenseMatrix::from_vec(1, 1, vec![sq / n])?;
        Ok(self.push(v, Op::Mse(a, target.clone())))
    }

    /// Reverse pass from a scalar loss node. Gradients accumulate into the
    /// matching slots of `params`; accumulators are zeroed first. The tape is
    /// consumed.
    pub fn backward(self, loss: NodeId, params: &mut ParamStore) -> Result<()> {
        let loss_value = &self.nodes[loss.0].value;
        if loss_value.shape() != (1, 1) {
            return Err(Error::Contract(format!(
                "backward requires a scalar loss node, got {}x{}",
                loss_value.rows(),
                loss_value.cols()
            )));
        }
        params.zero_grads();
        let mut grads: Vec<Option<DenseMatrix>> = (0..self.nodes.len()).map(|_| None).collect();
        grads[loss.0] = Some(DenseMatrix::from_vec(1, 1, vec![1.0])?);

        for idx in (0..self.nodes.len()).rev() {
            let Some(grad) = grads[idx].take() else {
                continue;
            };
            let node = &self.nodes[idx];
            match &node.op {
                Op::Const => {}
                Op::Param(name) => {
                    let slot = params.get_mut(name)?;
                    slot.grad = slot.grad.add(&grad)?;
                }
                Op::Matmul(a, b) => {
                    let ga = grad.matmul(&self.nodes[b.0].value.transpose())?;
                    let gb = self.nodes[a.0].value.transpose().matmul(&grad)?;
                    accumulate(&mut grads, *a, ga)?;
                    accumulate(&mut grads, *b, gb)?;
                }
                Op::Spmm(adj, x) => {
                    let gx = adj.spmm_transpose(&grad)?;
                    accumulate(&mut grads, *x, gx)?;
                }
                Op::Add(a, b) => {
                    accumulate(&mut grads, *a, grad.clone())?;
                    accumulate(&mut grads, *b, grad)?;
                }
                Op::AddRow(a, row) => {
                    // row gradient is the column sum of the incoming gradient
                    let mut grow = DenseMatrix::zeros(1, grad.cols());
                    for r in 0..grad.rows() {
                        for c in 0..grad.cols() {
                            grow.set(0, c, grow.get(0, c) + grad.get(r, c));
                        }
                    }
                    accumulate(&mut grads, *a, grad)?;
                    accumulate(&mut grads, *row, grow)?;
                }
                Op::Hadamard(a, b) => {
                    let ga = grad.hadamard(&self.nodes[b.0].value)?;
                    let gb = grad.hadamard(&self.nodes[a.0].value)?;
                    accumulate(&mut grads, *a, ga)?;
                    accumulate(&mut grads, *b, gb)?;
                }
                Op::Relu(a) => {
                    let mask = self.nodes[a.0].value.map(|v| if v > 0.0 { 1.0 } else { 0.0 });
                    accumulate(&mut grads, *a, grad.hadamard(&mask)?)?;
                }
                Op::ConcatCols(a, b) => {
                    let ca = self.nodes[a.0].value.cols();
                    let cb = self.nodes[b.0].value.cols();
                    let mut ga = DenseMatrix::zeros(grad.rows(), ca);
                    let mut gb = DenseMatrix::zeros(grad.rows(), cb);
                    for r in 0..grad.rows() {
                        for c in 0..ca {
                            ga.set(r, c, grad.get(r, c));
                        }
                        for c in 0..cb {
                            gb.set(r, c, grad.get(r, ca + c));
                        }
                    }
                    accumulate(&mut grads, *a, ga)?;
                    accumulate(&mut grads, *b, gb)?;
                }
                Op::Scale(a, s) => {
                    accumulate(&mut grads, *a, grad.scale(*s))?;
                }
                Op::Sum(a) => {
                    let g = grad.get(0, 0);
                    let inner = &self.nodes[a.0].value;
                    let ga = DenseMatrix::zeros(inner.rows(), inner.cols()).map(|_| g);
                    accumulate(&mut grads, *a, ga)?;
                }
                Op::Mse(a, target) => {
                    let g = grad.get(0, 0);
                    let av = &self.nodes[a.0].value;
                    let n = (av.rows() * av.cols()) as f64;
                    let ga = av.sub(target)?.scale(2.0 * g / n);
                    accumulate(&mut grads, *a, ga)?;
                }
            }
        }
        params.grads_ready = true;
        Ok(())
    }
}

fn accumulate(grads: &mut [Option<DenseMatrix>], id: NodeId, g: DenseMatrix) -> Result<()> {
    match &mut grads[id.0] {
        Some(existing) => {
            *existing = existing.add(&g)?;
        }
        slot => *slot = Some(g),
    }
    Ok(())
}
