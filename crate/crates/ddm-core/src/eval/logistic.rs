//! Multinomial logistic regression fit by full-batch gradient descent with
//! an L2 penalty and a step-halving backoff that keeps the loss monotone.

use crate::error::{Error, Result};
use crate::numeric::{DenseMatrix, RngStream};

#[derive(Debug, Clone)]
pub struct LinearModel {
    pub weights: DenseMatrix,
    pub bias: Vec<f64>,
    pub num_classes: usize,
}

const MAX_ITERS: usize = 5000;
const GRAD_TOL: f64 = 1e-5;

fn softmax_rows(logits: &mut DenseMatrix) {
    for r in 0..logits.rows() {
        let row = logits.row_mut(r);
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
}

fn forward_probs(x: &DenseMatrix, w: &DenseMatrix, b: &[f64]) -> Result<DenseMatrix> {
    let mut logits = x.matmul(w)?;
    for r in 0..logits.rows() {
        for (c, bc) in b.iter().enumerate() {
            logits.set(r, c, logits.get(r, c) + bc);
        }
    }
    softmax_rows(&mut logits);
    Ok(logits)
}

fn loss_value(probs: &DenseMatrix, y: &[usize], w: &DenseMatrix, reg: f64) -> f64 {
    let n = y.len() as f64;
    let mut nll = 0.0;
    for (r, &label) in y.iter().enumerate() {
        nll -= probs.get(r, label).max(1e-300).ln();
    }
    nll / n + 0.5 * reg * w.values().iter().map(|v| v * v).sum::<f64>()
}

/// Fits on `(x, y)`; `y` holds labels in `0..num_classes`. At least two
/// classes must be present.
pub fn fit(
    x: &DenseMatrix,
    y: &[usize],
    num_classes: usize,
    reg: f64,
    rng: &mut RngStream,
) -> Result<LinearModel> {
    if x.rows() != y.len() {
        return Err(Error::Dimension {
            op: "train_linear_classifier",
            expected: format!("{} labels", x.rows()),
            actual: format!("{} labels", y.len()),
        });
    }
    let mut present = vec![false; num_classes];
    for &l in y {
        if l >= num_classes {
            return Err(Error::Contract(format!(
                "label {l} out of range for {num_classes} classes"
            )));
        }
        present[l] = true;
    }
    if present.iter().filter(|&&p| p).count() < 2 {
        return Err(Error::Contract(
            "classifier training needs at least two classes present".into(),
        ));
    }

    let d = x.cols();
    let n = x.rows() as f64;
    let init: Vec<f64> = (0..d * num_classes)
        .map(|_| 0.01 * rng.standard_normal())
        .collect();
    let mut w = DenseMatrix::from_vec(d, num_classes, init)?;
    let mut b = vec![0.0; num_classes];
    let mut step = 1.0;
    let mut probs = forward_probs(x, &w, &b)?;
    let mut loss = loss_value(&probs, y, &w, reg);

    for _ in 0..MAX_ITERS {
        // gradient: X^T (P - Y)/n + reg W ; bias: column means of (P - Y)
        let mut delta = probs.clone();
        for (r, &label) in y.iter().enumerate() {
            delta.set(r, label, delta.get(r, label) - 1.0);
        }
        let mut gw = x.transpose().matmul(&delta)?.scale(1.0 / n);
        for (gv, wv) in gw.values_mut().iter_mut().zip(w.values()) {
            *gv += reg * wv;
        }
        let mut gb = vec![0.0; num_classes];
        for r in 0..delta.rows() {
            for (c, g) in gb.iter_mut().enumerate() {
                *g += delta.get(r, c);
            }
        }
        for g in &mut gb {
            *g /= n;
        }

        let gnorm = (gw.values().iter().map(|v| v * v).sum::<f64>()
            + gb.iter().map(|v| v * v).sum::<f64>())
        .sqrt();
        if gnorm < GRAD_TOL {
            break;
        }

        // backtracking: halve the step until the loss does not increase
        loop {
            let wn = w.sub(&gw.scale(step))?;
            let bn: Vec<f64> = b.iter().zip(&gb).map(|(bv, gv)| bv - step * gv).collect();
            let pn = forward_probs(x, &wn, &bn)?;
            let ln = loss_value(&pn, y, &wn, reg);
            if ln <= loss || step < 1e-12 {
                w = wn;
                b = bn;
                probs = pn;
                loss = ln;
                break;
            }
            step *= 0.5;
        }
    }
    Ok(LinearModel {
        weights: w,
        bias: b,
        num_classes,
    })
}

impl LinearModel {
    pub fn predict(&self, x: &DenseMatrix) -> Result<Vec<usize>> {
        let probs = forward_probs(x, &self.weights, &self.bias)?;
        Ok((0..probs.rows())
            .map(|r| {
                let row = probs.row(r);
                row.iter()
                    .enumerate()
                    .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                    .map(|(i, _)| i)
                    .unwrap_or(0)
            })
            .collect())
    }

    pub fn accuracy(&self, x: &DenseMatrix, y: &[usize]) -> Result<f64> {
        let preds = self.predict(x)?;
        let hits = preds.iter().zip(y).filter(|(p, t)| p == t).count();
        Ok(hits as f64 / y.len() as f64)
    }

    pub fn loss(&self, x: &DenseMatrix, y: &[usize], reg: f64) -> Result<f64> {
        let probs = forward_probs(x, &self.weights, &self.bias)?;
        Ok(loss_value(&probs, y, &self.weights, reg))
    }
}
