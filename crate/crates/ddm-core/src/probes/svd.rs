//! Two-dimensional SVD projection for visualizing feature anisotropy.

use crate::error::{Error, Result};
use crate::numeric::{jacobi_eigen, DenseMatrix};
use std::fs::File;
use std::io::Write;
use std::path::Path;

#[derive(Debug, Clone)]
pub struct ProjectionResult {
    /// N x 2 coordinates in the top-2 right-singular-vector basis.
    pub coords: DenseMatrix,
    /// All singular values of the centered matrix, descending.
    pub singular_values: Vec<f64>,
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        for x in v.iter_mut() {
            *x /= n;
        }
    }
    n
}

/// Top eigenvector of a symmetric PSD matrix by power iteration, kept
/// orthogonal to `against` when given.
fn power_iterate(g: &DenseMatrix, against: Option<&[f64]>) -> Vec<f64> {
    let d = g.rows();
    let mut v: Vec<f64> = (0..d).map(|i| 1.0 + 0.01 * i as f64).collect();
    normalize(&mut v);
    for _ in 0..1000 {
        let mut next = vec![0.0; d];
        for i in 0..d {
            for j in 0..d {
                next[i] += g.get(i, j) * v[j];
            }
        }
        if let Some(u) = against {
            let dot: f64 = next.iter().zip(u).map(|(a, b)| a * b).sum();
            for (x, y) in next.iter_mut().zip(u) {
                *x -= dot * y;
            }
        }
        if normalize(&mut next) == 0.0 {
            break;
        }
        let delta = next
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        let flipped = next
            .iter()
            .zip(&v)
            .map(|(a, b)| (a + b).abs())
            .fold(0.0f64, f64::max);
        v = next;
        if delta.min(flipped) < 1e-13 {
            break;
        }
    }
    v
}

/// Centers the columns of `x`, projects onto the top-2 right singular
/// vectors (power iteration with deflation on the Gram matrix), and
/// returns the full singular-value list.
pub fn svd_project_2d(x: &DenseMatrix) -> Result<ProjectionResult> {
    if x.rows() < 2 || x.cols() < 2 {
        return Err(Error::Contract(format!(
            "svd_project_2d needs at least 2x2 input, got {}x{}",
            x.rows(),
            x.cols()
        )));
    }
    let d = x.cols();
    let means = x.col_mean();
    let mut centered = x.clone();
    for r in 0..centered.rows() {
        for c in 0..d {
            centered.set(r, c, centered.get(r, c) - means.get(0, c));
        }
    }
    let gram = centered.transpose().matmul(&centered)?;
    if gram.frobenius_norm() < 1e-24 {
        return Err(Error::Contract("svd_project_2d input has rank zero after centering".into()));
    }

    let v1 = power_iterate(&gram, None);
    let lambda1: f64 = {
        let mut gv = vec![0.0; d];
        for i in 0..d {
            for j in 0..d {
                gv[i] += gram.get(i, j) * v1[j];
            }
        }
        v1.iter().zip(&gv).map(|(a, b)| a * b).sum()
    };
    let mut deflated = gram.clone();
    for i in 0..d {
        for j in 0..d {
            deflated.set(i, j, deflated.get(i, j) - lambda1 * v1[i] * v1[j]);
        }
    }
    let v2 = power_iterate(&deflated, Some(&v1));

    let mut coords = DenseMatrix::zeros(x.rows(), 2);
    for r in 0..x.rows() {
        let row = centered.row(r);
        let a: f64 = row.iter().zip(&v1).map(|(x, v)| x * v).sum();
        let b: f64 = row.iter().zip(&v2).map(|(x, v)| x * v).sum();
        coords.set(r, 0, a);
        coords.set(r, 1, b);
    }
    let (eigs, _) = jacobi_eigen(&gram)?;
    let singular_values: Vec<f64> = eigs.iter().map(|&l| l.max(0.0).sqrt()).collect();
    Ok(ProjectionResult {
        coords,
        singular_values,
    })
}

/// Rows `point_id,x,y,label`.
pub fn write_projection_csv(path: &Path, proj: &ProjectionResult, labels: &[usize]) -> Result<()> {
    if labels.len() != proj.coords.rows() {
        return Err(Error::Dimension {
            op: "write_projection_csv",
            expected: format!("{} labels", proj.coords.rows()),
            actual: format!("{} labels", labels.len()),
        });
    }
    let mut out = String::from("point_id,x,y,label\n");
    for (i, &l) in labels.iter().enumerate() {
        out.push_str(&format!(
            "{i},{},{},{l}\n",
            proj.coords.get(i, 0),
            proj.coords.get(i, 1)
        ));
    }
    let mut f = File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    f.write_all(out.as_bytes())
        .map_err(|e| Error::io(path.display().to_string(), e))
}
