//! Fisher linear discriminant fitting and the SNR quotient
//! w'S_B w / w'S_W w used by the diffusion-step probes.

use crate::error::{Error, Result};
use crate::numeric::{solve_linear, DenseMatrix};

/// Ridge added to S_W before inversion.
pub const FISHER_RIDGE: f64 = 1e-6;

const POWER_ITERS: usize = 500;

#[derive(Debug, Clone)]
pub struct FisherDiscriminant {
    /// Unit-norm discriminant direction.
    pub w: Vec<f64>,
    pub s_b: DenseMatrix,
    pub s_w: DenseMatrix,
}

/// Between-class scatter S_B = sum_c n_c (m_c - m)(m_c - m)' and
/// within-class scatter S_W = sum_c sum_{i in c} (h_i - m_c)(h_i - m_c)'.
pub fn scatter_matrices(h: &DenseMatrix, y: &[usize]) -> Result<(DenseMatrix, DenseMatrix)> {
    if h.rows() != y.len() {
        return Err(Error::Dimension {
            op: "scatter_matrices",
            expected: format!("{} labels", h.rows()),
            actual: format!("{} labels", y.len()),
        });
    }
    let num_classes = y.iter().max().map(|m| m + 1).unwrap_or(0);
    let d = h.cols();
    let mut counts = vec![0usize; num_classes];
    let mut means = DenseMatrix::zeros(num_classes, d);
    for (r, &c) in y.iter().enumerate() {
        counts[c] += 1;
        for j in 0..d {
            means.set(c, j, means.get(c, j) + h.get(r, j));
        }
    }
    let present = counts.iter().filter(|&&n| n > 0).count();
    if present < 2 {
        return Err(Error::Contract(
            "fisher scatter needs at least two classes present".into(),
        ));
    }
    if counts.iter().any(|&n| n == 1) {
        return Err(Error::Contract(
            "fisher scatter needs at least two samples per class".into(),
        ));
    }
    for (c, &n) in counts.iter().enumerate() {
        if n > 0 {
            let inv = 1.0 / n as f64;
            for j in 0..d {
                means.set(c, j, means.get(c, j) * inv);
            }
        }
    }
    let total = y.len() as f64;
    let mut grand = vec![0.0; d];
    for r in 0..h.rows() {
        for j in 0..d {
            grand[j] += h.get(r, j);
        }
    }
    for g in &mut grand {
        *g /= total;
    }

    let mut s_b = DenseMatrix::zeros(d, d);
    for (c, &n) in counts.iter().enumerate() {
        if n == 0 {
            continue;
        }
        let diff: Vec<f64> = (0..d).map(|j| means.get(c, j) - grand[j]).collect();
        for i in 0..d {
            for j in 0..d {
                s_b.set(i, j, s_b.get(i, j) + n as f64 * diff[i] * diff[j]);
            }
        }
    }
    let mut s_w = DenseMatrix::zeros(d, d);
    for (r, &c) in y.iter().enumerate() {
        let diff: Vec<f64> = (0..d).map(|j| h.get(r, j) - means.get(c, j)).collect();
        for i in 0..d {
            for j in 0..d {
                s_w.set(i, j, s_w.get(i, j) + diff[i] * diff[j]);
            }
        }
    }
    Ok((s_b, s_w))
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn quadratic_form(m: &DenseMatrix, v: &[f64]) -> f64 {
    let d = v.len();
    let mut acc = 0.0;
    for i in 0..d {
        for j in 0..d {
            acc += v[i] * m.get(i, j) * v[j];
        }
    }
    acc
}

/// Fits the top generalized eigenvector of (S_W + ridge I)^{-1} S_B by
/// power iteration with a linear solve per step.
pub fn fisher_fit(h: &DenseMatrix, y: &[usize]) -> Result<FisherDiscriminant> {
    let (s_b, s_w) = scatter_matrices(h, y)?;
    let d = h.cols();
    let mut ridged = s_w.clone();
    for i in 0..d {
        ridged.set(i, i, ridged.get(i, i) + FISHER_RIDGE);
    }
    // deterministic start with unequal components
    let mut w: Vec<f64> = (0..d).map(|i| 1.0 + 0.01 * i as f64).collect();
    let n0 = norm(&w);
    for v in &mut w {
        *v /= n0;
    }
    for _ in 0..POWER_ITERS {
        let mut bv = vec![0.0; d];
        for i in 0..d {
            for j in 0..d {
                bv[i] += s_b.get(i, j) * w[j];
            }
        }
        if norm(&bv) < 1e-280 {
            // zero between-class scatter: any direction gives SNR 0
            break;
        }
        let next = solve_linear(&ridged, &bv)?;
        let nn = norm(&next);
        if nn < 1e-280 {
            break;
        }
        let candidate: Vec<f64> = next.iter().map(|v| v / nn).collect();
        let delta = candidate
            .iter()
            .zip(&w)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        let flipped = candidate
            .iter()
            .zip(&w)
            .map(|(a, b)| (a + b).abs())
            .fold(0.0f64, f64::max);
        w = candidate;
        if delta.min(flipped) < 1e-13 {
            break;
        }
    }
    Ok(FisherDiscriminant { w, s_b, s_w })
}

impl FisherDiscriminant {
    /// w'S_B w / w'S_W w at the fitted direction.
    pub fn snr(&self) -> f64 {
        snr_along(&self.w, &self.s_b, &self.s_w)
    }
}

/// The Fisher quotient along a fixed direction; a vanishing within-class
/// scatter falls back to the ridge so the quotient stays finite.
pub fn snr_along(w: &[f64], s_b: &DenseMatrix, s_w: &DenseMatrix) -> f64 {
    let num = quadratic_form(s_b, w);
    let mut den = quadratic_form(s_w, w);
    if den <= 0.0 {
        den = FISHER_RIDGE * w.iter().map(|x| x * x).sum::<f64>();
    }
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{jacobi_eigen, RngStream};

    #[test]
    fn one_dimensional_hand_oracle() {
        let h = DenseMatrix::from_rows(&[vec![9.0], vec![11.0], vec![-9.0], vec![-11.0]]).unwrap();
        let y = [0, 0, 1, 1];
        let (s_b, s_w) = scatter_matrices(&h, &y).unwrap();
        assert!((s_b.get(0, 0) - 400.0).abs() < 1e-9);
        assert!((s_w.get(0, 0) - 4.0).abs() < 1e-9);
        let fit = fisher_fit(&h, &y).unwrap();
        assert!((fit.snr() - 100.0).abs() < 1e-3, "snr was {}", fit.snr());
    }

    #[test]
    fn identical_class_distributions_give_zero_snr() {
        let pts = [vec![1.0, 2.0], vec![3.0, -1.0], vec![0.5, 0.5]];
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for c in 0..2usize {
            for p in &pts {
                rows.push(p.clone());
                y.push(c);
            }
        }
        let h = DenseMatrix::from_rows(&rows).unwrap();
        let fit = fisher_fit(&h, &y).unwrap();
        assert!(fit.snr().abs() < 1e-9, "snr was {}", fit.snr());
    }

    #[test]
    fn degenerate_class_sizes_rejected() {
        let h = DenseMatrix::from_rows(&[vec![1.0], vec![2.0], vec![3.0]]).unwrap();
        assert!(fisher_fit(&h, &[0, 0, 1]).is_err());
        assert!(fisher_fit(&h, &[0, 0, 0]).is_err());
    }

    /// Dense generalized-eigensolver oracle: symmetrize via
    /// S_W^{-1/2} S_B S_W^{-1/2} and take the top eigenvector.
    fn dense_oracle(s_b: &DenseMatrix, s_w: &DenseMatrix) -> Vec<f64> {
        let d = s_w.rows();
        let mut ridged = s_w.clone();
        for i in 0..d {
            ridged.set(i, i, ridged.get(i, i) + FISHER_RIDGE);
        }
        let (vals, vecs) = jacobi_eigen(&ridged).unwrap();
        // S_W^{-1/2} = V diag(1/sqrt(vals)) V'
        let mut inv_sqrt = DenseMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                let mut acc = 0.0;
                for k in 0..d {
                    acc += vecs.get(i, k) * vecs.get(j, k) / vals[k].sqrt();
                }
                inv_sqrt.set(i, j, acc);
            }
        }
        let sym = inv_sqrt.matmul(s_b).unwrap().matmul(&inv_sqrt).unwrap();
        let (_, u) = jacobi_eigen(&sym).unwrap();
        let top: Vec<f64> = (0..d).map(|i| u.get(i, 0)).collect();
        let w: Vec<f64> = (0..d)
            .map(|i| (0..d).map(|j| inv_sqrt.get(i, j) * top[j]).sum())
            .collect();
        let n = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        w.iter().map(|x| x / n).collect()
    }

    #[test]
    fn three_class_direction_matches_dense_oracle() {
        let mut rng = RngStream::new(21);
        let centers = [
            [3.0, 0.0, 0.0, 1.0, -1.0],
            [0.0, 3.0, 0.0, -1.0, 1.0],
            [0.0, 0.0, 3.0, 0.0, 0.0],
        ];
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for (c, center) in centers.iter().enumerate() {
            for _ in 0..40 {
                rows.push(center.iter().map(|m| m + rng.standard_normal()).collect());
                y.push(c);
            }
        }
        let h = DenseMatrix::from_rows(&rows).unwrap();
        let fit = fisher_fit(&h, &y).unwrap();
        let oracle = dense_oracle(&fit.s_b, &fit.s_w);
        let cosine: f64 = fit.w.iter().zip(&oracle).map(|(a, b)| a * b).sum();
        assert!(
            cosine.abs() >= 0.999,
            "cosine to oracle direction was {cosine}"
        );
    }

    #[test]
    fn snr_invariant_to_affine_reparameterization_with_refit() {
        let mut rng = RngStream::new(22);
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for c in 0..2 {
            let shift = if c == 0 { 1.5 } else { -1.5 };
            for _ in 0..60 {
                rows.push(vec![
                    shift + rng.standard_normal(),
                    rng.standard_normal(),
                    rng.standard_normal(),
                ]);
                y.push(c);
            }
        }
        let h = DenseMatrix::from_rows(&rows).unwrap();
        let base = fisher_fit(&h, &y).unwrap().snr();

        // random invertible map: Gaussian plus a diagonal boost
        let mut t = rng.gaussian(3, 3).unwrap();
        for i in 0..3 {
            t.set(i, i, t.get(i, i) + 3.0);
        }
        let shift: Vec<f64> = (0..3).map(|_| rng.standard_normal()).collect();
        let mut mapped = h.matmul(&t).unwrap();
        for r in 0..mapped.rows() {
            for (j, s) in shift.iter().enumerate() {
                mapped.set(r, j, mapped.get(r, j) + s);
            }
        }
        let refit = fisher_fit(&mapped, &y).unwrap().snr();
        let rel = (refit - base).abs() / base;
        assert!(rel <= 1e-6, "relative SNR change {rel}");
    }
}
