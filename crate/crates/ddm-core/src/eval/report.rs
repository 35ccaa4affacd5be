//! Evaluation report with deterministic CSV and JSON emission.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::Write;
use std::path::Path;

/// One accuracy measurement. `step` is `None` for the majority-vote row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub step: Option<usize>,
    pub fold: usize,
    pub repetition: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub rows: Vec<EvalRow>,
    /// Mean accuracy per extraction step, ordered like the step list.
    pub per_step_mean: Vec<(usize, f64)>,
    /// Mean of the voted accuracies across folds and repetitions.
    pub voted_accuracy: f64,
    /// Population standard deviation of the voted accuracies.
    pub voted_std: f64,
}

impl EvalReport {
    pub fn from_rows(rows: Vec<EvalRow>, steps: &[usize], voted_accs: &[f64]) -> EvalReport {
        let per_step_mean = steps
            .iter()
            .map(|&k| {
                let vals: Vec<f64> = rows
                    .iter()
                    .filter(|r| r.step == Some(k))
                    .map(|r| r.accuracy)
                    .collect();
                let mean = if vals.is_empty() {
                    0.0
                } else {
                    vals.iter().sum::<f64>() / vals.len() as f64
                };
                (k, mean)
            })
            .collect();
        let n = voted_accs.len() as f64;
        let voted_accuracy = if voted_accs.is_empty() {
            0.0
        } else {
            voted_accs.iter().sum::<f64>() / n
        };
        let voted_std = if voted_accs.is_empty() {
            0.0
        } else {
            (voted_accs
                .iter()
                .map(|a| (a - voted_accuracy).powi(2))
                .sum::<f64>()
                / n)
                .sqrt()
        };
        EvalReport {
            rows,
            per_step_mean,
            voted_accuracy,
            voted_std,
        }
    }

    /// Columns `step,fold,repetition,accuracy`; the vote rows carry `vote`
    /// in the step column and a final summary row holds the mean voted
    /// accuracy.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,fold,repetition,accuracy\n");
        for r in &self.rows {
            let step = r
                .step
                .map(|s| s.to_string())
                .unwrap_or_else(|| "vote".into());
            out.push_str(&format!(
                "{step},{},{},{}\n",
                r.fold, r.repetition, r.accuracy
            ));
        }
        out.push_str(&format!("summary,-,-,{}\n", self.voted_accuracy));
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut f = File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        f.write_all(self.to_csv().as_bytes())
            .map_err(|e| Error::io(path.display().to_string(), e))
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map_err(|e| Error::Contract(format!("report serialization failed: {e}")))
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let mut f = File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        f.write_all(self.to_json()?.as_bytes())
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        f.write_all(b"\n").map_err(|e| Error::io(path.display().to_string(), e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_report() -> EvalReport {
        let rows = vec![
            EvalRow {
                step: Some(50),
                fold: 0,
                repetition: 0,
                accuracy: 0.8,
            },
            EvalRow {
                step: Some(100),
                fold: 0,
                repetition: 0,
                accuracy: 0.6,
            },
            EvalRow {
                step: None,
                fold: 0,
                repetition: 0,
                accuracy: 0.75,
            },
        ];
        EvalReport::from_rows(rows, &[50, 100], &[0.75])
    }

    #[test]
    fn csv_layout() {
        let csv = sample_report().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "step,fold,repetition,accuracy");
        assert_eq!(lines[1], "50,0,0,0.8");
        assert_eq!(lines[3], "vote,0,0,0.75");
        assert_eq!(lines[4], "summary,-,-,0.75");
    }

    #[test]
    fn json_roundtrip() {
        let report = sample_report();
        let json = report.to_json().unwrap();
        let back: EvalReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, report);
    }

    #[test]
    fn summary_statistics() {
        let report = EvalReport::from_rows(vec![], &[], &[0.5, 0.7]);
        assert!((report.voted_accuracy - 0.6).abs() < 1e-15);
        assert!((report.voted_std - 0.1).abs() < 1e-15);
    }
}
