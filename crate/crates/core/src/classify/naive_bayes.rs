use std::f64::consts::PI;

use super::{argmax, ClassifyError, FeatureMatrix};
use crate::model::ActivityLabel;

/// Lower bound on every per-feature variance, in feature units squared.
pub const VARIANCE_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
struct ClassModel {
    label: ActivityLabel,
    log_prior: f64,
    means: Vec<f64>,
    variances: Vec<f64>,
}

/// Gaussian naive Bayes with relative-frequency priors.
#[derive(Debug, Clone, PartialEq)]
pub struct NaiveBayes {
    classes: Vec<ClassModel>,
}

impl NaiveBayes {
    pub fn train(data: &FeatureMatrix) -> Result<Self, ClassifyError> {
        let counts = data.class_counts();
        let present: Vec<ActivityLabel> = ActivityLabel::ALL
            .into_iter()
            .filter(|l| counts[l.index()] > 0)
            .collect();
        if present.len() < 2 {
            return Err(ClassifyError::Training(format!(
                "naive Bayes needs at least 2 classes, got {}",
                present.len()
            )));
        }
        if let Some(l) = present.iter().find(|l| counts[l.index()] < 2) {
            return Err(ClassifyError::Training(format!("class {l} has fewer than 2 rows")));
        }
        let width = data.features().len();
        let n = data.len() as f64;
        let classes = present
            .into_iter()
            .map(|label| {
                let rows: Vec<&Vec<f64>> = data
                    .rows()
                    .iter()
                    .zip(data.labels())
                    .filter(|(_, l)| **l == label)
                    .map(|(r, _)| r)
                    .collect();
                let nc = rows.len() as f64;
                let means: Vec<f64> = (0..width)
                    .map(|f| rows.iter().map(|r| r[f]).sum::<f64>() / nc)
                    .collect();
                let variances = (0..width)
                    .map(|f| {
                        let var = rows.iter().map(|r| (r[f] - means[f]).powi(2)).sum::<f64>() / nc;
                        var.max(VARIANCE_FLOOR)
                    })
                    .collect();
                ClassModel {
                    label,
                    log_prior: (nc / n).ln(),
                    means,
                    variances,
                }
            })
            .collect();
        Ok(NaiveBayes { classes })
    }

    pub fn log_posteriors(&self, row: &[f64]) -> Vec<f64> {
        self.classes
            .iter()
            .map(|c| {
                c.log_prior
                    + row
                        .iter()
                        .zip(c.means.iter().zip(&c.variances))
                        .map(|(x, (m, v))| -0.5 * (2.0 * PI * v).ln() - (x - m).powi(2) / (2.0 * v))
                        .sum::<f64>()
            })
            .collect()
    }

    pub fn predict(&self, row: &[f64]) -> ActivityLabel {
        self.classes[argmax(self.log_posteriors(row))].label
    }
}
