//! Activity classifiers, stratified cross-validation and confusion matrices.
//!
//! Three models are implemented from scratch: Gaussian naive Bayes, a
//! binary entropy-split decision tree and a bagged random forest over it.
//! All argmax ties go to the lowest [`ActivityLabel`] index.

mod confusion;
mod cv;
mod forest;
mod naive_bayes;
mod tree;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::features::{Feature, FeatureVector};
use crate::model::ActivityLabel;

pub use confusion::{confusion, ConfusionMatrix};
pub use cv::{cross_validate, stratified_folds, CvReport};
pub use forest::{ForestParams, RandomForest};
pub use naive_bayes::{NaiveBayes, VARIANCE_FLOOR};
pub use tree::{DecisionTree, TreeParams};

#[derive(Debug, Error, PartialEq)]
pub enum ClassifyError {
    #[error("training error: {0}")]
    Training(String),
    #[error("row {row} lacks feature `{feature}`")]
    MissingFeature { row: usize, feature: Feature },
    #[error("row {0} has no activity label")]
    Unlabeled(usize),
    #[error("input error: {0}")]
    Input(String),
    #[error("fold error: {0}")]
    Fold(String),
    #[error("unknown {kind} `{value}`")]
    Unknown { kind: &'static str, value: String },
}

/// Which feature columns a classifier sees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FeatureMask {
    Acceleration,
    Environment,
    Fused,
}

impl FeatureMask {
    pub const ALL: [FeatureMask; 3] = [
        FeatureMask::Acceleration,
        FeatureMask::Environment,
        FeatureMask::Fused,
    ];

    pub fn features(self) -> &'static [Feature] {
        use Feature::*;
        match self {
            FeatureMask::Acceleration => &[AccelSdX, AccelSdY, AccelSdZ],
            FeatureMask::Environment => &[TempGradient, TempSd, HumiditySd, LightLr, DtwDist],
            FeatureMask::Fused => &Feature::ALL,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureMask::Acceleration => "accel",
            FeatureMask::Environment => "env",
            FeatureMask::Fused => "fused",
        }
    }

    /// Column title in the accuracy table.
    pub fn title(self) -> &'static str {
        match self {
            FeatureMask::Acceleration => "Acceleration",
            FeatureMask::Environment => "Environment",
            FeatureMask::Fused => "Acc. + Environ.",
        }
    }

    pub fn covers(self, row: &FeatureVector) -> bool {
        self.features().iter().all(|&f| row.get(f).is_some())
    }
}

impl fmt::Display for FeatureMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FeatureMask {
    type Err = ClassifyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FeatureMask::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| ClassifyError::Unknown {
                kind: "feature mask",
                value: s.to_string(),
            })
    }
}

/// Labeled rows restricted to the features of one mask.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    features: Vec<Feature>,
    mask: FeatureMask,
    rows: Vec<Vec<f64>>,
    labels: Vec<ActivityLabel>,
    ids: Vec<u64>,
}

impl FeatureMatrix {
    /// Row ids default to the input position.
    pub fn from_vectors(vectors: &[FeatureVector], mask: FeatureMask) -> Result<Self, ClassifyError> {
        let ids = (0..vectors.len() as u64).collect();
        Self::with_ids(vectors, ids, mask)
    }

    /// Every row must carry every mask feature and a label.
    pub fn with_ids(vectors: &[FeatureVector], ids: Vec<u64>, mask: FeatureMask) -> Result<Self, ClassifyError> {
        if ids.len() != vectors.len() {
            return Err(ClassifyError::Input(format!(
                "{} ids for {} rows",
                ids.len(),
                vectors.len()
            )));
        }
        let features = mask.features().to_vec();
        let rows = extract_rows(vectors, &features)?;
        let labels = vectors
            .iter()
            .enumerate()
            .map(|(i, v)| v.label.ok_or(ClassifyError::Unlabeled(i)))
            .collect::<Result<_, _>>()?;
        Ok(FeatureMatrix {
            features,
            mask,
            rows,
            labels,
            ids,
        })
    }

    /// Keeps only the vectors that are labeled and cover the mask.
    pub fn from_complete(vectors: &[FeatureVector], mask: FeatureMask) -> Result<Self, ClassifyError> {
        let kept: Vec<FeatureVector> = vectors
            .iter()
            .filter(|v| v.label.is_some() && mask.covers(v))
            .copied()
            .collect();
        Self::from_vectors(&kept, mask)
    }

    pub fn features(&self) -> &[Feature] {
        &self.features
    }

    pub fn mask(&self) -> FeatureMask {
        self.mask
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn labels(&self) -> &[ActivityLabel] {
        &self.labels
    }

    pub fn ids(&self) -> &[u64] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn class_counts(&self) -> [usize; ActivityLabel::COUNT] {
        let mut counts = [0; ActivityLabel::COUNT];
        for l in &self.labels {
            counts[l.index()] += 1;
        }
        counts
    }

    /// Sub-matrix of the given row positions, in the given order.
    pub fn subset(&self, positions: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            features: self.features.clone(),
            mask: self.mask,
            rows: positions.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: positions.iter().map(|&i| self.labels[i]).collect(),
            ids: positions.iter().map(|&i| self.ids[i]).collect(),
        }
    }
}

fn extract_rows(vectors: &[FeatureVector], features: &[Feature]) -> Result<Vec<Vec<f64>>, ClassifyError> {
    vectors
        .iter()
        .enumerate()
        .map(|(row, v)| {
            features
                .iter()
                .map(|&feature| v.get(feature).ok_or(ClassifyError::MissingFeature { row, feature }))
                .collect()
        })
        .collect()
}

/// Model family and hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelSpec {
    NaiveBayes,
    Tree(TreeParams),
    Forest(ForestParams),
}

impl ModelSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::NaiveBayes => "nb",
            ModelSpec::Tree(_) => "tree",
            ModelSpec::Forest(_) => "forest",
        }
    }

    /// Row title in the accuracy table.
    pub fn title(&self) -> &'static str {
        match self {
            ModelSpec::NaiveBayes => "Naive Bayes",
            ModelSpec::Tree(_) => "Decision Tree",
            ModelSpec::Forest(_) => "Random Forest",
        }
    }

    /// `seed` only matters for the forest.
    pub fn train(&self, data: &FeatureMatrix, seed: u64) -> Result<Model, ClassifyError> {
        let kind = match self {
            ModelSpec::NaiveBayes => ModelKind::NaiveBayes(NaiveBayes::train(data)?),
            ModelSpec::Tree(p) => ModelKind::Tree(DecisionTree::train(data, *p)?),
            ModelSpec::Forest(p) => ModelKind::Forest(RandomForest::train(data, *p, seed)?),
        };
        Ok(Model {
            features: data.features.clone(),
            kind,
        })
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelSpec {
    type Err = ClassifyError;

    /// Parses a model name with default hyperparameters.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "nb" => Ok(ModelSpec::NaiveBayes),
            "tree" => Ok(ModelSpec::Tree(TreeParams::default())),
            "forest" => Ok(ModelSpec::Forest(ForestParams::default())),
            other => Err(ClassifyError::Unknown {
                kind: "model",
                value: other.to_string(),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum ModelKind {
    NaiveBayes(NaiveBayes),
    Tree(DecisionTree),
    Forest(RandomForest),
}

/// A trained classifier bound to its feature columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    features: Vec<Feature>,
    kind: ModelKind,
}

impl Model {
    pub fn features(&self) -> &[Feature] {
        &self.features
    }

    pub fn predict_row(&self, row: &[f64]) -> ActivityLabel {
        match &self.kind {
            ModelKind::NaiveBayes(m) => m.predict(row),
            ModelKind::Tree(m) => m.predict(row),
            ModelKind::Forest(m) => m.predict(row),
        }
    }

    pub fn predict_matrix(&self, data: &FeatureMatrix) -> Vec<ActivityLabel> {
        data.rows.iter().map(|r| self.predict_row(r)).collect()
    }
}

/// One label per row; rows must carry every feature the model was trained on.
pub fn predict(model: &Model, rows: &[FeatureVector]) -> Result<Vec<ActivityLabel>, ClassifyError> {
    Ok(extract_rows(rows, &model.features)?
        .iter()
        .map(|r| model.predict_row(r))
        .collect())
}

/// Index of the largest value; the first wins ties.
pub(crate) fn argmax<I: IntoIterator<Item = f64>>(values: I) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in values.into_iter().enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best.0
}

#[cfg(test)]
pub(crate) mod testutil {
    use super::*;

    /// Matrix over the first `width` features, bypassing `FeatureVector`.
    pub fn matrix(rows: Vec<Vec<f64>>, labels: Vec<ActivityLabel>) -> FeatureMatrix {
        let width = rows.first().map_or(0, |r| r.len());
        let ids = (0..rows.len() as u64).collect();
        FeatureMatrix {
            features: Feature::ALL[..width].to_vec(),
            mask: FeatureMask::Fused,
            rows,
            labels,
            ids,
        }
    }
}
