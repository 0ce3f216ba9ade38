use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::tree::FeatureSampler;
use super::{argmax, ClassifyError, DecisionTree, FeatureMatrix, TreeParams};
use crate::model::ActivityLabel;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ForestParams {
    pub n_trees: usize,
    pub tree: TreeParams,
    /// Features tried per split; `None` means `ceil(sqrt(d))`.
    pub feature_subset: Option<usize>,
    pub bootstrap: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            tree: TreeParams::default(),
            feature_subset: None,
            bootstrap: true,
        }
    }
}

/// Majority vote over bagged trees with random per-split feature subsets.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomForest {
    trees: Vec<DecisionTree>,
}

impl RandomForest {
    /// Tree `t` draws from ChaCha stream `t` of `seed`, so the forest does
    /// not depend on how the trees are scheduled.
    pub fn train(data: &FeatureMatrix, params: ForestParams, seed: u64) -> Result<Self, ClassifyError> {
        if params.n_trees == 0 {
            return Err(ClassifyError::Training("forest needs at least one tree".into()));
        }
        if data.is_empty() {
            return Err(ClassifyError::Training("forest needs at least one row".into()));
        }
        let width = data.features().len();
        let subset = params
            .feature_subset
            .unwrap_or_else(|| (width as f64).sqrt().ceil() as usize)
            .clamp(1, width.max(1));
        let n = data.len();
        let trees = (0..params.n_trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(t as u64);
                let sample: Vec<usize> = if params.bootstrap {
                    (0..n).map(|_| rng.random_range(0..n)).collect()
                } else {
                    (0..n).collect()
                };
                let sampler = FeatureSampler {
                    rng: &mut rng,
                    subset,
                };
                DecisionTree::fit(data, sample, params.tree, Some(sampler))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(RandomForest { trees })
    }

    pub fn predict(&self, row: &[f64]) -> ActivityLabel {
        let mut votes = [0usize; ActivityLabel::COUNT];
        for t in &self.trees {
            votes[t.predict(row).index()] += 1;
        }
        ActivityLabel::ALL[argmax(votes.iter().map(|&v| v as f64))]
    }

    pub fn trees(&self) -> &[DecisionTree] {
        &self.trees
    }
}
