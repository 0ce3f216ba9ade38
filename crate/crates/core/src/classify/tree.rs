use rand::Rng;

use super::{argmax, ClassifyError, FeatureMatrix};
use crate::model::ActivityLabel;

type Counts = [usize; ActivityLabel::COUNT];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeParams {
    /// `None` grows until leaves are pure or unsplittable.
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: None,
            min_leaf: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Leaf(ActivityLabel),
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// Binary tree with entropy (information gain) splits; `x <= threshold` goes left.
///
/// Impure nodes are split even at zero gain, so an unpruned tree separates
/// every pair of rows with distinct features.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    nodes: Vec<Node>,
}

/// Per-split random feature subset drawn from `rng`.
pub(crate) struct FeatureSampler<'a, R: Rng> {
    pub rng: &'a mut R,
    pub subset: usize,
}

impl DecisionTree {
    pub fn train(data: &FeatureMatrix, params: TreeParams) -> Result<Self, ClassifyError> {
        let sample: Vec<usize> = (0..data.len()).collect();
        Self::fit::<rand_chacha::ChaCha8Rng>(data, sample, params, None)
    }

    /// Grows a tree over `sample`, which may repeat row positions.
    pub(crate) fn fit<R: Rng>(
        data: &FeatureMatrix,
        mut sample: Vec<usize>,
        params: TreeParams,
        mut sampler: Option<FeatureSampler<'_, R>>,
    ) -> Result<Self, ClassifyError> {
        if sample.is_empty() {
            return Err(ClassifyError::Training("decision tree needs at least one row".into()));
        }
        if params.min_leaf == 0 {
            return Err(ClassifyError::Training("min_leaf must be at least 1".into()));
        }
        let mut tree = DecisionTree { nodes: Vec::new() };
        let mut builder = Builder {
            data,
            params,
            sampler: sampler.as_mut(),
            nodes: &mut tree.nodes,
        };
        builder.grow(&mut sample, 0);
        Ok(tree)
    }

    pub fn predict(&self, row: &[f64]) -> ActivityLabel {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf(label) => return label,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if row[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match nodes[at] {
                Node::Leaf(_) => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// The root split as `(feature index, threshold)`.
    pub fn root_split(&self) -> Option<(usize, f64)> {
        match self.nodes.first()? {
            Node::Split {
                feature, threshold, ..
            } => Some((*feature, *threshold)),
            Node::Leaf(_) => None,
        }
    }
}

struct Builder<'a, 'r, R: Rng> {
    data: &'a FeatureMatrix,
    params: TreeParams,
    sampler: Option<&'a mut FeatureSampler<'r, R>>,
    nodes: &'a mut Vec<Node>,
}

fn entropy(counts: &Counts, n: usize) -> f64 {
    let n = n as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

impl<R: Rng> Builder<'_, '_, R> {
    fn grow(&mut self, sample: &mut [usize], depth: usize) -> usize {
        let labels = self.data.labels();
        let mut counts: Counts = [0; ActivityLabel::COUNT];
        for &i in sample.iter() {
            counts[labels[i].index()] += 1;
        }
        let id = self.nodes.len();
        let majority = ActivityLabel::ALL[argmax(counts.iter().map(|&c| c as f64))];
        self.nodes.push(Node::Leaf(majority));

        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        let capped = self.params.max_depth.is_some_and(|d| depth >= d);
        if pure || capped || sample.len() < 2 * self.params.min_leaf {
            return id;
        }
        let Some((feature, threshold)) = self.best_split(sample, &counts) else {
            return id;
        };

        let rows = self.data.rows();
        sample.sort_by_key(|&i| rows[i][feature] > threshold);
        let split = sample.partition_point(|&i| rows[i][feature] <= threshold);
        let (left_half, right_half) = sample.split_at_mut(split);
        let left = self.grow(left_half, depth + 1);
        let right = self.grow(right_half, depth + 1);
        self.nodes[id] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        id
    }

    /// Highest-gain split; ties keep the lower feature, then lower threshold.
    fn best_split(&mut self, sample: &[usize], counts: &Counts) -> Option<(usize, f64)> {
        let width = self.data.features().len();
        let candidates: Vec<usize> = match self.sampler.as_deref_mut() {
            Some(s) if s.subset < width => {
                let mut c = rand::seq::index::sample(&mut *s.rng, width, s.subset).into_vec();
                c.sort_unstable();
                c
            }
            _ => (0..width).collect(),
        };
        let rows = self.data.rows();
        let labels = self.data.labels();
        let n = sample.len();
        let min_leaf = self.params.min_leaf;
        let parent = entropy(counts, n);

        let mut best: Option<(f64, usize, f64)> = None;
        let mut column: Vec<(f64, usize)> = Vec::with_capacity(n);
        for feature in candidates {
            column.clear();
            column.extend(sample.iter().map(|&i| (rows[i][feature], labels[i].index())));
            column.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut left: Counts = [0; ActivityLabel::COUNT];
            for pos in 1..n {
                left[column[pos - 1].1] += 1;
                let (lo, hi) = (column[pos - 1].0, column[pos].0);
                if pos < min_leaf || n - pos < min_leaf || lo == hi {
                    continue;
                }
                let mut right = *counts;
                for (r, l) in right.iter_mut().zip(&left) {
                    *r -= l;
                }
                let gain = parent
                    - (pos as f64 / n as f64) * entropy(&left, pos)
                    - ((n - pos) as f64 / n as f64) * entropy(&right, n - pos);
                if best.is_none_or(|(g, _, _)| gain > g) {
                    let mid = lo + (hi - lo) / 2.0;
                    let threshold = if mid < hi { mid } else { lo };
                    best = Some((gain, feature, threshold));
                }
            }
        }
        best.map(|(_, f, t)| (f, t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::testutil::matrix;
    use ActivityLabel::*;

    fn resubstitution(tree: &DecisionTree, data: &FeatureMatrix) -> f64 {
        let hits = data
            .rows()
            .iter()
            .zip(data.labels())
            .filter(|(r, l)| tree.predict(r) == **l)
            .count();
        hits as f64 / data.len() as f64
    }

    #[test]
    fn single_class_is_a_leaf() {
        let data = matrix(vec![vec![1.0], vec![2.0], vec![3.0]], vec![Rest; 3]);
        let tree = DecisionTree::train(&data, TreeParams::default()).unwrap();
        assert_eq!(tree.depth(), 0);
        assert_eq!(tree.predict(&[100.0]), Rest);
    }

    #[test]
    fn threshold_between_straddling_values() {
        let xs = [1.0, 2.0, 3.0, 4.0, 6.0, 7.0, 8.0];
        let data = matrix(
            xs.iter().map(|&x| vec![x]).collect(),
            xs.iter().map(|&x| if x < 5.0 { SitLab } else { WalkIndoor }).collect(),
        );
        let tree = DecisionTree::train(&data, TreeParams::default()).unwrap();
        assert_eq!(tree.root_split(), Some((0, 5.0)));
        assert_eq!(resubstitution(&tree, &data), 1.0);
    }

    #[test]
    fn xor_needs_two_levels() {
        // Hand split table: every root split has zero gain; the feature-0
        // split wins the tie and each child then separates on feature 1.
        let data = matrix(
            vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0], vec![1.0, 0.0]],
            vec![SitLab, SitLab, Rest, Rest],
        );
        let tree = DecisionTree::train(&data, TreeParams::default()).unwrap();
        assert_eq!(tree.root_split(), Some((0, 0.5)));
        assert_eq!(tree.depth(), 2);
        assert_eq!(resubstitution(&tree, &data), 1.0);

        let stump = DecisionTree::train(
            &data,
            TreeParams {
                max_depth: Some(1),
                min_leaf: 1,
            },
        )
        .unwrap();
        assert_eq!(resubstitution(&stump, &data), 0.5);
    }

    #[test]
    fn min_leaf_limits_splits() {
        let data = matrix(
            vec![vec![0.0], vec![1.0], vec![2.0]],
            vec![SitLab, Rest, Rest],
        );
        let tree = DecisionTree::train(
            &data,
            TreeParams {
                max_depth: None,
                min_leaf: 2,
            },
        )
        .unwrap();
        assert_eq!(tree.node_count(), 1);
        assert_eq!(tree.predict(&[0.0]), Rest);
    }

    #[test]
    fn conflicting_duplicates_fall_back_to_majority() {
        let data = matrix(
            vec![vec![1.0], vec![1.0], vec![1.0]],
            vec![Rest, ClimbStairs, Rest],
        );
        let tree = DecisionTree::train(&data, TreeParams::default()).unwrap();
        assert_eq!(tree.predict(&[1.0]), Rest);
        let tie = matrix(vec![vec![1.0], vec![1.0]], vec![Rest, ClimbStairs]);
        let tree = DecisionTree::train(&tie, TreeParams::default()).unwrap();
        assert_eq!(tree.predict(&[1.0]), ClimbStairs);
    }

    #[test]
    fn deep_tree_memorises_distinct_rows() {
        let rows: Vec<Vec<f64>> = (0..64)
            .map(|i| vec![(i * 37 % 64) as f64, (i * 11 % 7) as f64, (i % 5) as f64])
            .collect();
        let labels = (0..64).map(|i| ActivityLabel::ALL[(i * 13 + i / 3) % 8]).collect();
        let data = matrix(rows, labels);
        let tree = DecisionTree::train(&data, TreeParams::default()).unwrap();
        assert_eq!(resubstitution(&tree, &data), 1.0);
    }

    #[test]
    fn rejects_bad_params() {
        let data = matrix(vec![vec![1.0]], vec![Rest]);
        let params = TreeParams {
            max_depth: None,
            min_leaf: 0,
        };
        assert!(DecisionTree::train(&data, params).is_err());
        let empty = matrix(vec![], vec![]);
        assert!(DecisionTree::train(&empty, TreeParams::default()).is_err());
    }
}
