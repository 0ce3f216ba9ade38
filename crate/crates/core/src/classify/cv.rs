use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{confusion, ClassifyError, ConfusionMatrix, FeatureMask, FeatureMatrix, ModelSpec};
use crate::model::ActivityLabel;

#[derive(Debug, Clone, PartialEq)]
pub struct CvReport {
    pub fold_accuracies: Vec<f64>,
    pub mean_accuracy: f64,
    /// Held-out predictions of every fold, classes in report order.
    pub confusion: ConfusionMatrix,
    pub model: ModelSpec,
    pub mask: FeatureMask,
    pub seed: u64,
}

impl CvReport {
    /// Pooled held-out accuracy, `trace / total` of the aggregated matrix.
    pub fn accuracy(&self) -> f64 {
        self.confusion.accuracy()
    }

    pub fn folds(&self) -> usize {
        self.fold_accuracies.len()
    }
}

/// Test-set positions for each of `k` folds, each sorted by row id.
///
/// Within a class, rows are ordered by id, shuffled, then dealt round-robin;
/// the dealing offset carries over between classes so fold sizes differ by
/// at most one. Depending only on ids makes the split invariant to input order.
pub fn stratified_folds(
    labels: &[ActivityLabel],
    ids: &[u64],
    k: usize,
    seed: u64,
) -> Result<Vec<Vec<usize>>, ClassifyError> {
    if k < 2 {
        return Err(ClassifyError::Fold(format!("need at least 2 folds, got {k}")));
    }
    if labels.len() != ids.len() {
        return Err(ClassifyError::Input(format!("{} labels for {} ids", labels.len(), ids.len())));
    }
    let mut sorted_ids = ids.to_vec();
    sorted_ids.sort_unstable();
    if sorted_ids.windows(2).any(|w| w[0] == w[1]) {
        return Err(ClassifyError::Input("row ids are not unique".into()));
    }
    let mut folds = vec![Vec::new(); k];
    let mut offset = 0;
    for class in ActivityLabel::ALL {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if members.is_empty() {
            continue;
        }
        if members.len() < k {
            return Err(ClassifyError::Fold(format!(
                "class {class} has {} rows, fewer than {k} folds",
                members.len()
            )));
        }
        members.sort_by_key(|&i| ids[i]);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(class.index() as u64);
        members.shuffle(&mut rng);
        for (j, &pos) in members.iter().enumerate() {
            folds[(offset + j) % k].push(pos);
        }
        offset = (offset + members.len()) % k;
    }
    for fold in &mut folds {
        fold.sort_by_key(|&i| ids[i]);
    }
    Ok(folds)
}

/// Stratified k-fold evaluation. Fold `f` trains with seed `seed + f`.
pub fn cross_validate(data: &FeatureMatrix, spec: &ModelSpec, k: usize, seed: u64) -> Result<CvReport, ClassifyError> {
    let folds = stratified_folds(data.labels(), data.ids(), k, seed)?;
    let counts = data.class_counts();
    let classes: Vec<ActivityLabel> = ActivityLabel::REPORT_ORDER
        .into_iter()
        .filter(|l| counts[l.index()] > 0)
        .collect();

    let mut fold_of = vec![0; data.len()];
    for (f, fold) in folds.iter().enumerate() {
        for &i in fold {
            fold_of[i] = f;
        }
    }
    let mut by_id: Vec<usize> = (0..data.len()).collect();
    by_id.sort_by_key(|&i| data.ids()[i]);

    let per_fold = folds
        .par_iter()
        .enumerate()
        .map(|(f, test)| {
            let train: Vec<usize> = by_id.iter().copied().filter(|&i| fold_of[i] != f).collect();
            let model = spec.train(&data.subset(&train), seed.wrapping_add(f as u64))?;
            let test_data = data.subset(test);
            let predicted = model.predict_matrix(&test_data);
            confusion(test_data.labels(), &predicted, &classes)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut pooled = ConfusionMatrix::empty(&classes);
    for m in &per_fold {
        pooled.merge(m)?;
    }
    let fold_accuracies: Vec<f64> = per_fold.iter().map(|m| m.accuracy()).collect();
    let mean_accuracy = fold_accuracies.iter().sum::<f64>() / k as f64;
    Ok(CvReport {
        fold_accuracies,
        mean_accuracy,
        confusion: pooled,
        model: *spec,
        mask: data.mask(),
        seed,
    })
}
