use super::ClassifyError;
use crate::model::ActivityLabel;

/// Rows are the true class, columns the prediction, both in `classes` order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    classes: Vec<ActivityLabel>,
    counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn empty(classes: &[ActivityLabel]) -> Self {
        ConfusionMatrix {
            classes: classes.to_vec(),
            counts: vec![vec![0; classes.len()]; classes.len()],
        }
    }

    pub fn classes(&self) -> &[ActivityLabel] {
        &self.classes
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn get(&self, truth: ActivityLabel, predicted: ActivityLabel) -> u64 {
        match (self.position(truth), self.position(predicted)) {
            (Some(i), Some(j)) => self.counts[i][j],
            _ => 0,
        }
    }

    fn position(&self, label: ActivityLabel) -> Option<usize> {
        self.classes.iter().position(|&c| c == label)
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.classes.len()).map(|i| self.counts[i][i]).sum()
    }

    pub fn row_sums(&self) -> Vec<u64> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    /// `trace / total`, or 0 for an empty matrix.
    pub fn accuracy(&self) -> f64 {
        match self.total() {
            0 => 0.0,
            t => self.trace() as f64 / t as f64,
        }
    }

    /// Adds `other` cell by cell; both must share the class order.
    pub fn merge(&mut self, other: &ConfusionMatrix) -> Result<(), ClassifyError> {
        if self.classes != other.classes {
            return Err(ClassifyError::Input("confusion matrices have different classes".into()));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        Ok(())
    }
}

pub fn confusion(
    y_true: &[ActivityLabel],
    y_pred: &[ActivityLabel],
    classes: &[ActivityLabel],
) -> Result<ConfusionMatrix, ClassifyError> {
    if y_true.len() != y_pred.len() {
        return Err(ClassifyError::Input(format!(
            "{} true labels but {} predictions",
            y_true.len(),
            y_pred.len()
        )));
    }
    let mut m = ConfusionMatrix::empty(classes);
    for (&t, &p) in y_true.iter().zip(y_pred) {
        let lookup = |l: ActivityLabel| {
            m.position(l)
                .ok_or_else(|| ClassifyError::Input(format!("label {l} is not among the matrix classes")))
        };
        let (i, j) = (lookup(t)?, lookup(p)?);
        m.counts[i][j] += 1;
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ActivityLabel::*;

    #[test]
    fn perfect_predictions_are_diagonal() {
        let y = [Rest, SitLab, SitLab, ClimbStairs];
        let m = confusion(&y, &y, &ActivityLabel::ALL).unwrap();
        assert_eq!(m.accuracy(), 1.0);
        assert_eq!(m.trace(), m.total());
    }

    #[test]
    fn direct_counting() {
        let m = confusion(&[SitLab, SitLab, Rest], &[SitLab, Rest, Rest], &[SitLab, Rest]).unwrap();
        assert_eq!(m.counts(), &[vec![1, 1], vec![0, 1]]);
        assert!((m.accuracy() - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(m.row_sums(), vec![2, 1]);
    }

    #[test]
    fn one_predicted_class_fills_one_column() {
        let truth = [Rest, SitLab, WalkIndoor, WalkIndoor];
        let m = confusion(&truth, &[WalkIndoor; 4], &ActivityLabel::REPORT_ORDER).unwrap();
        let col = ActivityLabel::REPORT_ORDER.iter().position(|&l| l == WalkIndoor).unwrap();
        for row in m.counts() {
            for (j, &c) in row.iter().enumerate() {
                assert!(j == col || c == 0);
            }
        }
        assert_eq!(m.get(Rest, WalkIndoor), 1);
    }

    #[test]
    fn input_errors() {
        assert!(matches!(confusion(&[Rest], &[], &[Rest]), Err(ClassifyError::Input(_))));
        assert!(matches!(confusion(&[Rest], &[SitLab], &[Rest]), Err(ClassifyError::Input(_))));
    }

    #[test]
    fn merge_adds_cells() {
        let mut a = confusion(&[Rest], &[Rest], &[Rest, SitLab]).unwrap();
        let b = confusion(&[SitLab], &[Rest], &[Rest, SitLab]).unwrap();
        a.merge(&b).unwrap();
        assert_eq!(a.total(), 2);
        assert_eq!(a.trace(), 1);
        assert!(a.merge(&ConfusionMatrix::empty(&[Rest])).is_err());
    }
}
