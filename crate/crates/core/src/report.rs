//! Fixed-width text tables with CSV twins.

use std::fmt::Write as _;

use thiserror::Error;

use crate::classify::{ConfusionMatrix, CvReport, FeatureMask};
use crate::pipeline::{HypothesisResult, PipelineResults};

#[derive(Debug, Error, PartialEq)]
pub enum ReportError {
    #[error("nothing to report")]
    Empty,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportFile {
    pub name: String,
    pub contents: String,
}

fn file(name: impl Into<String>, contents: String) -> ReportFile {
    ReportFile {
        name: name.into(),
        contents,
    }
}

fn csv_text(rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

pub fn significance_text(results: &[HypothesisResult]) -> String {
    let mut out = String::from("Permutation test statistics\n\n");
    let _ = writeln!(
        out,
        "{:<10} {:<26} {:>8} {:>13} {:>13} {:>8}",
        "", "groups", "JSD_obs", "mu(JSD_perm)", "sd(JSD_perm)", "p-value"
    );
    for r in results {
        let (a, b) = r.hypothesis.groups();
        let _ = writeln!(
            out,
            "{:<10} {:<26} {:>8.4} {:>13.4} {:>13.4} {:>8}",
            r.hypothesis.tag(),
            format!("{a} vs {b}"),
            r.test.observed_jsd,
            r.test.mean_permuted,
            r.test.sd_permuted,
            format!("{:e}", r.test.p_value),
        );
    }
    let m = results.first().map_or(0, |r| r.test.permuted_jsds.len());
    let _ = writeln!(out, "\np-value = rank of the observed JSD among {} values / {}", m + 1, m + 1);
    out
}

pub fn significance_csv(results: &[HypothesisResult]) -> String {
    let mut rows = vec![[
        "hypothesis",
        "feature",
        "group_a",
        "group_b",
        "n_a",
        "n_b",
        "mean_a",
        "mean_b",
        "jsd_observed",
        "jsd_permuted_mean",
        "jsd_permuted_sd",
        "p_value",
        "permutations",
        "seed",
    ]
    .map(String::from)
    .to_vec()];
    for r in results {
        let (a, b) = r.hypothesis.groups();
        rows.push(vec![
            r.hypothesis.tag().to_string(),
            r.hypothesis.feature().to_string(),
            a.to_string(),
            b.to_string(),
            r.n_a.to_string(),
            r.n_b.to_string(),
            r.mean_a.to_string(),
            r.mean_b.to_string(),
            r.test.observed_jsd.to_string(),
            r.test.mean_permuted.to_string(),
            r.test.sd_permuted.to_string(),
            r.test.p_value.to_string(),
            r.test.permuted_jsds.len().to_string(),
            r.test.seed.to_string(),
        ]);
    }
    csv_text(&rows)
}

/// Models as rows, feature masks as columns; missing cells print `-`.
pub fn accuracy_text(reports: &[CvReport]) -> String {
    let mut out = String::from("Cross-validated accuracy by feature set\n\n");
    let mut models: Vec<_> = Vec::new();
    for r in reports {
        if !models.contains(&r.model) {
            models.push(r.model);
        }
    }
    let _ = write!(out, "{:<16}", "");
    for mask in FeatureMask::ALL {
        let _ = write!(out, " {:>16}", mask.title());
    }
    out.push('\n');
    for model in models {
        let _ = write!(out, "{:<16}", model.title());
        for mask in FeatureMask::ALL {
            let cell = reports
                .iter()
                .find(|r| r.model == model && r.mask == mask)
                .map_or("-".to_string(), |r| format!("{:.4}", r.accuracy()));
            let _ = write!(out, " {cell:>16}");
        }
        out.push('\n');
    }
    if let Some(r) = reports.first() {
        let _ = writeln!(out, "\n{}-fold stratified cross-validation, seed {}", r.folds(), r.seed);
    }
    out
}

pub fn accuracy_csv(reports: &[CvReport]) -> String {
    let mut rows = vec![
        ["model", "mask", "accuracy", "mean_fold_accuracy", "rows", "folds", "seed"]
            .map(String::from)
            .to_vec(),
    ];
    for r in reports {
        rows.push(vec![
            r.model.name().to_string(),
            r.mask.to_string(),
            r.accuracy().to_string(),
            r.mean_accuracy.to_string(),
            r.confusion.total().to_string(),
            r.folds().to_string(),
            r.seed.to_string(),
        ]);
    }
    csv_text(&rows)
}

fn letter(i: usize) -> char {
    (b'a' + i as u8) as char
}

/// Rows are the true activity; columns are lettered like the rows.
pub fn confusion_text(title: &str, m: &ConfusionMatrix) -> String {
    let mut out = format!("{title}\n\n");
    let classes = m.classes();
    let names: Vec<String> = classes
        .iter()
        .enumerate()
        .map(|(i, c)| format!("{}: {}", letter(i), c.short_name()))
        .collect();
    let width = names.iter().map(String::len).max().unwrap_or(0).max("Activity".len());
    let cell = m
        .counts()
        .iter()
        .flatten()
        .map(|c| c.to_string().len())
        .max()
        .unwrap_or(1)
        .max(3);
    let _ = writeln!(out, "{:<width$}  Classified As", "Activity");
    let _ = write!(out, "{:<width$}", "");
    for i in 0..classes.len() {
        let _ = write!(out, " {:>cell$}", letter(i));
    }
    out.push('\n');
    for (name, row) in names.iter().zip(m.counts()) {
        let _ = write!(out, "{name:<width$}");
        for c in row {
            let _ = write!(out, " {c:>cell$}");
        }
        out.push('\n');
    }
    let _ = writeln!(out, "\naccuracy {:.4} ({} of {})", m.accuracy(), m.trace(), m.total());
    out
}

pub fn confusion_csv(m: &ConfusionMatrix) -> String {
    let mut header = vec!["truth".to_string()];
    header.extend(m.classes().iter().map(|c| c.to_string()));
    let mut rows = vec![header];
    for (class, row) in m.classes().iter().zip(m.counts()) {
        let mut r = vec![class.to_string()];
        r.extend(row.iter().map(u64::to_string));
        rows.push(r);
    }
    csv_text(&rows)
}

pub fn confusion_title(r: &CvReport) -> String {
    format!("Confusion matrix, {} on {} features", r.model.title(), r.mask.title())
}

/// Every populated section as text plus CSV.
pub fn render_report(results: &PipelineResults) -> Result<Vec<ReportFile>, ReportError> {
    if results.hypotheses.is_empty() && results.accuracy.is_empty() && results.confusions.is_empty() {
        return Err(ReportError::Empty);
    }
    let mut files = Vec::new();
    if !results.hypotheses.is_empty() {
        files.push(file("significance.txt", significance_text(&results.hypotheses)));
        files.push(file("significance.csv", significance_csv(&results.hypotheses)));
    }
    if !results.accuracy.is_empty() {
        files.push(file("accuracy.txt", accuracy_text(&results.accuracy)));
        files.push(file("accuracy.csv", accuracy_csv(&results.accuracy)));
    }
    for r in &results.confusions {
        let stem = format!("confusion_{}_{}", r.model.name(), r.mask);
        files.push(file(format!("{stem}.txt"), confusion_text(&confusion_title(r), &r.confusion)));
        files.push(file(format!("{stem}.csv"), confusion_csv(&r.confusion)));
    }
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::{confusion, ModelSpec};
    use crate::model::ActivityLabel;
    use crate::pipeline::Hypothesis;
    use crate::stats::PermutationResult;

    fn hypothesis() -> HypothesisResult {
        HypothesisResult {
            hypothesis: Hypothesis::TempGradient,
            n_a: 10,
            n_b: 12,
            mean_a: -0.01,
            mean_b: 0.0,
            test: PermutationResult {
                observed_jsd: 0.5,
                permuted_jsds: vec![0.01; 999],
                p_value: 0.001,
                mean_permuted: 0.01,
                sd_permuted: 0.0,
                seed: 1,
            },
        }
    }

    #[test]
    fn one_hypothesis_one_row() {
        let text = significance_text(&[hypothesis()]);
        let rows: Vec<_> = text.lines().filter(|l| l.starts_with("H_")).collect();
        assert_eq!(rows.len(), 1);
        assert!(rows[0].contains("dynamic vs static") && rows[0].ends_with("1e-3"));
        assert_eq!(significance_csv(&[hypothesis()]).lines().count(), 2);
    }

    #[test]
    fn eight_class_grid_lettered_in_report_order() {
        let order = ActivityLabel::REPORT_ORDER;
        let m = confusion(&order, &order, &order).unwrap();
        let text = confusion_text("t", &m);
        let lines: Vec<&str> = text.lines().collect();
        let header: Vec<&str> = lines[3].split_whitespace().collect();
        assert_eq!(header, ["a", "b", "c", "d", "e", "f", "g", "h"]);
        assert!(lines[4].starts_with("a: climb"));
        assert!(lines[5].starts_with("b: elevator"));
        assert!(lines[6].starts_with("c: rest"));
        assert!(lines[11].starts_with("h: sit/cub."));
        let csv = confusion_csv(&m);
        assert_eq!(csv.lines().count(), 9);
        assert!(csv.starts_with("truth,climb_stairs,take_elevator,rest,"));
    }

    #[test]
    fn empty_results_rejected() {
        assert_eq!(render_report(&PipelineResults::default()), Err(ReportError::Empty));
    }

    #[test]
    fn accuracy_grid_shape() {
        let m = confusion(&[ActivityLabel::Rest], &[ActivityLabel::Rest], &[ActivityLabel::Rest]).unwrap();
        let report = CvReport {
            fold_accuracies: vec![1.0],
            mean_accuracy: 1.0,
            confusion: m,
            model: ModelSpec::NaiveBayes,
            mask: FeatureMask::Environment,
            seed: 3,
        };
        let text = accuracy_text(&[report]);
        let row = text.lines().find(|l| l.starts_with("Naive Bayes")).unwrap();
        assert_eq!(row.split_whitespace().collect::<Vec<_>>(), ["Naive", "Bayes", "-", "1.0000", "-"]);
    }
}
