//! End-to-end orchestration: generate, extract, test, locate, classify.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use crate::classify::{self, CvReport, FeatureMask, FeatureMatrix, ForestParams, ModelSpec, TreeParams};
use crate::features::{self, Feature, FeatureVector, LocationContext};
use crate::location::{self, Location};
use crate::model::{ActivityLabel, Channel, SensorStream, Source};
use crate::stats::{self, HistogramConfig, PermutationConfig, PermutationResult};
use crate::config::Config;
use crate::report::{self, ReportFile};
use crate::synth::{self, LabeledDataset};
use crate::Error;

/// Model family used for the `classify` command and the confusion tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelFamily {
    NaiveBayes,
    Tree,
    Forest,
}

impl ModelFamily {
    pub const ALL: [ModelFamily; 3] = [ModelFamily::NaiveBayes, ModelFamily::Tree, ModelFamily::Forest];

    pub fn name(self) -> &'static str {
        match self {
            ModelFamily::NaiveBayes => "nb",
            ModelFamily::Tree => "tree",
            ModelFamily::Forest => "forest",
        }
    }
}

impl fmt::Display for ModelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelFamily {
    type Err = classify::ClassifyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ModelFamily::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| classify::ClassifyError::Unknown {
                kind: "model",
                value: s.to_string(),
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    /// Window length in samples.
    pub window: usize,
    /// Window stride for the significance tests and `locate`.
    pub stride: usize,
    /// Window stride for classification; a multiple of `stride`.
    pub classify_stride: usize,
    pub bins: usize,
    pub smoothing: f64,
    pub permutations: usize,
    pub lda_threshold: f64,
    pub dtw_threshold: f64,
    pub template_landing: f64,
    /// Floors per second assumed by the stair template.
    pub template_velocity: f64,
    /// Wearable samples per second, used to render the template.
    pub sample_rate: f64,
    pub model: ModelFamily,
    pub tree: TreeParams,
    pub forest: ForestParams,
    pub folds: usize,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            window: 60,
            stride: 1,
            classify_stride: 60,
            bins: 50,
            smoothing: 0.5,
            permutations: 999,
            lda_threshold: 0.0,
            dtw_threshold: DEFAULT_DTW_THRESHOLD,
            template_landing: 120.0,
            template_velocity: 0.1,
            sample_rate: 1.0,
            model: ModelFamily::Forest,
            tree: TreeParams::default(),
            forest: ForestParams::default(),
            folds: 10,
            seed: 42,
        }
    }
}

/// Midpoint of the median stair and non-stair window distances on the
/// default synthetic dataset (seed 42), rounded.
pub const DEFAULT_DTW_THRESHOLD: f64 = 17500.0;

impl PipelineConfig {
    pub fn spec(&self, family: ModelFamily) -> ModelSpec {
        match family {
            ModelFamily::NaiveBayes => ModelSpec::NaiveBayes,
            ModelFamily::Tree => ModelSpec::Tree(self.tree),
            ModelFamily::Forest => ModelSpec::Forest(self.forest),
        }
    }

    pub fn model_spec(&self) -> ModelSpec {
        self.spec(self.model)
    }

    pub fn permutation(&self) -> PermutationConfig {
        PermutationConfig {
            permutations: self.permutations,
            histogram: HistogramConfig {
                bins: self.bins,
                smoothing: self.smoothing,
            },
            seed: self.seed,
        }
    }

    /// Cross-field checks; per-field ranges are enforced by the owning modules.
    pub fn validate(&self) -> Result<(), crate::config::ConfigError> {
        use crate::config::ConfigError;
        if self.stride == 0 || self.classify_stride == 0 || !self.classify_stride.is_multiple_of(self.stride) {
            return Err(ConfigError::Invalid(format!(
                "classify_stride {} must be a positive multiple of stride {}",
                self.classify_stride, self.stride
            )));
        }
        Ok(())
    }
}

/// Reference statistics from the lab and cubicle light and a stair template
/// over the per-floor mean light levels.
pub fn location_context(references: &[SensorStream], cfg: &PipelineConfig) -> Result<LocationContext, Error> {
    let light = |source: Source| -> Result<Vec<f64>, Error> {
        references
            .iter()
            .find(|r| r.source() == source)
            .and_then(|r| r.column(Channel::Light))
            .ok_or_else(|| Error::Input(format!("no {source} stream with a light channel")))
    };
    let lab = location::fit_reference_stats(&light(Source::ReferenceLab)?)?;
    let cubicle = location::fit_reference_stats(&light(Source::ReferenceCubicle)?)?;
    let mut floors: Vec<(usize, f64)> = references
        .iter()
        .filter_map(|r| match r.source() {
            Source::ReferenceFloor(i) => {
                let l = r.column(Channel::Light)?;
                Some((i, l.iter().sum::<f64>() / l.len() as f64))
            }
            _ => None,
        })
        .collect();
    floors.sort_by_key(|f| f.0);
    let levels: Vec<f64> = floors.into_iter().map(|f| f.1).collect();
    let template =
        location::build_stair_template(&levels, cfg.template_landing, cfg.template_velocity, cfg.sample_rate)?;
    Ok(LocationContext { cubicle, lab, template })
}

/// Feature vectors of one wearable episode, in window order.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeFeatures {
    pub id: usize,
    pub label: Option<ActivityLabel>,
    pub vectors: Vec<FeatureVector>,
}

/// Stride-`cfg.stride` features of every episode, in episode order.
pub fn extract_dataset(dataset: &LabeledDataset, cfg: &PipelineConfig) -> Result<Vec<EpisodeFeatures>, Error> {
    cfg.validate()?;
    let ctx = location_context(&dataset.references, cfg)?;
    dataset
        .episodes
        .par_iter()
        .map(|e| {
            Ok(EpisodeFeatures {
                id: e.id,
                label: e.stream.label(),
                vectors: features::extract_features(&e.stream, cfg.window, cfg.stride, Some(&ctx))?,
            })
        })
        .collect()
}

pub fn all_vectors(episodes: &[EpisodeFeatures]) -> Vec<FeatureVector> {
    episodes.iter().flat_map(|e| e.vectors.iter().copied()).collect()
}

/// Every `classify_stride / stride`-th window of each episode, keeping the
/// labeled ones with all features so every mask sees the same rows.
pub fn classification_rows(episodes: &[EpisodeFeatures], cfg: &PipelineConfig) -> Vec<FeatureVector> {
    let step = (cfg.classify_stride / cfg.stride).max(1);
    episodes
        .iter()
        .flat_map(|e| e.vectors.iter().step_by(step).copied())
        .filter(|v| v.label.is_some() && FeatureMask::Fused.covers(v))
        .collect()
}

/// One row of the significance table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hypothesis {
    TempGradient,
    TempSd,
    HumiditySd,
    LightRatio,
    StairDtw,
}

impl Hypothesis {
    pub const ALL: [Hypothesis; 5] = [
        Hypothesis::TempGradient,
        Hypothesis::TempSd,
        Hypothesis::HumiditySd,
        Hypothesis::LightRatio,
        Hypothesis::StairDtw,
    ];

    pub fn feature(self) -> Feature {
        match self {
            Hypothesis::TempGradient => Feature::TempGradient,
            Hypothesis::TempSd => Feature::TempSd,
            Hypothesis::HumiditySd => Feature::HumiditySd,
            Hypothesis::LightRatio => Feature::LightLr,
            Hypothesis::StairDtw => Feature::DtwDist,
        }
    }

    /// Row label in the significance table.
    pub fn tag(self) -> &'static str {
        match self {
            Hypothesis::TempGradient => "H_VTp",
            Hypothesis::TempSd => "H_sd(Tp)",
            Hypothesis::HumiditySd => "H_sd(Hm)",
            Hypothesis::LightRatio => "H_LR",
            Hypothesis::StairDtw => "H_DTW",
        }
    }

    pub fn groups(self) -> (&'static str, &'static str) {
        match self {
            Hypothesis::TempGradient | Hypothesis::TempSd => ("dynamic", "static"),
            Hypothesis::HumiditySd => ("rest", "other"),
            Hypothesis::LightRatio => ("sit_lab", "sit_cubicle"),
            Hypothesis::StairDtw => ("climb_stairs", "other"),
        }
    }

    /// `Some(true)` for group A, `Some(false)` for group B, `None` if excluded.
    pub fn side(self, label: ActivityLabel) -> Option<bool> {
        use ActivityLabel::*;
        match self {
            Hypothesis::TempGradient | Hypothesis::TempSd => {
                if label.is_dynamic() {
                    Some(true)
                } else if label.is_static() {
                    Some(false)
                } else {
                    None
                }
            }
            Hypothesis::HumiditySd => Some(label == Rest),
            Hypothesis::LightRatio => match label {
                SitLab => Some(true),
                SitCubicle => Some(false),
                _ => None,
            },
            Hypothesis::StairDtw => Some(label == ClimbStairs),
        }
    }

    /// Feature values of both groups; unlabeled rows and absent values are skipped.
    pub fn split(self, rows: &[FeatureVector]) -> (Vec<f64>, Vec<f64>) {
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for r in rows {
            let (Some(label), Some(v)) = (r.label, r.get(self.feature())) else {
                continue;
            };
            match self.side(label) {
                Some(true) => a.push(v),
                Some(false) => b.push(v),
                None => {}
            }
        }
        (a, b)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisResult {
    pub hypothesis: Hypothesis,
    pub n_a: usize,
    pub n_b: usize,
    pub mean_a: f64,
    pub mean_b: f64,
    pub test: PermutationResult,
}

pub fn run_hypothesis(h: Hypothesis, rows: &[FeatureVector], cfg: &PipelineConfig) -> Result<HypothesisResult, Error> {
    let (a, b) = h.split(rows);
    let test = stats::permutation_test(&a, &b, cfg.permutation())?;
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    Ok(HypothesisResult {
        hypothesis: h,
        n_a: a.len(),
        n_b: b.len(),
        mean_a: mean(&a),
        mean_b: mean(&b),
        test,
    })
}

pub fn run_hypotheses(rows: &[FeatureVector], cfg: &PipelineConfig) -> Result<Vec<HypothesisResult>, Error> {
    Hypothesis::ALL.iter().map(|&h| run_hypothesis(h, rows, cfg)).collect()
}

/// Cross-validates one model on the rows that cover `mask`.
pub fn evaluate(
    rows: &[FeatureVector],
    mask: FeatureMask,
    spec: &ModelSpec,
    cfg: &PipelineConfig,
) -> Result<CvReport, Error> {
    let data = FeatureMatrix::from_complete(rows, mask)?;
    Ok(classify::cross_validate(&data, spec, cfg.folds, cfg.seed)?)
}

/// Every model family against every feature mask, family-major.
pub fn run_accuracy(rows: &[FeatureVector], cfg: &PipelineConfig) -> Result<Vec<CvReport>, Error> {
    let mut out = Vec::new();
    for family in ModelFamily::ALL {
        for mask in FeatureMask::ALL {
            out.push(evaluate(rows, mask, &cfg.spec(family), cfg)?);
        }
    }
    Ok(out)
}

/// One `locate` output line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocateRow {
    pub end_time: f64,
    pub log_ratio: f64,
    pub location: Location,
    pub dtw_distance: f64,
    pub climbing: bool,
}

pub fn locate(stream: &SensorStream, ctx: &LocationContext, cfg: &PipelineConfig) -> Result<Vec<LocateRow>, Error> {
    let vectors =
        features::extract_selected(stream, cfg.window, cfg.stride, Some(ctx), &[Feature::LightLr, Feature::DtwDist])?;
    Ok(vectors
        .iter()
        .map(|v| {
            let log_ratio = v.light_lr.expect("requested");
            let dtw_distance = v.dtw_dist.expect("requested");
            LocateRow {
                end_time: v.end_time,
                log_ratio,
                location: location::classify_location(log_ratio, cfg.lda_threshold),
                dtw_distance,
                climbing: dtw_distance < cfg.dtw_threshold,
            }
        })
        .collect())
}

/// Everything the report renders.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PipelineResults {
    pub hypotheses: Vec<HypothesisResult>,
    /// Family-major grid as produced by [`run_accuracy`].
    pub accuracy: Vec<CvReport>,
    /// Configured model on acceleration-only and fused features.
    pub confusions: Vec<CvReport>,
}

pub fn analyze(dataset: &LabeledDataset, cfg: &PipelineConfig) -> Result<PipelineResults, Error> {
    let episodes = extract_dataset(dataset, cfg)?;
    analyze_features(&episodes, cfg)
}

pub fn analyze_features(episodes: &[EpisodeFeatures], cfg: &PipelineConfig) -> Result<PipelineResults, Error> {
    let hypotheses = run_hypotheses(&all_vectors(episodes), cfg)?;
    let accuracy = run_accuracy(&classification_rows(episodes, cfg), cfg)?;
    let chosen = cfg.model_spec();
    let confusions = [FeatureMask::Acceleration, FeatureMask::Fused]
        .into_iter()
        .filter_map(|mask| accuracy.iter().find(|r| r.model == chosen && r.mask == mask).cloned())
        .collect();
    Ok(PipelineResults {
        hypotheses,
        accuracy,
        confusions,
    })
}

/// Writes `files` into `dir`, creating it if needed.
pub fn write_files(files: &[ReportFile], dir: &Path) -> Result<(), Error> {
    let io = |path: &Path| {
        let path = path.display().to_string();
        move |source| Error::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io(dir))?;
    for f in files {
        let path = dir.join(&f.name);
        fs::write(&path, &f.contents).map_err(io(&path))?;
    }
    Ok(())
}

/// Generates the dataset into `out/data`, writes `out/features.csv`, and
/// the report tables under `out/report`.
pub fn run_pipeline(config: &Config, out: &Path) -> Result<Vec<ReportFile>, Error> {
    let dataset = synth::generate(&config.generator)?;
    synth::export(&dataset, &out.join("data"))?;
    let episodes = extract_dataset(&dataset, &config.pipeline)?;
    let features_path = out.join("features.csv");
    fs::write(&features_path, features::write_feature_csv(&all_vectors(&episodes))).map_err(|source| Error::Io {
        path: features_path.display().to_string(),
        source,
    })?;
    let results = analyze_features(&episodes, &config.pipeline)?;
    let files = report::render_report(&results)?;
    write_files(&files, &out.join("report"))?;
    Ok(files)
}
