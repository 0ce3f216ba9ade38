// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classify;
pub mod config;
pub mod features;
pub mod location;
pub mod model;
pub mod pipeline;
pub mod report;
pub mod stats;
pub mod synth;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("core-model: {0}")]
    Model(#[from] model::ModelError),
    #[error("features: {0}")]
    Features(#[from] features::FeatureError),
    #[error("stats: {0}")]
    Stats(#[from] stats::StatsError),
    #[error("location: {0}")]
    Location(#[from] location::LocationError),
    #[error("classify: {0}")]
    Classify(#[from] classify::ClassifyError),
    #[error("synth: {0}")]
    Synth(#[from] synth::SynthError),
    #[error("config: {0}")]
    Config(#[from] config::ConfigError),
    #[error("report: {0}")]
    Report(#[from] report::ReportError),
    #[error("io: {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("input: {0}")]
    Input(String),
}
