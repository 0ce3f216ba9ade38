//! Flat `key = value` configuration files.
//!
//! `#` starts a comment. Generator keys carry a `synth.` prefix; the rest
//! configure the analysis. Unknown keys are rejected so typos surface.

use std::fmt::Display;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

use crate::model::ActivityLabel;
use crate::pipeline::{ModelFamily, PipelineConfig};
use crate::synth::{GeneratorConfig, LightLevel};

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: bad value `{value}` for `{key}`: {reason}")]
    Value {
        line: usize,
        key: String,
        value: String,
        reason: String,
    },
    #[error("cannot read {path}: {reason}")]
    Io { path: String, reason: String },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Config {
    pub pipeline: PipelineConfig,
    pub generator: GeneratorConfig,
}

/// Why `set` refused a key.
enum SetError {
    Unknown,
    Value(String),
}

fn num<T: FromStr>(v: &str) -> Result<T, SetError>
where
    T::Err: Display,
{
    v.parse().map_err(|e: T::Err| SetError::Value(e.to_string()))
}

fn list(v: &str) -> Result<Vec<f64>, SetError> {
    v.split(',').map(|x| num(x.trim())).collect()
}

fn pair(v: &str) -> Result<LightLevel, SetError> {
    match list(v)?.as_slice() {
        &[mean, sd] => Ok(LightLevel { mean, sd }),
        _ => Err(SetError::Value("expected `mean, sd`".into())),
    }
}

fn optional(v: &str) -> Result<Option<usize>, SetError> {
    match v {
        "none" | "auto" => Ok(None),
        _ => num(v).map(Some),
    }
}

fn show_optional(v: Option<usize>, none: &str) -> String {
    v.map_or(none.to_string(), |x| x.to_string())
}

fn join(values: &[f64]) -> String {
    values.iter().map(f64::to_string).collect::<Vec<_>>().join(", ")
}

fn label_key(key: &str, prefix: &str) -> Option<ActivityLabel> {
    key.strip_prefix(prefix)?.parse().ok()
}

impl Config {
    pub fn parse(text: &str) -> Result<Config, ConfigError> {
        let mut cfg = Config::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let Some((key, value)) = body.split_once('=') else {
                return Err(ConfigError::Syntax {
                    line,
                    text: raw.to_string(),
                });
            };
            let (key, value) = (key.trim(), value.trim());
            cfg.set(key, value).map_err(|e| match e {
                SetError::Unknown => ConfigError::UnknownKey {
                    line,
                    key: key.to_string(),
                },
                SetError::Value(reason) => ConfigError::Value {
                    line,
                    key: key.to_string(),
                    value: value.to_string(),
                    reason,
                },
            })?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Config, ConfigError> {
        let text = fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        Config::parse(&text)
    }

    fn set(&mut self, key: &str, v: &str) -> Result<(), SetError> {
        let p = &mut self.pipeline;
        match key {
            "window" => p.window = num(v)?,
            "stride" => p.stride = num(v)?,
            "classify_stride" => p.classify_stride = num(v)?,
            "bins" => p.bins = num(v)?,
            "smoothing" => p.smoothing = num(v)?,
            "permutations" => p.permutations = num(v)?,
            "lda_threshold" => p.lda_threshold = num(v)?,
            "dtw_threshold" => p.dtw_threshold = num(v)?,
            "template_landing" => p.template_landing = num(v)?,
            "template_velocity" => p.template_velocity = num(v)?,
            "sample_rate" => p.sample_rate = num(v)?,
            "model" => p.model = v.parse::<ModelFamily>().map_err(|e| SetError::Value(e.to_string()))?,
            "tree.max_depth" => p.tree.max_depth = optional(v)?,
            "tree.min_leaf" => p.tree.min_leaf = num(v)?,
            "forest.trees" => p.forest.n_trees = num(v)?,
            "forest.max_depth" => p.forest.tree.max_depth = optional(v)?,
            "forest.min_leaf" => p.forest.tree.min_leaf = num(v)?,
            "forest.feature_subset" => p.forest.feature_subset = optional(v)?,
            "forest.bootstrap" => p.forest.bootstrap = num(v)?,
            "folds" => p.folds = num(v)?,
            "seed" => p.seed = num(v)?,
            _ => return self.set_generator(key.strip_prefix("synth.").ok_or(SetError::Unknown)?, v),
        }
        Ok(())
    }

    fn set_generator(&mut self, key: &str, v: &str) -> Result<(), SetError> {
        let g = &mut self.generator;
        if let Some(label) = label_key(key, "duration.") {
            g.durations[label.index()] = num(v)?;
            return Ok(());
        }
        if let Some(label) = label_key(key, "accel_sd.") {
            g.accel_sd[label.index()] = num(v)?;
            return Ok(());
        }
        match key {
            "episode_minutes" => g.episode_minutes = num(v)?,
            "sample_rate" => g.sample_rate = num(v)?,
            "gap_seconds" => g.gap_seconds = num(v)?,
            "reference_interval" => g.reference_interval = num(v)?,
            "ambient_temp" => g.ambient_temp = num(v)?,
            "outdoor_temp" => g.outdoor_temp = num(v)?,
            "skin_offset" => g.skin_offset = num(v)?,
            "episode_temp_sd" => g.episode_temp_sd = num(v)?,
            "cooling_slope" => g.cooling_slope = num(v)?,
            "climb_effort" => g.climb_effort = num(v)?,
            "run_effort" => g.run_effort = num(v)?,
            "effort_jitter" => g.effort_jitter = num(v)?,
            "dynamic_temp_sd" => g.dynamic_temp_sd = num(v)?,
            "static_temp_sd" => g.static_temp_sd = num(v)?,
            "rest_warming" => g.rest_warming = num(v)?,
            "humidity_base" => g.humidity_base = num(v)?,
            "humidity_sd" => g.humidity_sd = num(v)?,
            "episode_humidity_sd" => g.episode_humidity_sd = num(v)?,
            "rest_humidity_drift" => g.rest_humidity_drift = num(v)?,
            "rest_humidity_boost" => g.rest_humidity_boost = num(v)?,
            "light.lab" => g.lab_light = pair(v)?,
            "light.cubicle" => g.cubicle_light = pair(v)?,
            "light.elevator" => g.elevator_light = pair(v)?,
            "light.corridor" => g.corridor_light = pair(v)?,
            "light.outdoor" => g.outdoor_light = pair(v)?,
            "floor_levels" => g.floor_levels = list(v)?,
            "landing_level" => g.landing_level = num(v)?,
            "stair_light_sd" => g.stair_light_sd = num(v)?,
            "climb_velocity" => g.climb_velocity = num(v)?,
            "velocity_jitter" => g.velocity_jitter = num(v)?,
            "rest_in_lab" => g.rest_in_lab = num(v)?,
            "accel_axis_scale" => {
                g.accel_axis_scale = list(v)?
                    .try_into()
                    .map_err(|_| SetError::Value("expected 3 values".into()))?
            }
            "accel_jitter" => g.accel_jitter = num(v)?,
            "seed" => g.seed = num(v)?,
            _ => return Err(SetError::Unknown),
        }
        Ok(())
    }

    /// Every key with its current value and a one-line note, in file order.
    pub fn entries(&self) -> Vec<(String, String, &'static str)> {
        let p = &self.pipeline;
        let g = &self.generator;
        let s = |x: &dyn Display| x.to_string();
        let light = |l: LightLevel| format!("{}, {}", l.mean, l.sd);
        let mut out: Vec<(String, String, &'static str)> = vec![
            ("window".into(), s(&p.window), "window length in samples"),
            ("stride".into(), s(&p.stride), "window stride for significance tests and locate"),
            ("classify_stride".into(), s(&p.classify_stride), "window stride for classification"),
            ("bins".into(), s(&p.bins), "histogram bins"),
            ("smoothing".into(), s(&p.smoothing), "pseudo-count per bin"),
            ("permutations".into(), s(&p.permutations), "permutation count M"),
            ("lda_threshold".into(), s(&p.lda_threshold), "lab iff log ratio >= threshold"),
            ("dtw_threshold".into(), s(&p.dtw_threshold), "climbing iff normalized DTW distance < threshold"),
            ("template_landing".into(), s(&p.template_landing), "stair template landing light"),
            ("template_velocity".into(), s(&p.template_velocity), "stair template floors per second"),
            ("sample_rate".into(), s(&p.sample_rate), "wearable samples per second"),
            ("model".into(), s(&p.model), "nb | tree | forest"),
            ("tree.max_depth".into(), show_optional(p.tree.max_depth, "none"), "none = unlimited"),
            ("tree.min_leaf".into(), s(&p.tree.min_leaf), "minimum rows per leaf"),
            ("forest.trees".into(), s(&p.forest.n_trees), "trees in the forest"),
            ("forest.max_depth".into(), show_optional(p.forest.tree.max_depth, "none"), "none = unlimited"),
            ("forest.min_leaf".into(), s(&p.forest.tree.min_leaf), "minimum rows per leaf"),
            (
                "forest.feature_subset".into(),
                show_optional(p.forest.feature_subset, "auto"),
                "features per split, auto = ceil(sqrt(d))",
            ),
            ("forest.bootstrap".into(), s(&p.forest.bootstrap), "bootstrap resampling per tree"),
            ("folds".into(), s(&p.folds), "cross-validation folds"),
            ("seed".into(), s(&p.seed), "seed for permutations, folds and forests"),
        ];
        for label in ActivityLabel::ALL {
            out.push((
                format!("synth.duration.{label}"),
                s(&g.durations[label.index()]),
                "minutes",
            ));
        }
        out.extend([
            ("synth.episode_minutes".into(), s(&g.episode_minutes), "target episode length"),
            ("synth.sample_rate".into(), s(&g.sample_rate), "wearable samples per second"),
            ("synth.gap_seconds".into(), s(&g.gap_seconds), "idle time between episodes"),
            ("synth.reference_interval".into(), s(&g.reference_interval), "seconds between reference readings"),
            ("synth.ambient_temp".into(), s(&g.ambient_temp), "indoor air, C"),
            ("synth.outdoor_temp".into(), s(&g.outdoor_temp), "outdoor air, C"),
            ("synth.skin_offset".into(), s(&g.skin_offset), "wearable reads this much above ambient"),
            ("synth.episode_temp_sd".into(), s(&g.episode_temp_sd), "sd of each episode's starting temperature"),
            ("synth.cooling_slope".into(), s(&g.cooling_slope), "C per second while walking, negative"),
            ("synth.climb_effort".into(), s(&g.climb_effort), "cooling multiplier on stairs"),
            ("synth.run_effort".into(), s(&g.run_effort), "cooling multiplier when running"),
            ("synth.effort_jitter".into(), s(&g.effort_jitter), "episode multiplier in U(1-j, 1+j)"),
            ("synth.dynamic_temp_sd".into(), s(&g.dynamic_temp_sd), "temperature noise while moving"),
            ("synth.static_temp_sd".into(), s(&g.static_temp_sd), "temperature noise at rest"),
            ("synth.rest_warming".into(), s(&g.rest_warming), "C per second while resting"),
            ("synth.humidity_base".into(), s(&g.humidity_base), "%RH"),
            ("synth.humidity_sd".into(), s(&g.humidity_sd), "humidity noise"),
            ("synth.episode_humidity_sd".into(), s(&g.episode_humidity_sd), "sd of each episode's baseline"),
            ("synth.rest_humidity_drift".into(), s(&g.rest_humidity_drift), "%RH per second while resting"),
            ("synth.rest_humidity_boost".into(), s(&g.rest_humidity_boost), "humidity noise factor while resting"),
            ("synth.light.lab".into(), light(g.lab_light), "mean, sd"),
            ("synth.light.cubicle".into(), light(g.cubicle_light), "mean, sd"),
            ("synth.light.elevator".into(), light(g.elevator_light), "mean, sd"),
            ("synth.light.corridor".into(), light(g.corridor_light), "mean, sd"),
            ("synth.light.outdoor".into(), light(g.outdoor_light), "mean, sd"),
            ("synth.floor_levels".into(), join(&g.floor_levels), "stairwell light per floor"),
            ("synth.landing_level".into(), s(&g.landing_level), "stairwell light between floors"),
            ("synth.stair_light_sd".into(), s(&g.stair_light_sd), "stairwell light noise"),
            ("synth.climb_velocity".into(), s(&g.climb_velocity), "floors per second"),
            ("synth.velocity_jitter".into(), s(&g.velocity_jitter), "episode multiplier in U(1-j, 1+j)"),
            ("synth.rest_in_lab".into(), s(&g.rest_in_lab), "chance a rest episode is in the lab"),
        ]);
        for label in ActivityLabel::ALL {
            out.push((
                format!("synth.accel_sd.{label}"),
                s(&g.accel_sd[label.index()]),
                "per-axis acceleration sd, g",
            ));
        }
        out.extend([
            ("synth.accel_axis_scale".into(), join(&g.accel_axis_scale), "x, y, z factors"),
            ("synth.accel_jitter".into(), s(&g.accel_jitter), "log-sd of the episode multiplier"),
            ("synth.seed".into(), s(&g.seed), "generator seed"),
        ]);
        out
    }

    /// A parseable file listing every key.
    pub fn render(&self) -> String {
        let mut out = String::from("# envsense configuration. Every key is optional.\n");
        let mut in_synth = false;
        for (key, value, note) in self.entries() {
            if key.starts_with("synth.") && !in_synth {
                out.push_str("\n# Synthetic data generator.\n");
                in_synth = true;
            }
            out.push_str(&format!("{key} = {value}  # {note}\n"));
        }
        out
    }

    /// Applies `seed` to both the analysis and the generator.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.pipeline.seed = seed;
        self.generator.seed = seed;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_default_file_matches_defaults() {
        let text = include_str!("../configs/default.conf");
        assert_eq!(Config::parse(text).unwrap(), Config::default());
        assert_eq!(text, Config::default().render());
    }

    #[test]
    fn every_entry_round_trips() {
        let cfg = Config::default();
        for (key, value, _) in cfg.entries() {
            let mut other = Config::default();
            assert!(other.set(&key, &value).is_ok(), "{key}");
        }
    }

    #[test]
    fn overrides_and_comments() {
        let cfg = Config::parse(
            "# comment\nwindow = 30\n\nsynth.duration.rest = 12.5 # trailing\nsynth.light.lab = 700, 20\nforest.max_depth = 8\nmodel = nb\n",
        )
        .unwrap();
        assert_eq!(cfg.pipeline.window, 30);
        assert_eq!(cfg.generator.durations[ActivityLabel::Rest.index()], 12.5);
        assert_eq!(cfg.generator.lab_light, LightLevel { mean: 700.0, sd: 20.0 });
        assert_eq!(cfg.pipeline.forest.tree.max_depth, Some(8));
        assert_eq!(cfg.pipeline.model, ModelFamily::NaiveBayes);
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert_eq!(
            Config::parse("window = 3\nwindw = 4"),
            Err(ConfigError::UnknownKey {
                line: 2,
                key: "windw".into()
            })
        );
        assert!(matches!(Config::parse("bins: 4"), Err(ConfigError::Syntax { line: 1, .. })));
        assert!(matches!(Config::parse("bins = many"), Err(ConfigError::Value { line: 1, .. })));
        assert!(matches!(
            Config::parse("synth.accel_axis_scale = 1, 2"),
            Err(ConfigError::Value { .. })
        ));
    }
}
