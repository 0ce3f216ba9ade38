//! Seeded generator of labeled wearable episodes and reference streams.
//!
//! Every signal model is an invented stand-in with the qualitative shape of
//! the four environmental effects: airflow cooling while moving, humidity
//! build-up while resting after exercise, location-specific light levels,
//! and the bright-floor / dim-landing alternation in a stairwell.

use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Normal};
use thiserror::Error;

use crate::model::{self, ActivityLabel, ModelError, SensorSample, SensorStream, Source};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid generator config: {0}")]
    Config(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("manifest error: {0}")]
    Manifest(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("stream {file}: {source}")]
    Stream {
        file: String,
        #[source]
        source: ModelError,
    },
}

/// Gaussian light level, lux.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LightLevel {
    pub mean: f64,
    pub sd: f64,
}

impl LightLevel {
    pub const fn new(mean: f64, sd: f64) -> Self {
        LightLevel { mean, sd }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    /// Total minutes per activity, indexed by [`ActivityLabel::index`].
    pub durations: [f64; ActivityLabel::COUNT],
    /// Target episode length; each activity is split into equal episodes.
    pub episode_minutes: f64,
    /// Wearable samples per second.
    pub sample_rate: f64,
    /// Idle seconds between consecutive episodes on the shared timeline.
    pub gap_seconds: f64,
    /// Seconds between reference-sensor readings.
    pub reference_interval: f64,

    pub ambient_temp: f64,
    pub outdoor_temp: f64,
    pub skin_offset: f64,
    /// Per-episode sd of the starting temperature.
    pub episode_temp_sd: f64,
    /// Temperature slope while walking, degrees C per second.
    pub cooling_slope: f64,
    /// Cooling slope multiplier for climbing and running.
    pub climb_effort: f64,
    pub run_effort: f64,
    /// Episode multiplier drawn from `U(1 - j, 1 + j)`.
    pub effort_jitter: f64,
    pub dynamic_temp_sd: f64,
    pub static_temp_sd: f64,
    /// Slow warming while resting, degrees C per second.
    pub rest_warming: f64,

    pub humidity_base: f64,
    pub humidity_sd: f64,
    /// Per-episode sd of the humidity baseline.
    pub episode_humidity_sd: f64,
    pub rest_humidity_drift: f64,
    /// Factor on `humidity_sd` while resting.
    pub rest_humidity_boost: f64,

    pub lab_light: LightLevel,
    pub cubicle_light: LightLevel,
    pub elevator_light: LightLevel,
    pub corridor_light: LightLevel,
    pub outdoor_light: LightLevel,
    pub floor_levels: Vec<f64>,
    pub landing_level: f64,
    pub stair_light_sd: f64,
    /// Floors per second.
    pub climb_velocity: f64,
    /// Episode velocity multiplier drawn from `U(1 - j, 1 + j)`.
    pub velocity_jitter: f64,
    /// Probability that a rest episode happens in the lab, else the cubicle.
    pub rest_in_lab: f64,

    /// Per-axis acceleration sd in g, indexed by [`ActivityLabel::index`].
    pub accel_sd: [f64; ActivityLabel::COUNT],
    pub accel_axis_scale: [f64; 3],
    /// Log-scale sd of the per-episode acceleration multiplier.
    pub accel_jitter: f64,

    pub seed: u64,
}

/// Activity minutes of the reference recordings, in [`ActivityLabel::ALL`] order.
pub const DEFAULT_DURATIONS: [f64; ActivityLabel::COUNT] = [44.0, 25.0, 41.0, 37.0, 52.0, 176.0, 169.0, 26.0];

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            durations: DEFAULT_DURATIONS,
            episode_minutes: 5.0,
            sample_rate: 1.0,
            gap_seconds: 60.0,
            reference_interval: 10.0,
            ambient_temp: 24.0,
            outdoor_temp: 18.0,
            skin_offset: 6.0,
            episode_temp_sd: 0.5,
            cooling_slope: -0.01,
            climb_effort: 0.8,
            run_effort: 1.3,
            effort_jitter: 0.2,
            dynamic_temp_sd: 0.5,
            static_temp_sd: 0.3,
            rest_warming: 0.003,
            humidity_base: 45.0,
            humidity_sd: 2.0,
            episode_humidity_sd: 3.0,
            rest_humidity_drift: 0.02,
            rest_humidity_boost: 2.5,
            lab_light: LightLevel::new(600.0, 30.0),
            cubicle_light: LightLevel::new(350.0, 30.0),
            elevator_light: LightLevel::new(180.0, 20.0),
            corridor_light: LightLevel::new(280.0, 50.0),
            outdoor_light: LightLevel::new(6000.0, 800.0),
            floor_levels: vec![500.0, 510.0, 520.0, 530.0, 540.0, 550.0],
            landing_level: 120.0,
            stair_light_sd: 15.0,
            climb_velocity: 0.1,
            velocity_jitter: 0.2,
            rest_in_lab: 0.5,
            accel_sd: [0.25, 0.03, 0.25, 0.25, 0.6, 0.02, 0.02, 0.02],
            accel_axis_scale: [1.0, 0.8, 1.2],
            accel_jitter: 0.15,
            seed: 42,
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |msg: String| Err(SynthError::Config(msg));
        for (label, &d) in ActivityLabel::ALL.iter().zip(&self.durations) {
            if !(d > 0.0 && d.is_finite()) {
                return bad(format!("duration of {label} must be positive, got {d}"));
            }
        }
        let positive = [
            ("episode_minutes", self.episode_minutes),
            ("sample_rate", self.sample_rate),
            ("reference_interval", self.reference_interval),
            ("episode_temp_sd", self.episode_temp_sd),
            ("dynamic_temp_sd", self.dynamic_temp_sd),
            ("static_temp_sd", self.static_temp_sd),
            ("humidity_sd", self.humidity_sd),
            ("episode_humidity_sd", self.episode_humidity_sd),
            ("rest_humidity_boost", self.rest_humidity_boost),
            ("climb_effort", self.climb_effort),
            ("run_effort", self.run_effort),
            ("lab_light.sd", self.lab_light.sd),
            ("cubicle_light.sd", self.cubicle_light.sd),
            ("elevator_light.sd", self.elevator_light.sd),
            ("corridor_light.sd", self.corridor_light.sd),
            ("outdoor_light.sd", self.outdoor_light.sd),
            ("stair_light_sd", self.stair_light_sd),
            ("climb_velocity", self.climb_velocity),
            ("accel_jitter", self.accel_jitter),
        ];
        for (name, v) in positive.into_iter().chain(self.accel_sd.iter().map(|&v| ("accel_sd", v))) {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if self.accel_axis_scale.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
            return bad("accel_axis_scale entries must be positive".into());
        }
        if !(self.cooling_slope < 0.0) {
            return bad(format!("cooling_slope must be negative, got {}", self.cooling_slope));
        }
        if !(self.gap_seconds >= 0.0) {
            return bad("gap_seconds must be nonnegative".into());
        }
        for (name, j) in [("effort_jitter", self.effort_jitter), ("velocity_jitter", self.velocity_jitter)] {
            if !(0.0..1.0).contains(&j) {
                return bad(format!("{name} must lie in [0, 1), got {j}"));
            }
        }
        if !(0.0..=1.0).contains(&self.rest_in_lab) {
            return bad("rest_in_lab must lie in [0, 1]".into());
        }
        if self.floor_levels.len() < 2 {
            return bad("need at least 2 floor light levels".into());
        }
        let dimmest = self.floor_levels.iter().copied().fold(f64::INFINITY, f64::min);
        if !(self.landing_level >= 0.0 && self.landing_level < dimmest) {
            return bad("landing level must be nonnegative and below every floor level".into());
        }
        let lights = [
            self.lab_light.mean,
            self.cubicle_light.mean,
            self.elevator_light.mean,
            self.corridor_light.mean,
            self.outdoor_light.mean,
        ];
        if lights.iter().any(|&m| !(m >= 0.0)) {
            return bad("light means must be nonnegative".into());
        }
        Ok(())
    }

    /// Samples per episode for each activity; they sum to the configured
    /// duration rounded to whole samples.
    pub fn episode_plan(&self) -> Vec<(ActivityLabel, usize)> {
        let mut plan = Vec::new();
        for label in ActivityLabel::ALL {
            let minutes = self.durations[label.index()];
            let total = (minutes * 60.0 * self.sample_rate).round() as usize;
            let count = (minutes / self.episode_minutes).ceil().max(1.0) as usize;
            let (base, extra) = (total / count, total % count);
            for e in 0..count {
                plan.push((label, base + usize::from(e < extra)));
            }
        }
        plan
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Episode {
    pub id: usize,
    pub stream: SensorStream,
}

impl Episode {
    pub fn label(&self) -> ActivityLabel {
        self.stream.label().expect("episodes are labeled")
    }
}

/// Labeled wearable episodes plus unlabeled reference streams.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LabeledDataset {
    pub episodes: Vec<Episode>,
    pub references: Vec<SensorStream>,
}

impl LabeledDataset {
    pub fn reference(&self, source: Source) -> Option<&SensorStream> {
        self.references.iter().find(|r| r.source() == source)
    }

    /// Floor references in floor order.
    pub fn floor_references(&self) -> Vec<&SensorStream> {
        let mut floors: Vec<(usize, &SensorStream)> = self
            .references
            .iter()
            .filter_map(|r| match r.source() {
                Source::ReferenceFloor(i) => Some((i, r)),
                _ => None,
            })
            .collect();
        floors.sort_by_key(|(i, _)| *i);
        floors.into_iter().map(|(_, r)| r).collect()
    }

    /// Wearable seconds per activity.
    pub fn durations(&self) -> [f64; ActivityLabel::COUNT] {
        let mut out = [0.0; ActivityLabel::COUNT];
        for e in &self.episodes {
            if let Some((lo, hi)) = e.stream.time_range() {
                let dt = if e.stream.len() > 1 {
                    (hi - lo) / (e.stream.len() - 1) as f64
                } else {
                    0.0
                };
                out[e.label().index()] += hi - lo + dt;
            }
        }
        out
    }
}

struct Gen<'a> {
    cfg: &'a GeneratorConfig,
    rng: ChaCha8Rng,
}

fn normal(mean: f64, sd: f64) -> Normal<f64> {
    Normal::new(mean, sd).expect("sd validated positive")
}

impl Gen<'_> {
    fn gauss(&mut self, mean: f64, sd: f64) -> f64 {
        normal(mean, sd).sample(&mut self.rng)
    }

    fn jitter(&mut self, j: f64) -> f64 {
        if j == 0.0 {
            1.0
        } else {
            self.rng.random_range(1.0 - j..1.0 + j)
        }
    }

    fn light(&mut self, level: LightLevel) -> f64 {
        self.gauss(level.mean, level.sd).max(0.0)
    }

    fn episode(&mut self, label: ActivityLabel, start: f64, n: usize) -> Vec<SensorSample> {
        use ActivityLabel::*;
        let cfg = self.cfg;
        let dt = 1.0 / cfg.sample_rate;

        let ambient = if label == WalkOutdoor { cfg.outdoor_temp } else { cfg.ambient_temp };
        let temp0 = self.gauss(ambient + cfg.skin_offset, cfg.episode_temp_sd);
        let (temp_slope, temp_sd) = match label {
            WalkIndoor | WalkOutdoor => (cfg.cooling_slope * self.jitter(cfg.effort_jitter), cfg.dynamic_temp_sd),
            ClimbStairs => (
                cfg.cooling_slope * cfg.climb_effort * self.jitter(cfg.effort_jitter),
                cfg.dynamic_temp_sd,
            ),
            RunIndoor => (
                cfg.cooling_slope * cfg.run_effort * self.jitter(cfg.effort_jitter),
                cfg.dynamic_temp_sd,
            ),
            Rest => (cfg.rest_warming, cfg.static_temp_sd),
            TakeElevator | SitLab | SitCubicle => (0.0, cfg.static_temp_sd),
        };

        let hum0 = self.gauss(cfg.humidity_base, cfg.episode_humidity_sd);
        let (hum_slope, hum_sd) = if label == Rest {
            (cfg.rest_humidity_drift, cfg.humidity_sd * cfg.rest_humidity_boost)
        } else {
            (0.0, cfg.humidity_sd)
        };

        let place = match label {
            SitLab => cfg.lab_light,
            SitCubicle => cfg.cubicle_light,
            Rest if self.rng.random_bool(cfg.rest_in_lab) => cfg.lab_light,
            Rest => cfg.cubicle_light,
            TakeElevator => cfg.elevator_light,
            WalkIndoor | RunIndoor => cfg.corridor_light,
            WalkOutdoor => cfg.outdoor_light,
            ClimbStairs => LightLevel::new(0.0, cfg.stair_light_sd),
        };
        let stairs = (label == ClimbStairs).then(|| {
            let floors = cfg.floor_levels.len();
            let velocity = cfg.climb_velocity * self.jitter(cfg.velocity_jitter);
            let first_floor = self.rng.random_range(0..floors);
            let phase = self.rng.random_range(0.0..1.0 / velocity);
            (velocity, first_floor, phase)
        });

        let accel_mult = LogNormal::new(0.0, cfg.accel_jitter)
            .expect("jitter validated positive")
            .sample(&mut self.rng);
        let accel_sd = cfg.accel_sd[label.index()] * accel_mult;

        (0..n)
            .map(|i| {
                let t = i as f64 * dt;
                let mut s = SensorSample::new(start + t);
                s.temperature = Some(self.gauss(temp0 + temp_slope * t, temp_sd));
                s.humidity = Some(self.gauss(hum0 + hum_slope * t, hum_sd).clamp(0.0, 100.0));
                let light_mean = match stairs {
                    Some((velocity, first, phase)) => stair_level(cfg, velocity, first, phase + t),
                    None => place.mean,
                };
                s.light = Some(self.light(LightLevel::new(light_mean, place.sd)));
                let gravity = [0.0, 0.0, 1.0];
                s.accel_x = Some(self.gauss(gravity[0], accel_sd * cfg.accel_axis_scale[0]));
                s.accel_y = Some(self.gauss(gravity[1], accel_sd * cfg.accel_axis_scale[1]));
                s.accel_z = Some(self.gauss(gravity[2], accel_sd * cfg.accel_axis_scale[2]));
                s
            })
            .collect()
    }

    fn reference(&mut self, light: LightLevel, end: f64) -> Vec<SensorSample> {
        let cfg = self.cfg;
        let n = (end / cfg.reference_interval).floor() as usize + 1;
        (0..n)
            .map(|i| {
                let mut s = SensorSample::new(i as f64 * cfg.reference_interval);
                s.temperature = Some(self.gauss(cfg.ambient_temp, cfg.static_temp_sd));
                s.humidity = Some(self.gauss(cfg.humidity_base, cfg.humidity_sd).clamp(0.0, 100.0));
                s.light = Some(self.light(light));
                s
            })
            .collect()
    }
}

/// Light level at `t` seconds into a climb that starts on `first` and walks
/// the floors up and down. Floors and landings alternate every `1 / (2 v)` s.
fn stair_level(cfg: &GeneratorConfig, velocity: f64, first: usize, t: f64) -> f64 {
    let segment = (t * 2.0 * velocity).floor() as usize;
    if segment % 2 == 1 {
        return cfg.landing_level;
    }
    let floors = cfg.floor_levels.len();
    let period = 2 * (floors - 1);
    let pos = (first + segment / 2) % period;
    let floor = if pos < floors { pos } else { period - pos };
    cfg.floor_levels[floor]
}

pub fn generate(cfg: &GeneratorConfig) -> Result<LabeledDataset, SynthError> {
    cfg.validate()?;
    let mut gen = Gen {
        cfg,
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
    };
    let mut plan = cfg.episode_plan();
    plan.shuffle(&mut gen.rng);

    let dt = 1.0 / cfg.sample_rate;
    let mut clock = 0.0;
    let mut episodes = Vec::with_capacity(plan.len());
    for (id, (label, n)) in plan.into_iter().enumerate() {
        let samples = gen.episode(label, clock, n);
        clock += n as f64 * dt + cfg.gap_seconds;
        let stream = SensorStream::new(samples, Some(label), Source::Wearable).map_err(|e| SynthError::Stream {
            file: format!("episode {id}"),
            source: e,
        })?;
        episodes.push(Episode { id, stream });
    }

    let end = clock;
    let mut places = vec![
        (Source::ReferenceLab, cfg.lab_light),
        (Source::ReferenceCubicle, cfg.cubicle_light),
    ];
    for (i, &level) in cfg.floor_levels.iter().enumerate() {
        places.push((Source::ReferenceFloor(i), LightLevel::new(level, cfg.stair_light_sd)));
    }
    let mut references = Vec::with_capacity(places.len());
    for (source, light) in places {
        let samples = gen.reference(light, end);
        let stream = SensorStream::new(samples, None, source).map_err(|e| SynthError::Stream {
            file: source.to_string(),
            source: e,
        })?;
        references.push(stream);
    }
    Ok(LabeledDataset { episodes, references })
}

pub const MANIFEST_FILE: &str = "manifest.csv";
const MANIFEST_HEADER: [&str; 8] = ["id", "kind", "source", "label", "start_time", "end_time", "samples", "file"];

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> SynthError + '_ {
    move |source| SynthError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Writes one CSV per stream plus `manifest.csv` into `dir`.
pub fn export(dataset: &LabeledDataset, dir: &Path) -> Result<(), SynthError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut manifest = csv::Writer::from_writer(Vec::new());
    manifest.write_record(MANIFEST_HEADER)?;
    let mut write = |id: String, kind: &str, stream: &SensorStream, file: String| -> Result<(), SynthError> {
        let (lo, hi) = stream.time_range().unwrap_or((0.0, 0.0));
        manifest.write_record([
            id,
            kind.to_string(),
            stream.source().to_string(),
            stream.label().map_or(String::new(), |l| l.to_string()),
            lo.to_string(),
            hi.to_string(),
            stream.len().to_string(),
            file.clone(),
        ])?;
        let path = dir.join(&file);
        fs::write(&path, model::write_stream(stream)).map_err(io_err(&path))
    };
    for e in &dataset.episodes {
        write(e.id.to_string(), "episode", &e.stream, format!("episode_{:03}.csv", e.id))?;
    }
    for r in &dataset.references {
        write(String::new(), "reference", r, format!("{}.csv", r.source()))?;
    }
    let bytes = manifest.into_inner().map_err(|e| SynthError::Manifest(e.to_string()))?;
    let path = dir.join(MANIFEST_FILE);
    fs::write(&path, bytes).map_err(io_err(&path))
}

/// Reads back a directory written by [`export`].
pub fn load_dataset(dir: &Path) -> Result<LabeledDataset, SynthError> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(io_err(&path))?;
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader.headers()?.clone();
    if header.iter().ne(MANIFEST_HEADER) {
        return Err(SynthError::Manifest(format!("unexpected header `{}`", header.iter().collect::<Vec<_>>().join(","))));
    }
    let schema = model::Schema::default();
    let mut dataset = LabeledDataset::default();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        let field = |i: usize| record.get(i).unwrap_or("");
        let source: Source = field(2)
            .parse()
            .map_err(|e| SynthError::Manifest(format!("row {}: {e}", row + 1)))?;
        let file = field(7).to_string();
        if file.contains(['/', '\\']) || file.is_empty() {
            return Err(SynthError::Manifest(format!("row {}: bad file name `{file}`", row + 1)));
        }
        let stream_path = dir.join(&file);
        let text = fs::read_to_string(&stream_path).map_err(io_err(&stream_path))?;
        let stream = model::parse_stream(&text, &schema)
            .map_err(|e| SynthError::Stream {
                file: file.clone(),
                source: e,
            })?
            .with_source(source);
        match field(1) {
            "episode" => {
                let id = field(0)
                    .parse()
                    .map_err(|_| SynthError::Manifest(format!("row {}: bad episode id `{}`", row + 1, field(0))))?;
                if stream.label().is_none() {
                    return Err(SynthError::Manifest(format!("episode {id} in {file} is unlabeled")));
                }
                dataset.episodes.push(Episode { id, stream });
            }
            "reference" => dataset.references.push(stream),
            other => return Err(SynthError::Manifest(format!("row {}: unknown kind `{other}`", row + 1))),
        }
    }
    Ok(dataset)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Channel;

    fn small() -> GeneratorConfig {
        GeneratorConfig {
            durations: [3.0, 2.0, 2.0, 2.5, 2.0, 4.0, 4.0, 2.0],
            episode_minutes: 2.0,
            ..Default::default()
        }
    }

    #[test]
    fn default_durations_match_table() {
        let ds = generate(&GeneratorConfig::default()).unwrap();
        let got = ds.durations();
        for (label, (&secs, &minutes)) in ActivityLabel::ALL.iter().zip(got.iter().zip(&DEFAULT_DURATIONS)) {
            assert!((secs - minutes * 60.0).abs() <= 1.0, "{label}: {secs}");
        }
        assert_eq!(ds.references.len(), 8);
    }

    #[test]
    fn same_seed_same_dataset() {
        let a = generate(&small()).unwrap();
        assert_eq!(a, generate(&small()).unwrap());
        let other = GeneratorConfig { seed: 7, ..small() };
        assert_ne!(a, generate(&other).unwrap());
    }

    #[test]
    fn episodes_are_disjoint_and_labeled() {
        let ds = generate(&small()).unwrap();
        let mut ranges: Vec<(f64, f64)> = ds.episodes.iter().map(|e| e.stream.time_range().unwrap()).collect();
        ranges.sort_by(|a, b| a.0.total_cmp(&b.0));
        assert!(ranges.windows(2).all(|w| w[0].1 < w[1].0));
        let (_, last) = ranges.last().unwrap();
        for r in &ds.references {
            assert!(r.time_range().unwrap().1 >= last - small().reference_interval);
            assert!(r.column(Channel::AccelX).is_none());
        }
    }

    #[test]
    fn stair_light_alternates() {
        let cfg = GeneratorConfig::default();
        let levels: Vec<f64> = (0..40).map(|t| stair_level(&cfg, 0.1, 0, t as f64)).collect();
        assert_eq!(&levels[..5], &[500.0; 5]);
        assert_eq!(&levels[5..10], &[120.0; 5]);
        assert_eq!(&levels[10..15], &[510.0; 5]);
        // Walking back down from the top floor.
        let top: Vec<f64> = (0..12).map(|k| stair_level(&cfg, 0.1, 0, k as f64 * 10.0)).collect();
        assert_eq!(top, vec![500.0, 510.0, 520.0, 530.0, 540.0, 550.0, 540.0, 530.0, 520.0, 510.0, 500.0, 510.0]);
    }

    #[test]
    fn invalid_configs_rejected() {
        let cases = [
            GeneratorConfig { cooling_slope: 0.01, ..small() },
            GeneratorConfig { static_temp_sd: 0.0, ..small() },
            GeneratorConfig { landing_level: 900.0, ..small() },
            GeneratorConfig {
                durations: [0.0; 8],
                ..small()
            },
        ];
        for cfg in cases {
            assert!(matches!(generate(&cfg), Err(SynthError::Config(_))));
        }
    }

    #[test]
    fn export_round_trip() {
        let ds = generate(&small()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        export(&ds, dir.path()).unwrap();
        let manifest = fs::read_to_string(dir.path().join(MANIFEST_FILE)).unwrap();
        assert_eq!(manifest.lines().count(), 1 + ds.episodes.len() + ds.references.len());
        assert_eq!(load_dataset(dir.path()).unwrap(), ds);
        assert_eq!(ds.episodes.len(), small().episode_plan().len());
    }

    #[test]
    fn empty_dataset_exports_manifest_only() {
        let dir = tempfile::tempdir().unwrap();
        export(&LabeledDataset::default(), dir.path()).unwrap();
        let files: Vec<_> = fs::read_dir(dir.path()).unwrap().collect();
        assert_eq!(files.len(), 1);
        assert_eq!(load_dataset(dir.path()).unwrap(), LabeledDataset::default());
    }
}
