//! Windowed feature extraction.
//!
//! Temperature gradient and spread separate static from dynamic activity,
//! humidity spread flags post-exercise rest, the acceleration axis spreads
//! capture motion intensity, and the two light features (filled when a
//! [`LocationContext`] is supplied) encode location.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::location::{self, GaussianStats, LocationError, StairTemplate};
use crate::model::{self, ActivityLabel, Channel, ModelError, SensorStream};

#[derive(Debug, Error, PartialEq)]
pub enum FeatureError {
    #[error("window error: {0}")]
    Window(String),
    #[error("feature `{feature}` needs channel `{channel}`, absent from the stream")]
    MissingChannel { feature: Feature, channel: Channel },
    #[error("timestamps at indices {0} and {1} do not increase")]
    Timestamps(usize, usize),
    #[error(transparent)]
    Stream(#[from] ModelError),
    #[error(transparent)]
    Location(#[from] LocationError),
    #[error("feature csv: {0}")]
    Csv(String),
    #[error("unknown feature `{0}`")]
    UnknownFeature(String),
}

/// A named feature column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Feature {
    TempGradient,
    TempSd,
    HumiditySd,
    AccelSdX,
    AccelSdY,
    AccelSdZ,
    LightLr,
    DtwDist,
}

impl Feature {
    pub const ALL: [Feature; 8] = [
        Feature::TempGradient,
        Feature::TempSd,
        Feature::HumiditySd,
        Feature::AccelSdX,
        Feature::AccelSdY,
        Feature::AccelSdZ,
        Feature::LightLr,
        Feature::DtwDist,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Feature::TempGradient => "temp_gradient",
            Feature::TempSd => "temp_sd",
            Feature::HumiditySd => "humidity_sd",
            Feature::AccelSdX => "accel_sd_x",
            Feature::AccelSdY => "accel_sd_y",
            Feature::AccelSdZ => "accel_sd_z",
            Feature::LightLr => "light_lr",
            Feature::DtwDist => "dtw_dist",
        }
    }

    pub fn channel(self) -> Channel {
        match self {
            Feature::TempGradient | Feature::TempSd => Channel::Temperature,
            Feature::HumiditySd => Channel::Humidity,
            Feature::AccelSdX => Channel::AccelX,
            Feature::AccelSdY => Channel::AccelY,
            Feature::AccelSdZ => Channel::AccelZ,
            Feature::LightLr | Feature::DtwDist => Channel::Light,
        }
    }

    pub fn needs_location(self) -> bool {
        matches!(self, Feature::LightLr | Feature::DtwDist)
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Feature {
    type Err = FeatureError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Feature::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| FeatureError::UnknownFeature(s.to_string()))
    }
}

/// Features of one window; absent entries were not computable from the stream.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FeatureVector {
    /// Timestamp of the last sample in the window.
    pub end_time: f64,
    pub temp_gradient: Option<f64>,
    pub temp_sd: Option<f64>,
    pub humidity_sd: Option<f64>,
    pub accel_sd_x: Option<f64>,
    pub accel_sd_y: Option<f64>,
    pub accel_sd_z: Option<f64>,
    pub light_lr: Option<f64>,
    pub dtw_dist: Option<f64>,
    pub label: Option<ActivityLabel>,
}

impl FeatureVector {
    pub fn get(&self, feature: Feature) -> Option<f64> {
        match feature {
            Feature::TempGradient => self.temp_gradient,
            Feature::TempSd => self.temp_sd,
            Feature::HumiditySd => self.humidity_sd,
            Feature::AccelSdX => self.accel_sd_x,
            Feature::AccelSdY => self.accel_sd_y,
            Feature::AccelSdZ => self.accel_sd_z,
            Feature::LightLr => self.light_lr,
            Feature::DtwDist => self.dtw_dist,
        }
    }

    pub fn set(&mut self, feature: Feature, value: Option<f64>) {
        let slot = match feature {
            Feature::TempGradient => &mut self.temp_gradient,
            Feature::TempSd => &mut self.temp_sd,
            Feature::HumiditySd => &mut self.humidity_sd,
            Feature::AccelSdX => &mut self.accel_sd_x,
            Feature::AccelSdY => &mut self.accel_sd_y,
            Feature::AccelSdZ => &mut self.accel_sd_z,
            Feature::LightLr => &mut self.light_lr,
            Feature::DtwDist => &mut self.dtw_dist,
        };
        *slot = value;
    }
}

/// Reference statistics and stair template for the light features.
#[derive(Debug, Clone, PartialEq)]
pub struct LocationContext {
    pub cubicle: GaussianStats,
    pub lab: GaussianStats,
    pub template: StairTemplate,
}

/// Average of the paired finite-difference slopes
/// `(v[k-i] - v[k-h-i]) / (t[k-i] - t[k-h-i])`, `i = 0..=h`, `h = w / 2`.
pub fn temp_gradient(times: &[f64], values: &[f64], end: usize, w: usize) -> Result<f64, FeatureError> {
    let half = w / 2;
    if w < 2 || end < 2 * half || end >= values.len() || end >= times.len() {
        return Err(FeatureError::Window(format!(
            "gradient at index {end} with length {w} needs {} samples of history",
            2 * half
        )));
    }
    let mut sum = 0.0;
    for i in 0..=half {
        let (a, b) = (end - i, end - half - i);
        let dt = times[a] - times[b];
        if !(dt > 0.0) {
            return Err(FeatureError::Timestamps(b, a));
        }
        sum += (values[a] - values[b]) / dt;
    }
    Ok(sum / (half + 1) as f64)
}

/// Population standard deviation of `values[end + 1 - w ..= end]`.
pub fn rolling_sd(values: &[f64], end: usize, w: usize) -> Result<f64, FeatureError> {
    if w < 2 || end + 1 < w || end >= values.len() {
        return Err(FeatureError::Window(format!(
            "standard deviation at index {end} with length {w}"
        )));
    }
    let slice = &values[end + 1 - w..=end];
    let mean = slice.iter().sum::<f64>() / w as f64;
    Ok((slice.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / w as f64).sqrt())
}

/// Features computable from the stream's channels, plus the light features
/// when `location` is given.
pub fn extract_features(
    stream: &SensorStream,
    w: usize,
    stride: usize,
    location: Option<&LocationContext>,
) -> Result<Vec<FeatureVector>, FeatureError> {
    let requested: Vec<Feature> = Feature::ALL
        .into_iter()
        .filter(|f| {
            if f.needs_location() {
                location.is_some()
            } else {
                stream.channels().contains(f.channel())
            }
        })
        .collect();
    extract_selected(stream, w, stride, location, &requested)
}

/// Computes exactly `features`, failing if the stream lacks a needed channel.
///
/// Every window yields one vector. The gradient needs `2 * floor(w / 2)`
/// samples of history, so for even `w` the first window leaves it absent.
pub fn extract_selected(
    stream: &SensorStream,
    w: usize,
    stride: usize,
    location: Option<&LocationContext>,
    features: &[Feature],
) -> Result<Vec<FeatureVector>, FeatureError> {
    for &f in features {
        if !stream.channels().contains(f.channel()) {
            return Err(FeatureError::MissingChannel {
                feature: f,
                channel: f.channel(),
            });
        }
    }
    let needs_location = features.iter().any(|f| f.needs_location());
    if needs_location && location.is_none() {
        return Err(FeatureError::Window(
            "light features need reference statistics and a stair template".into(),
        ));
    }
    let ends = model::window_ends(stream.len(), w, stride)?;
    let times = stream.timestamps();
    let columns: Vec<Option<Vec<f64>>> = Channel::ALL.iter().map(|&c| stream.column(c)).collect();
    let column = |c: Channel| columns[c as usize].as_deref().unwrap_or(&[]);

    let mut out = Vec::with_capacity(ends.len());
    for end in ends {
        let mut fv = FeatureVector {
            end_time: times[end],
            label: stream.label(),
            ..Default::default()
        };
        for &f in features {
            let values = column(f.channel());
            let value = match f {
                Feature::TempGradient if end < 2 * (w / 2) => None,
                Feature::TempGradient => Some(temp_gradient(&times, values, end, w)?),
                Feature::LightLr | Feature::DtwDist => {
                    let ctx = location.expect("checked above");
                    let light = &values[end + 1 - w..=end];
                    Some(if f == Feature::LightLr {
                        location::lda_log_ratio(light, &ctx.cubicle, &ctx.lab)?
                    } else {
                        location::detect_climbing(light, &ctx.template, f64::INFINITY)?.distance
                    })
                }
                _ => Some(rolling_sd(values, end, w)?),
            };
            fv.set(f, value);
        }
        out.push(fv);
    }
    Ok(out)
}

/// Header of the feature matrix export.
pub fn feature_csv_header() -> String {
    let mut h = String::from("window_end");
    for f in Feature::ALL {
        h.push(',');
        h.push_str(f.name());
    }
    h.push_str(",label");
    h
}

/// One row per window with every feature column; absent values are empty.
pub fn write_feature_csv(rows: &[FeatureVector]) -> String {
    use std::fmt::Write;
    let mut out = feature_csv_header();
    out.push('\n');
    for r in rows {
        let _ = write!(out, "{}", r.end_time);
        for f in Feature::ALL {
            out.push(',');
            if let Some(v) = r.get(f) {
                let _ = write!(out, "{v}");
            }
        }
        out.push(',');
        if let Some(l) = r.label {
            out.push_str(l.as_str());
        }
        out.push('\n');
    }
    out
}

/// Reads a feature matrix export. Feature columns may be any subset, in any order.
pub fn parse_feature_csv(text: &str) -> Result<Vec<FeatureVector>, FeatureError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| FeatureError::Csv(e.to_string()))?
        .clone();
    enum Col {
        End,
        Label,
        Feature(Feature),
    }
    let cols = headers
        .iter()
        .map(|h| match h {
            "window_end" => Ok(Col::End),
            "label" => Ok(Col::Label),
            other => other.parse().map(Col::Feature),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| FeatureError::Csv(e.to_string()))?;
        let mut fv = FeatureVector::default();
        for (cell, col) in record.iter().zip(&cols) {
            if cell.is_empty() {
                continue;
            }
            let number = || {
                cell.parse::<f64>()
                    .map_err(|_| FeatureError::Csv(format!("row {}: malformed number `{cell}`", i + 1)))
            };
            match col {
                Col::End => fv.end_time = number()?,
                Col::Feature(f) => fv.set(*f, Some(number()?)),
                Col::Label => {
                    fv.label = Some(cell.parse().map_err(|l| {
                        FeatureError::Csv(format!("row {}: unknown activity label `{l}`", i + 1))
                    })?)
                }
            }
        }
        rows.push(fv);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::location::build_stair_template;
    use crate::model::{SensorSample, Source};
    use proptest::prelude::*;

    /// Straight evaluation of the slope average, written independently of
    /// the production loop.
    fn gradient_oracle(t: &[f64], v: &[f64], k: usize, w: usize) -> f64 {
        let h = w / 2;
        let terms: Vec<f64> = (0..=h)
            .map(|i| (v[k - i] - v[k - h - i]) / (t[k - i] - t[k - h - i]))
            .collect();
        terms.iter().sum::<f64>() / terms.len() as f64
    }

    fn temp_stream(times: &[f64], temps: &[f64], label: Option<ActivityLabel>) -> SensorStream {
        let samples = times
            .iter()
            .zip(temps)
            .map(|(&t, &v)| SensorSample {
                temperature: Some(v),
                ..SensorSample::new(t)
            })
            .collect();
        SensorStream::new(samples, label, Source::Wearable).unwrap()
    }

    #[test]
    fn gradient_hand_example() {
        let t = [0.0, 1.0, 2.0, 3.0, 4.0];
        let v = [30.0, 29.8, 29.5, 29.3, 28.8];
        let oracle = gradient_oracle(&t, &v, 4, 4);
        assert!((oracle - (-0.85 / 3.0)).abs() < 1e-12);
        let g = temp_gradient(&t, &v, 4, 4).unwrap();
        assert!((g - oracle).abs() < 1e-12);
        assert!((g + 0.283_333).abs() < 1e-6);
    }

    #[test]
    fn gradient_constant_and_affine() {
        let t: Vec<f64> = (0..20).map(|i| i as f64 * 0.7).collect();
        let flat = vec![21.5; 20];
        assert_eq!(temp_gradient(&t, &flat, 19, 8).unwrap(), 0.0);
        let ramp: Vec<f64> = t.iter().map(|x| 2.0 * x + 5.0).collect();
        assert!((temp_gradient(&t, &ramp, 19, 8).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn gradient_needs_history() {
        let t = [0.0, 1.0, 2.0, 3.0];
        let v = [1.0; 4];
        assert!(matches!(temp_gradient(&t, &v, 3, 4), Err(FeatureError::Window(_))));
        assert!(temp_gradient(&t, &v, 3, 3).is_ok());
        assert_eq!(
            temp_gradient(&[0.0, 1.0, 1.0], &[1.0; 3], 2, 2),
            Err(FeatureError::Timestamps(1, 2))
        );
    }

    #[test]
    fn sd_examples() {
        assert_eq!(rolling_sd(&[7.0; 5], 4, 5).unwrap(), 0.0);
        assert_eq!(rolling_sd(&[1.0, 3.0], 1, 2).unwrap(), 1.0);
        assert!((rolling_sd(&[0.0, 0.0, 0.0, 4.0], 3, 4).unwrap() - 3f64.sqrt()).abs() < 1e-12);
        assert!(rolling_sd(&[1.0, 2.0], 1, 1).is_err());
        assert!(rolling_sd(&[1.0, 2.0], 0, 2).is_err());
    }

    #[test]
    fn temperature_only_stream() {
        let t: Vec<f64> = (0..120).map(f64::from).collect();
        let v: Vec<f64> = t.iter().map(|x| 30.0 - 0.01 * x).collect();
        let s = temp_stream(&t, &v, Some(ActivityLabel::WalkIndoor));
        let fvs = extract_features(&s, 60, 1, None).unwrap();
        assert_eq!(fvs.len(), 61);
        assert!(fvs[0].temp_gradient.is_none());
        for fv in &fvs {
            assert_eq!(fv.label, Some(ActivityLabel::WalkIndoor));
            assert!(fv.temp_sd.is_some());
            assert!(fv.humidity_sd.is_none() && fv.accel_sd_x.is_none() && fv.light_lr.is_none());
        }
        for fv in &fvs[1..] {
            assert!((fv.temp_gradient.unwrap() + 0.01).abs() < 1e-9);
        }
    }

    #[test]
    fn missing_channel_is_named() {
        let s = temp_stream(&[0.0, 1.0, 2.0], &[1.0, 2.0, 3.0], None);
        assert_eq!(
            extract_selected(&s, 2, 1, None, &[Feature::HumiditySd]),
            Err(FeatureError::MissingChannel {
                feature: Feature::HumiditySd,
                channel: Channel::Humidity
            })
        );
        let ctx = LocationContext {
            cubicle: GaussianStats::new(300.0, 100.0, 10).unwrap(),
            lab: GaussianStats::new(600.0, 100.0, 10).unwrap(),
            template: build_stair_template(&[500.0, 520.0], 100.0, 0.1, 1.0).unwrap(),
        };
        assert!(matches!(
            extract_features(&s, 2, 1, Some(&ctx)),
            Err(FeatureError::MissingChannel {
                feature: Feature::LightLr,
                ..
            })
        ));
    }

    #[test]
    fn location_features_filled_with_context() {
        let samples: Vec<SensorSample> = (0..20)
            .map(|i| SensorSample {
                light: Some(600.0 + (i % 3) as f64),
                ..SensorSample::new(i as f64)
            })
            .collect();
        let s = SensorStream::new(samples, None, Source::Wearable).unwrap();
        let ctx = LocationContext {
            cubicle: GaussianStats::new(300.0, 100.0, 10).unwrap(),
            lab: GaussianStats::new(600.0, 100.0, 10).unwrap(),
            template: build_stair_template(&[500.0, 520.0], 100.0, 0.1, 1.0).unwrap(),
        };
        let fvs = extract_features(&s, 10, 5, Some(&ctx)).unwrap();
        assert_eq!(fvs.len(), 3);
        assert!(fvs.iter().all(|f| f.light_lr.unwrap() > 0.0 && f.dtw_dist.unwrap() > 0.0));
        assert!(extract_features(&s, 10, 5, None).unwrap()[0].light_lr.is_none());
    }

    #[test]
    fn feature_csv_round_trip() {
        let rows = vec![
            FeatureVector {
                end_time: 59.0,
                temp_gradient: Some(-0.25),
                temp_sd: Some(0.1),
                label: Some(ActivityLabel::Rest),
                ..Default::default()
            },
            FeatureVector {
                end_time: 60.0,
                dtw_dist: Some(1e-300),
                ..Default::default()
            },
        ];
        let text = write_feature_csv(&rows);
        assert!(text.starts_with("window_end,temp_gradient,"));
        assert!(text.lines().next().unwrap().ends_with(",label"));
        assert_eq!(parse_feature_csv(&text).unwrap(), rows);
        assert!(parse_feature_csv("window_end,bogus\n1,2\n").is_err());
    }

    proptest! {
        #[test]
        fn affine_gradient_equals_slope(slope in -5.0f64..5.0, offset in -50.0f64..50.0,
                                        w in 2usize..40, extra in 0usize..10,
                                        steps in prop::collection::vec(0.1f64..3.0, 90)) {
            let mut t = vec![0.0];
            for s in &steps { t.push(t.last().unwrap() + s); }
            let v: Vec<f64> = t.iter().map(|x| slope * x + offset).collect();
            let end = 2 * (w / 2) + extra;
            let g = temp_gradient(&t, &v, end, w).unwrap();
            prop_assert!((g - slope).abs() <= 1e-9 * slope.abs().max(1.0));
        }

        #[test]
        fn gradient_matches_oracle(v in prop::collection::vec(-10.0f64..40.0, 30), w in 2usize..20) {
            let t: Vec<f64> = (0..30).map(|i| i as f64 * 1.5).collect();
            let end = 29;
            let g = temp_gradient(&t, &v, end, w).unwrap();
            prop_assert!((g - gradient_oracle(&t, &v, end, w)).abs() < 1e-12);
        }

        #[test]
        fn shift_and_scale(v in prop::collection::vec(-10.0f64..40.0, 30), c in -100.0f64..100.0,
                           a in -10.0f64..10.0, w in 2usize..20) {
            let t: Vec<f64> = (0..30).map(f64::from).collect();
            let shifted: Vec<f64> = v.iter().map(|x| x + c).collect();
            let scaled: Vec<f64> = v.iter().map(|x| a * x).collect();
            let sd = rolling_sd(&v, 29, w).unwrap();
            prop_assert!(sd >= 0.0 && sd.is_finite());
            prop_assert!((rolling_sd(&shifted, 29, w).unwrap() - sd).abs() < 1e-9);
            prop_assert!((rolling_sd(&scaled, 29, w).unwrap() - a.abs() * sd).abs() < 1e-9);
            let g = temp_gradient(&t, &v, 29, w).unwrap();
            prop_assert!((temp_gradient(&t, &shifted, 29, w).unwrap() - g).abs() < 1e-9);
            prop_assert!((temp_gradient(&t, &scaled, 29, w).unwrap() - a * g).abs() < 1e-9);
        }
    }
}
