//! Light-level location inference.
//!
//! Lab versus cubicle is decided by a Gaussian log-likelihood ratio against
//! reference-sensor statistics; stair climbing is detected by dynamic time
//! warping against a rendered template of alternating bright floors and dim
//! landings.

use std::fmt;
use std::ops::Add;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum LocationError {
    #[error("degenerate reference statistics: {0}")]
    DegenerateStats(String),
    #[error("empty observation sequence")]
    EmptyInput,
    #[error("invalid stair template: {0}")]
    Structure(String),
    #[error("no threshold can be calibrated from empty distance sets")]
    Calibration,
}

/// Sample mean and unbiased sample variance of one reference channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianStats {
    pub mean: f64,
    pub variance: f64,
    pub n: usize,
}

impl GaussianStats {
    pub fn new(mean: f64, variance: f64, n: usize) -> Result<Self, LocationError> {
        if n < 2 || !(variance > 0.0) || !variance.is_finite() || !mean.is_finite() {
            return Err(LocationError::DegenerateStats(format!(
                "mean {mean}, variance {variance}, n {n}"
            )));
        }
        Ok(GaussianStats { mean, variance, n })
    }
}

pub fn fit_reference_stats(readings: &[f64]) -> Result<GaussianStats, LocationError> {
    let n = readings.len();
    if n < 2 {
        return Err(LocationError::DegenerateStats(format!("{n} readings")));
    }
    let mean = readings.iter().sum::<f64>() / n as f64;
    let variance = readings.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    GaussianStats::new(mean, variance, n)
}

/// Summed log-likelihood ratio of `observations` for lab versus cubicle.
///
/// The per-observation term is
/// `ln(var_lab / var_cub) + (x - mu_cub)^2 / (2 var_cub) - (x - mu_lab)^2 / (2 var_lab)`.
/// Note the leading term is not halved; with equal variances it vanishes.
pub fn lda_log_ratio(
    observations: &[f64],
    cubicle: &GaussianStats,
    lab: &GaussianStats,
) -> Result<f64, LocationError> {
    if observations.is_empty() {
        return Err(LocationError::EmptyInput);
    }
    let log_var = (lab.variance / cubicle.variance).ln();
    Ok(observations
        .iter()
        .map(|x| {
            log_var + (x - cubicle.mean).powi(2) / (2.0 * cubicle.variance)
                - (x - lab.mean).powi(2) / (2.0 * lab.variance)
        })
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    Cubicle,
    Lab,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Location::Cubicle => "cubicle",
            Location::Lab => "lab",
        })
    }
}

/// Below the threshold is a cubicle; anything else, including a tie, is the lab.
pub fn classify_location(log_ratio: f64, threshold: f64) -> Location {
    if log_ratio < threshold {
        Location::Cubicle
    } else {
        Location::Lab
    }
}

/// DTW table over an arbitrary additive cost. `None` plays the role of an
/// infinite cell outside the table.
pub fn dtw_by<S, T, C, F>(s: &[S], t: &[T], cost: F) -> Option<C>
where
    C: Copy + PartialOrd + Add<Output = C>,
    F: Fn(&S, &T) -> C,
{
    if s.is_empty() || t.is_empty() {
        return None;
    }
    let m = t.len();
    let mut prev: Vec<Option<C>> = vec![None; m];
    let mut cur: Vec<Option<C>> = vec![None; m];
    for (i, si) in s.iter().enumerate() {
        for (j, tj) in t.iter().enumerate() {
            let best = if i == 0 && j == 0 {
                None
            } else {
                let left = if j > 0 { cur[j - 1] } else { None };
                let diag = if j > 0 { prev[j - 1] } else { None };
                [prev[j], left, diag]
                    .into_iter()
                    .flatten()
                    .fold(None, |acc: Option<C>, c| match acc {
                        Some(a) if a <= c => Some(a),
                        _ => Some(c),
                    })
            };
            let here = cost(si, tj);
            cur[j] = Some(match best {
                Some(b) => here + b,
                None => here,
            });
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[m - 1]
}

/// Unconstrained DTW with squared-difference cost.
pub fn dtw_distance(s: &[f64], t: &[f64]) -> Result<f64, LocationError> {
    dtw_by(s, t, |a, b| (a - b) * (a - b)).ok_or(LocationError::EmptyInput)
}

/// Light pattern of a stair climb: floor, landing, floor, ... plateaus.
#[derive(Debug, Clone, PartialEq)]
pub struct StairTemplate {
    /// Plateau level of each segment in order.
    pub levels: Vec<f64>,
    /// Seconds per segment.
    pub segment_duration: f64,
    pub segment_samples: usize,
    pub samples: Vec<f64>,
}

/// Renders the template. Each plateau lasts `1 / (2 * velocity)` seconds.
pub fn build_stair_template(
    floor_levels: &[f64],
    landing_level: f64,
    climb_velocity: f64,
    rate: f64,
) -> Result<StairTemplate, LocationError> {
    if floor_levels.len() < 2 {
        return Err(LocationError::Structure(format!(
            "{} floors, need at least 2",
            floor_levels.len()
        )));
    }
    if !(climb_velocity > 0.0) || !(rate > 0.0) {
        return Err(LocationError::Structure(format!(
            "velocity {climb_velocity} and rate {rate} must be positive"
        )));
    }
    let min_floor = floor_levels.iter().copied().fold(f64::INFINITY, f64::min);
    if landing_level >= min_floor {
        return Err(LocationError::Structure(format!(
            "landing level {landing_level} not below dimmest floor {min_floor}"
        )));
    }
    let segment_duration = 1.0 / (2.0 * climb_velocity);
    let segment_samples = (segment_duration * rate).round() as usize;
    if segment_samples == 0 {
        return Err(LocationError::Structure(format!(
            "segment of {segment_duration} s has no samples at {rate} Hz"
        )));
    }
    let mut levels = Vec::with_capacity(2 * floor_levels.len() - 1);
    for (i, &f) in floor_levels.iter().enumerate() {
        if i > 0 {
            levels.push(landing_level);
        }
        levels.push(f);
    }
    let samples = levels
        .iter()
        .flat_map(|&l| std::iter::repeat_n(l, segment_samples))
        .collect();
    Ok(StairTemplate {
        levels,
        segment_duration,
        segment_samples,
        samples,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClimbDetection {
    pub climbing: bool,
    /// DTW distance divided by `|window| + |template|`.
    pub distance: f64,
    pub raw_distance: f64,
}

pub fn detect_climbing(
    window: &[f64],
    template: &StairTemplate,
    threshold: f64,
) -> Result<ClimbDetection, LocationError> {
    let raw_distance = dtw_distance(window, &template.samples)?;
    let distance = raw_distance / (window.len() + template.samples.len()) as f64;
    Ok(ClimbDetection {
        climbing: distance < threshold,
        distance,
        raw_distance,
    })
}

/// Midpoint between the medians of climbing and non-climbing distances.
pub fn calibrate_threshold(climbing: &[f64], other: &[f64]) -> Result<f64, LocationError> {
    if climbing.is_empty() || other.is_empty() {
        return Err(LocationError::Calibration);
    }
    Ok(0.5 * (median(climbing) + median(other)))
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
