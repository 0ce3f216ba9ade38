//! Stream data types, CSV ingestion and sliding-window segmentation.
//!
//! A [`SensorStream`] is an ordered, validated sequence of [`SensorSample`]s
//! from one device. Streams declare their channel set once: every sample
//! carries exactly the same channels, so windowed features never have to
//! interpolate over gaps.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Errors raised while building, parsing or segmenting streams.
#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("csv error: {0}")]
    Csv(String),
    #[error("missing required column `{0}`")]
    MissingColumn(String),
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("row {row}: malformed number `{value}` in column `{column}`")]
    Parse {
        row: usize,
        column: String,
        value: String,
    },
    #[error("row {row}: timestamp {timestamp} does not increase on the previous sample")]
    Ordering { row: usize, timestamp: f64 },
    #[error("row {row}: {channel} value {value} out of range")]
    Range {
        row: usize,
        channel: Channel,
        value: f64,
    },
    #[error("row {row}: channel set differs from the first sample")]
    ChannelGap { row: usize },
    #[error("row {row}: unknown activity label `{label}`")]
    Label { row: usize, label: String },
    #[error("row {row}: activity label differs from the rest of the stream")]
    MixedLabels { row: usize },
    #[error("stream has {len} samples, shorter than window length {window}")]
    EmptyWindow { len: usize, window: usize },
    #[error("invalid window parameters: length {window}, stride {stride}")]
    WindowParams { window: usize, stride: usize },
    #[error("stream has no samples")]
    EmptyStream,
    #[error("reference stream {reference} does not overlap the wearable time range")]
    NoOverlap { reference: usize },
    #[error("unknown stream source `{0}`")]
    Source(String),
}

/// One of the eight monitored activities.
///
/// Declaration order is the canonical class index used for tie-breaking in
/// the classifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ActivityLabel {
    ClimbStairs,
    TakeElevator,
    WalkOutdoor,
    WalkIndoor,
    RunIndoor,
    SitLab,
    SitCubicle,
    Rest,
}

impl ActivityLabel {
    pub const COUNT: usize = 8;

    pub const ALL: [ActivityLabel; 8] = [
        ActivityLabel::ClimbStairs,
        ActivityLabel::TakeElevator,
        ActivityLabel::WalkOutdoor,
        ActivityLabel::WalkIndoor,
        ActivityLabel::RunIndoor,
        ActivityLabel::SitLab,
        ActivityLabel::SitCubicle,
        ActivityLabel::Rest,
    ];

    /// Row and column order of the confusion-matrix reports (letters a to h).
    pub const REPORT_ORDER: [ActivityLabel; 8] = [
        ActivityLabel::ClimbStairs,
        ActivityLabel::TakeElevator,
        ActivityLabel::Rest,
        ActivityLabel::RunIndoor,
        ActivityLabel::WalkIndoor,
        ActivityLabel::WalkOutdoor,
        ActivityLabel::SitLab,
        ActivityLabel::SitCubicle,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ActivityLabel::ClimbStairs => "climb_stairs",
            ActivityLabel::TakeElevator => "take_elevator",
            ActivityLabel::WalkOutdoor => "walk_outdoor",
            ActivityLabel::WalkIndoor => "walk_indoor",
            ActivityLabel::RunIndoor => "run_indoor",
            ActivityLabel::SitLab => "sit_lab",
            ActivityLabel::SitCubicle => "sit_cubicle",
            ActivityLabel::Rest => "rest",
        }
    }

    /// Short name used in the confusion-matrix row headers.
    pub fn short_name(self) -> &'static str {
        match self {
            ActivityLabel::ClimbStairs => "climb",
            ActivityLabel::TakeElevator => "elevator",
            ActivityLabel::WalkOutdoor => "walk/out.",
            ActivityLabel::WalkIndoor => "walk/ind.",
            ActivityLabel::RunIndoor => "run/ind",
            ActivityLabel::SitLab => "sit/lab",
            ActivityLabel::SitCubicle => "sit/cub.",
            ActivityLabel::Rest => "rest",
        }
    }

    pub fn is_dynamic(self) -> bool {
        matches!(self, ActivityLabel::WalkIndoor | ActivityLabel::RunIndoor)
    }

    pub fn is_static(self) -> bool {
        matches!(
            self,
            ActivityLabel::SitLab | ActivityLabel::SitCubicle | ActivityLabel::TakeElevator
        )
    }
}

impl fmt::Display for ActivityLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ActivityLabel {
    type Err = String;

    /// Accepts the snake_case names and the CamelCase variant names.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        ActivityLabel::ALL
            .iter()
            .copied()
            .find(|l| l.as_str() == s || format!("{l:?}") == s)
            .ok_or_else(|| s.to_string())
    }
}

/// Device that produced a stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Source {
    Wearable,
    ReferenceLab,
    ReferenceCubicle,
    ReferenceFloor(usize),
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Wearable => f.write_str("wearable"),
            Source::ReferenceLab => f.write_str("reference-lab"),
            Source::ReferenceCubicle => f.write_str("reference-cubicle"),
            Source::ReferenceFloor(i) => write!(f, "reference-floor-{i}"),
        }
    }
}

impl FromStr for Source {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "wearable" => Ok(Source::Wearable),
            "reference-lab" => Ok(Source::ReferenceLab),
            "reference-cubicle" => Ok(Source::ReferenceCubicle),
            other => other
                .strip_prefix("reference-floor-")
                .and_then(|i| i.parse().ok())
                .map(Source::ReferenceFloor)
                .ok_or_else(|| ModelError::Source(other.to_string())),
        }
    }
}

/// A measurement channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Channel {
    Temperature,
    Humidity,
    Light,
    AccelX,
    AccelY,
    AccelZ,
}

impl Channel {
    pub const ALL: [Channel; 6] = [
        Channel::Temperature,
        Channel::Humidity,
        Channel::Light,
        Channel::AccelX,
        Channel::AccelY,
        Channel::AccelZ,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Channel::Temperature => "temperature",
            Channel::Humidity => "humidity",
            Channel::Light => "light",
            Channel::AccelX => "accel_x",
            Channel::AccelY => "accel_y",
            Channel::AccelZ => "accel_z",
        }
    }

    fn bit(self) -> u8 {
        1 << (self as u8)
    }

    fn check(self, value: f64) -> bool {
        match self {
            _ if !value.is_finite() => false,
            Channel::Humidity => (0.0..=100.0).contains(&value),
            Channel::Light => value >= 0.0,
            _ => true,
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Set of channels present in a sample or stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub struct ChannelSet(u8);

impl ChannelSet {
    pub fn all() -> Self {
        Channel::ALL.iter().fold(Self::default(), |s, &c| s.with(c))
    }

    pub fn with(self, channel: Channel) -> Self {
        ChannelSet(self.0 | channel.bit())
    }

    pub fn contains(self, channel: Channel) -> bool {
        self.0 & channel.bit() != 0
    }

    pub fn iter(self) -> impl Iterator<Item = Channel> {
        Channel::ALL.into_iter().filter(move |&c| self.contains(c))
    }
}

/// One timestamped multi-channel reading.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SensorSample {
    /// Seconds since the stream epoch.
    pub timestamp: f64,
    /// Degrees C.
    pub temperature: Option<f64>,
    /// Percent relative humidity.
    pub humidity: Option<f64>,
    /// Lux.
    pub light: Option<f64>,
    pub accel_x: Option<f64>,
    pub accel_y: Option<f64>,
    pub accel_z: Option<f64>,
}

impl SensorSample {
    pub fn new(timestamp: f64) -> Self {
        SensorSample {
            timestamp,
            ..Default::default()
        }
    }

    pub fn get(&self, channel: Channel) -> Option<f64> {
        match channel {
            Channel::Temperature => self.temperature,
            Channel::Humidity => self.humidity,
            Channel::Light => self.light,
            Channel::AccelX => self.accel_x,
            Channel::AccelY => self.accel_y,
            Channel::AccelZ => self.accel_z,
        }
    }

    pub fn set(&mut self, channel: Channel, value: Option<f64>) {
        let slot = match channel {
            Channel::Temperature => &mut self.temperature,
            Channel::Humidity => &mut self.humidity,
            Channel::Light => &mut self.light,
            Channel::AccelX => &mut self.accel_x,
            Channel::AccelY => &mut self.accel_y,
            Channel::AccelZ => &mut self.accel_z,
        };
        *slot = value;
    }

    pub fn channels(&self) -> ChannelSet {
        Channel::ALL
            .iter()
            .filter(|&&c| self.get(c).is_some())
            .fold(ChannelSet::default(), |s, &c| s.with(c))
    }
}

/// Validated, strictly time-ordered samples from one device.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorStream {
    samples: Vec<SensorSample>,
    label: Option<ActivityLabel>,
    source: Source,
    channels: ChannelSet,
}

impl SensorStream {
    /// Validates the stream invariants. Row numbers in errors are 1-based.
    pub fn new(
        samples: Vec<SensorSample>,
        label: Option<ActivityLabel>,
        source: Source,
    ) -> Result<Self, ModelError> {
        let channels = samples.first().map(|s| s.channels()).unwrap_or_default();
        let mut previous: Option<f64> = None;
        for (i, s) in samples.iter().enumerate() {
            let row = i + 1;
            if !s.timestamp.is_finite() || previous.is_some_and(|p| s.timestamp <= p) {
                return Err(ModelError::Ordering {
                    row,
                    timestamp: s.timestamp,
                });
            }
            previous = Some(s.timestamp);
            if s.channels() != channels {
                return Err(ModelError::ChannelGap { row });
            }
            for c in channels.iter() {
                let v = s.get(c).unwrap_or_default();
                if !c.check(v) {
                    return Err(ModelError::Range {
                        row,
                        channel: c,
                        value: v,
                    });
                }
            }
        }
        Ok(SensorStream {
            samples,
            label,
            source,
            channels,
        })
    }

    pub fn with_source(mut self, source: Source) -> Self {
        self.source = source;
        self
    }

    pub fn with_label(mut self, label: Option<ActivityLabel>) -> Self {
        self.label = label;
        self
    }

    pub fn samples(&self) -> &[SensorSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn label(&self) -> Option<ActivityLabel> {
        self.label
    }

    pub fn source(&self) -> Source {
        self.source
    }

    pub fn channels(&self) -> ChannelSet {
        self.channels
    }

    pub fn timestamps(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.timestamp).collect()
    }

    /// Column of values for `channel`, or `None` when the stream lacks it.
    pub fn column(&self, channel: Channel) -> Option<Vec<f64>> {
        self.channels.contains(channel).then(|| {
            self.samples
                .iter()
                .map(|s| s.get(channel).unwrap_or_default())
                .collect()
        })
    }

    pub fn time_range(&self) -> Option<(f64, f64)> {
        Some((self.samples.first()?.timestamp, self.samples.last()?.timestamp))
    }
}

/// Which CSV column feeds which field.
#[derive(Debug, Clone, PartialEq)]
pub struct Schema {
    pub timestamp: String,
    pub channels: Vec<(String, Channel)>,
    pub label: String,
}

impl Default for Schema {
    fn default() -> Self {
        Schema {
            timestamp: "timestamp".to_string(),
            channels: Channel::ALL
                .iter()
                .map(|&c| (c.name().to_string(), c))
                .collect(),
            label: "label".to_string(),
        }
    }
}

enum Column {
    Timestamp,
    Channel(Channel),
    Label,
}

/// Parses CSV `text` into a validated wearable stream.
///
/// Empty cells mark absent channels. The channel set is fixed by the first
/// row; later rows with a different set are rejected. A label column, when
/// present, must hold one label for the whole stream.
pub fn parse_stream(text: &str, schema: &Schema) -> Result<SensorStream, ModelError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| ModelError::Csv(e.to_string()))?
        .clone();
    let columns = headers
        .iter()
        .map(|h| {
            if h == schema.timestamp {
                Ok(Column::Timestamp)
            } else if h == schema.label {
                Ok(Column::Label)
            } else {
                schema
                    .channels
                    .iter()
                    .find(|(name, _)| name == h)
                    .map(|&(_, c)| Column::Channel(c))
                    .ok_or_else(|| ModelError::UnknownColumn(h.to_string()))
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    if !columns.iter().any(|c| matches!(c, Column::Timestamp)) {
        return Err(ModelError::MissingColumn(schema.timestamp.clone()));
    }

    let mut samples = Vec::new();
    let mut label: Option<Option<ActivityLabel>> = None;
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| ModelError::Csv(e.to_string()))?;
        let mut sample = SensorSample::default();
        let mut row_label = None;
        for (cell, (column, name)) in record.iter().zip(columns.iter().zip(headers.iter())) {
            match column {
                Column::Timestamp => sample.timestamp = parse_number(cell, row, name)?,
                Column::Channel(c) if !cell.is_empty() => {
                    sample.set(*c, Some(parse_number(cell, row, name)?))
                }
                Column::Channel(_) => {}
                Column::Label if !cell.is_empty() => {
                    row_label = Some(cell.parse().map_err(|label| ModelError::Label { row, label })?)
                }
                Column::Label => {}
            }
        }
        match label {
            None => label = Some(row_label),
            Some(l) if l != row_label => return Err(ModelError::MixedLabels { row }),
            Some(_) => {}
        }
        samples.push(sample);
    }
    SensorStream::new(samples, label.flatten(), Source::Wearable)
}

fn parse_number(cell: &str, row: usize, column: &str) -> Result<f64, ModelError> {
    cell.parse().map_err(|_| ModelError::Parse {
        row,
        column: column.to_string(),
        value: cell.to_string(),
    })
}

pub const CSV_HEADER: &str = "timestamp,temperature,humidity,light,accel_x,accel_y,accel_z,label";

/// Writes a stream in the canonical CSV schema.
///
/// Values use the shortest representation that parses back to the same
/// `f64`, so `parse_stream(write_stream(s))` is bit-exact.
pub fn write_stream(stream: &SensorStream) -> String {
    use std::fmt::Write;
    let mut out = String::with_capacity(stream.len() * 64 + CSV_HEADER.len() + 1);
    out.push_str(CSV_HEADER);
    out.push('\n');
    let label = stream.label.map(|l| l.as_str()).unwrap_or("");
    for s in &stream.samples {
        let _ = write!(out, "{}", s.timestamp);
        for c in Channel::ALL {
            out.push(',');
            if let Some(v) = s.get(c) {
                let _ = write!(out, "{v}");
            }
        }
        out.push(',');
        out.push_str(label);
        out.push('\n');
    }
    out
}

/// A full-length view over a stream, ending at sample index `end`.
#[derive(Debug, Clone, Copy)]
pub struct Window<'a> {
    stream: &'a SensorStream,
    end: usize,
    len: usize,
}

impl<'a> Window<'a> {
    pub fn new(stream: &'a SensorStream, end: usize, len: usize) -> Result<Self, ModelError> {
        if len < 2 || end + 1 < len || end >= stream.len() {
            return Err(ModelError::EmptyWindow {
                len: stream.len(),
                window: len,
            });
        }
        Ok(Window { stream, end, len })
    }

    pub fn stream(&self) -> &'a SensorStream {
        self.stream
    }

    pub fn end(&self) -> usize {
        self.end
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn start(&self) -> usize {
        self.end + 1 - self.len
    }

    /// The gradient reaches back `2 * floor(len / 2)` samples, one past the
    /// window start when the length is even.
    pub fn supports_gradient(&self) -> bool {
        self.end >= 2 * (self.len / 2)
    }

    pub fn end_time(&self) -> f64 {
        self.stream.samples[self.end].timestamp
    }

    pub fn samples(&self) -> &'a [SensorSample] {
        &self.stream.samples[self.start()..=self.end]
    }
}

/// End indices `w-1, w-1+stride, ...` of every full window over `n` samples.
pub fn window_ends(n: usize, w: usize, stride: usize) -> Result<Vec<usize>, ModelError> {
    if w < 2 || stride == 0 {
        return Err(ModelError::WindowParams { window: w, stride });
    }
    if n < w {
        return Err(ModelError::EmptyWindow { len: n, window: w });
    }
    Ok((w - 1..n).step_by(stride).collect())
}

/// Segments `stream` into full windows of length `w`.
pub fn windows(stream: &SensorStream, w: usize, stride: usize) -> Result<Vec<Window<'_>>, ModelError> {
    Ok(window_ends(stream.len(), w, stride)?
        .into_iter()
        .map(|end| Window {
            stream,
            end,
            len: w,
        })
        .collect())
}

/// Nearest reference sample for one wearable sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceMatch {
    pub index: usize,
    /// Wearable time minus reference time.
    pub offset: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlignedGroup {
    pub wearable_index: usize,
    /// One entry per reference stream; `None` when the nearest sample lies
    /// beyond the tolerance.
    pub matches: Vec<Option<ReferenceMatch>>,
}

/// Pairs every wearable sample with the nearest-in-time sample of each
/// reference stream. Ties go to the earlier reference sample.
pub fn align(
    wearable: &SensorStream,
    references: &[SensorStream],
    tolerance: Option<f64>,
) -> Result<Vec<AlignedGroup>, ModelError> {
    let (w_lo, w_hi) = wearable.time_range().ok_or(ModelError::EmptyStream)?;
    let ref_times: Vec<Vec<f64>> = references.iter().map(|r| r.timestamps()).collect();
    for (i, r) in references.iter().enumerate() {
        match r.time_range() {
            Some((lo, hi)) if lo <= w_hi && hi >= w_lo => {}
            _ => return Err(ModelError::NoOverlap { reference: i }),
        }
    }
    Ok(wearable
        .samples
        .iter()
        .enumerate()
        .map(|(wearable_index, s)| AlignedGroup {
            wearable_index,
            matches: ref_times
                .iter()
                .map(|times| {
                    let m = nearest(times, s.timestamp);
                    match tolerance {
                        Some(tol) if m.offset.abs() > tol => None,
                        _ => Some(m),
                    }
                })
                .collect(),
        })
        .collect())
}

fn nearest(times: &[f64], t: f64) -> ReferenceMatch {
    let after = times.partition_point(|&x| x < t);
    let index = if after == 0 {
        0
    } else if after == times.len() {
        times.len() - 1
    } else if times[after] - t < t - times[after - 1] {
        after
    } else {
        after - 1
    };
    ReferenceMatch {
        index,
        offset: t - times[index],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn stream_at(times: &[f64]) -> SensorStream {
        let samples = times
            .iter()
            .map(|&t| SensorSample {
                temperature: Some(25.0),
                ..SensorSample::new(t)
            })
            .collect();
        SensorStream::new(samples, None, Source::Wearable).unwrap()
    }

    #[test]
    fn parses_three_rows() {
        let text = "timestamp,temperature,label\n0,30.1,sit_lab\n1,30.2,sit_lab\n2,30.0,sit_lab\n";
        let s = parse_stream(text, &Schema::default()).unwrap();
        assert_eq!(s.timestamps(), vec![0.0, 1.0, 2.0]);
        assert_eq!(s.label(), Some(ActivityLabel::SitLab));
        assert!(s.channels().contains(Channel::Temperature));
        assert!(!s.channels().contains(Channel::Humidity));
    }

    #[test]
    fn repeated_timestamp_is_an_ordering_error() {
        let text = "timestamp,temperature\n0,30\n1,30\n1,30\n";
        assert_eq!(
            parse_stream(text, &Schema::default()),
            Err(ModelError::Ordering {
                row: 3,
                timestamp: 1.0
            })
        );
    }

    #[test]
    fn humidity_over_100_is_a_range_error() {
        let text = "timestamp,humidity\n0,50\n1,142\n";
        assert!(matches!(
            parse_stream(text, &Schema::default()),
            Err(ModelError::Range {
                row: 2,
                channel: Channel::Humidity,
                ..
            })
        ));
    }

    #[test]
    fn parse_errors_carry_row() {
        let text = "timestamp,light\n0,1\n1,abc\n";
        assert!(matches!(
            parse_stream(text, &Schema::default()),
            Err(ModelError::Parse { row: 2, .. })
        ));
        let text = "timestamp,light,label\n0,1,dancing\n";
        assert!(matches!(
            parse_stream(text, &Schema::default()),
            Err(ModelError::Label { row: 1, .. })
        ));
        let text = "timestamp,light\n0,-1\n";
        assert!(matches!(
            parse_stream(text, &Schema::default()),
            Err(ModelError::Range { .. })
        ));
    }

    #[test]
    fn gaps_and_mixed_labels_rejected() {
        let text = "timestamp,temperature,humidity\n0,30,50\n1,30,\n";
        assert_eq!(
            parse_stream(text, &Schema::default()),
            Err(ModelError::ChannelGap { row: 2 })
        );
        let text = "timestamp,temperature,label\n0,30,rest\n1,30,sit_lab\n";
        assert_eq!(
            parse_stream(text, &Schema::default()),
            Err(ModelError::MixedLabels { row: 2 })
        );
    }

    #[test]
    fn custom_schema_and_unknown_columns() {
        let schema = Schema {
            timestamp: "t".into(),
            channels: vec![("lux".into(), Channel::Light)],
            label: "activity".into(),
        };
        let s = parse_stream("t,lux,activity\n0,5,Rest\n", &schema).unwrap();
        assert_eq!(s.column(Channel::Light), Some(vec![5.0]));
        assert_eq!(s.label(), Some(ActivityLabel::Rest));
        assert_eq!(
            parse_stream("t,lux,foo\n0,5,1\n", &schema),
            Err(ModelError::UnknownColumn("foo".into()))
        );
        assert_eq!(
            parse_stream("lux\n5\n", &schema),
            Err(ModelError::MissingColumn("t".into()))
        );
    }

    #[test]
    fn window_counts() {
        assert_eq!(window_ends(10, 5, 1).unwrap().len(), 6);
        assert_eq!(window_ends(5, 5, 1).unwrap(), vec![4]);
        assert_eq!(
            window_ends(4, 5, 1),
            Err(ModelError::EmptyWindow { len: 4, window: 5 })
        );
        assert!(window_ends(10, 1, 1).is_err());
        assert!(window_ends(10, 2, 0).is_err());
    }

    #[test]
    fn window_views() {
        let s = stream_at(&[0.0, 1.0, 2.0, 3.0, 4.0]);
        let ws = windows(&s, 4, 1).unwrap();
        assert_eq!(ws.len(), 2);
        assert_eq!(ws[0].start(), 0);
        assert!(!ws[0].supports_gradient());
        assert!(ws[1].supports_gradient());
        assert_eq!(ws[1].samples().len(), 4);
        assert_eq!(ws[1].end_time(), 4.0);
        assert!(Window::new(&s, 2, 4).is_err());
    }

    #[test]
    fn align_examples() {
        let w = stream_at(&[0.0, 1.0, 2.0]);
        let groups = align(&w, &[stream_at(&[0.0, 1.0, 2.0])], None).unwrap();
        assert!(groups.iter().all(|g| g.matches[0].unwrap().offset == 0.0));

        let w = stream_at(&[1.4]);
        let g = align(&w, &[stream_at(&[1.0, 2.0])], None).unwrap();
        let m = g[0].matches[0].unwrap();
        assert_eq!(m.index, 0);
        assert!((m.offset - 0.4).abs() < 1e-12);

        // exact midpoint goes to the earlier sample
        let g = align(&stream_at(&[1.5]), &[stream_at(&[1.0, 2.0])], None).unwrap();
        assert_eq!(g[0].matches[0].unwrap().index, 0);

        assert_eq!(
            align(&stream_at(&[0.0, 1.0]), &[stream_at(&[5.0, 6.0])], None),
            Err(ModelError::NoOverlap { reference: 0 })
        );
    }

    #[test]
    fn align_tolerance_drops_far_matches() {
        let w = stream_at(&[0.0, 5.0]);
        let g = align(&w, &[stream_at(&[0.0, 1.0])], Some(0.5)).unwrap();
        assert!(g[0].matches[0].is_some());
        assert!(g[1].matches[0].is_none());
    }

    fn arb_stream() -> impl Strategy<Value = SensorStream> {
        (
            prop::collection::vec(
                (
                    0.001f64..10.0,
                    prop::option::of(-40.0f64..60.0),
                    0.0f64..=100.0,
                    0.0f64..1e5,
                    -8.0f64..8.0,
                ),
                1..40,
            ),
            any::<bool>(),
            prop::option::of(0usize..8),
        )
            .prop_map(|(rows, with_light, label)| {
                let mut t = -3.0;
                let has_temp = rows[0].1.is_some();
                let samples = rows
                    .iter()
                    .map(|&(dt, temp, hum, light, ax)| {
                        t += dt;
                        SensorSample {
                            timestamp: t,
                            temperature: has_temp.then(|| temp.unwrap_or(1.0 / 3.0)),
                            humidity: Some(hum),
                            light: with_light.then_some(light),
                            accel_x: Some(ax),
                            ..Default::default()
                        }
                    })
                    .collect();
                SensorStream::new(samples, label.and_then(ActivityLabel::from_index), Source::Wearable)
                    .unwrap()
            })
    }

    proptest! {
        #[test]
        fn csv_round_trip_is_bit_exact(stream in arb_stream()) {
            let text = write_stream(&stream);
            let back = parse_stream(&text, &Schema::default()).unwrap();
            prop_assert_eq!(back.len(), stream.len());
            for (a, b) in back.samples().iter().zip(stream.samples()) {
                prop_assert_eq!(a.timestamp.to_bits(), b.timestamp.to_bits());
                for c in Channel::ALL {
                    prop_assert_eq!(a.get(c).map(f64::to_bits), b.get(c).map(f64::to_bits));
                }
            }
            prop_assert_eq!(back, stream);
        }

        #[test]
        fn windows_match_closed_form(n in 0usize..200, w in 2usize..50, stride in 1usize..20) {
            let times: Vec<f64> = (0..n).map(|i| i as f64).collect();
            let s = stream_at(&times);
            match windows(&s, w, stride) {
                Ok(ws) => {
                    prop_assert_eq!(ws.len(), (n - w) / stride + 1);
                    for win in ws {
                        prop_assert!(win.end() + 1 >= win.len());
                        prop_assert_eq!(win.samples().len(), w);
                    }
                }
                Err(_) => prop_assert!(n < w),
            }
        }

        #[test]
        fn swapping_aligned_streams_negates_offsets(
            n in 2usize..30,
            spacing in 0.5f64..3.0,
            shift_frac in -0.49f64..0.49,
        ) {
            let a: Vec<f64> = (0..n).map(|i| i as f64 * spacing).collect();
            let b: Vec<f64> = a.iter().map(|t| t + shift_frac * spacing).collect();
            let (sa, sb) = (stream_at(&a), stream_at(&b));
            let ab = align(&sa, std::slice::from_ref(&sb), None).unwrap();
            let ba = align(&sb, std::slice::from_ref(&sa), None).unwrap();
            for (x, y) in ab.iter().zip(&ba) {
                let (mx, my) = (x.matches[0].unwrap(), y.matches[0].unwrap());
                prop_assert_eq!(mx.offset, -my.offset);
            }
        }
    }
}
