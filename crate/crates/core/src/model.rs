//! Shared domain types.
//!
//! Units are SI throughout: seconds for time, m/s² for acceleration. The axis
//! convention is vehicle-fixed:
//!
//! * `x` points forward (positive = forklift accelerating forward),
//! * `y` points left (positive net `a_y` means the body was pushed left, i.e.
//!   the impact came from the right),
//! * `z` points up (a leveled sensor at rest reads `+g` before compensation).
//!
//! Collision localization depends on the `y` sign rule, so every producer of
//! samples must follow it.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::Range;

use crate::error::ModelError;

/// Standard gravity used for unit conversion and compensation.
pub const G: f64 = 9.81;

/// Full-scale range of the accelerometer (±8 G).
pub const FSR: f64 = 8.0 * G;

/// Nominal sample rate of both nodes.
pub const DEFAULT_SAMPLE_RATE_HZ: f64 = 100.0;

/// Relative tolerance on inter-sample gaps before a trace counts as gappy.
const GAP_TOLERANCE: f64 = 0.2;

/// One timestamped 3-axis acceleration reading.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImuSample {
    pub t: f64,
    pub ax: f64,
    pub ay: f64,
    pub az: f64,
    /// At least one axis hit the full-scale range and was clipped.
    #[serde(default)]
    pub saturated: bool,
}

impl ImuSample {
    pub fn new(t: f64, ax: f64, ay: f64, az: f64) -> Self {
        Self {
            t,
            ax,
            ay,
            az,
            saturated: false,
        }
    }

    /// Clamps every axis into `[-FSR, FSR]`, flagging the sample when any axis
    /// reaches the rail.
    pub fn clipped(t: f64, ax: f64, ay: f64, az: f64) -> Self {
        let saturated = ax.abs() >= FSR || ay.abs() >= FSR || az.abs() >= FSR;
        Self {
            t,
            ax: ax.clamp(-FSR, FSR),
            ay: ay.clamp(-FSR, FSR),
            az: az.clamp(-FSR, FSR),
            saturated,
        }
    }

    pub fn vector(&self) -> [f64; 3] {
        [self.ax, self.ay, self.az]
    }

    pub fn a_total(&self) -> f64 {
        a_total(self)
    }
}

/// Euclidean norm of the acceleration vector.
pub fn a_total(sample: &ImuSample) -> f64 {
    (sample.ax * sample.ax + sample.ay * sample.ay + sample.az * sample.az).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MountPosition {
    Front,
    Back,
}

impl MountPosition {
    pub fn other(self) -> Self {
        match self {
            MountPosition::Front => MountPosition::Back,
            MountPosition::Back => MountPosition::Front,
        }
    }
}

impl fmt::Display for MountPosition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MountPosition::Front => "front",
            MountPosition::Back => "back",
        })
    }
}

/// Reference frame of a trace. Transitions only move forward:
/// `Tilted -> Leveled -> LeveledGravityCompensated`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Frame {
    Tilted,
    Leveled,
    LeveledGravityCompensated,
}

impl fmt::Display for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Frame::Tilted => "tilted",
            Frame::Leveled => "leveled",
            Frame::LeveledGravityCompensated => "leveled+gravity-compensated",
        })
    }
}

/// A gap between consecutive samples outside the ±20% tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gap {
    pub after_index: usize,
    pub t_from: f64,
    pub t_to: f64,
}

/// Time-ordered samples from one node.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorTrace {
    node_id: String,
    position: Option<MountPosition>,
    frame: Frame,
    sample_rate_hz: f64,
    samples: Vec<ImuSample>,
}

impl SensorTrace {
    /// Builds a trace, checking that timestamps are finite, non-negative and
    /// strictly increasing.
    pub fn new(
        node_id: impl Into<String>,
        frame: Frame,
        sample_rate_hz: f64,
        samples: Vec<ImuSample>,
    ) -> Result<Self, ModelError> {
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(ModelError::InvalidSampleRate(sample_rate_hz));
        }
        for (i, s) in samples.iter().enumerate() {
            if !(s.t.is_finite() && s.t >= 0.0) {
                return Err(ModelError::InvalidTimestamp { index: i, t: s.t });
            }
            if !(s.ax.is_finite() && s.ay.is_finite() && s.az.is_finite()) {
                return Err(ModelError::NonFiniteSample { index: i });
            }
            if i > 0 && s.t <= samples[i - 1].t {
                return Err(ModelError::NotIncreasing { index: i });
            }
        }
        Ok(Self {
            node_id: node_id.into(),
            position: None,
            frame,
            sample_rate_hz,
            samples,
        })
    }

    pub fn with_position(mut self, position: MountPosition) -> Self {
        self.position = Some(position);
        self
    }

    pub fn node_id(&self) -> &str {
        &self.node_id
    }

    pub fn position(&self) -> Option<MountPosition> {
        self.position
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn samples(&self) -> &[ImuSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn start(&self) -> Option<f64> {
        self.samples.first().map(|s| s.t)
    }

    pub fn end(&self) -> Option<f64> {
        self.samples.last().map(|s| s.t)
    }

    pub fn saturated_count(&self) -> usize {
        self.samples.iter().filter(|s| s.saturated).count()
    }

    /// Gaps whose length deviates from the nominal period by more than 20%.
    pub fn gaps(&self) -> Vec<Gap> {
        let period = 1.0 / self.sample_rate_hz;
        self.samples
            .windows(2)
            .enumerate()
            .filter_map(|(i, w)| {
                let dt = w[1].t - w[0].t;
                ((dt - period).abs() > GAP_TOLERANCE * period).then_some(Gap {
                    after_index: i,
                    t_from: w[0].t,
                    t_to: w[1].t,
                })
            })
            .collect()
    }

    pub fn is_gappy(&self) -> bool {
        !self.gaps().is_empty()
    }

    /// Moves the trace into `next`, mapping every sample through `f`.
    ///
    /// Only forward frame transitions are accepted; time stamps are kept.
    pub(crate) fn transform(
        &self,
        next: Frame,
        mut f: impl FnMut(&ImuSample) -> ImuSample,
    ) -> Result<Self, ModelError> {
        if next <= self.frame {
            return Err(ModelError::FrameTransition {
                from: self.frame,
                to: next,
            });
        }
        Ok(Self {
            node_id: self.node_id.clone(),
            position: self.position,
            frame: next,
            sample_rate_hz: self.sample_rate_hz,
            samples: self
                .samples
                .iter()
                .map(|s| {
                    let out = f(s);
                    ImuSample { t: s.t, ..out }
                })
                .collect(),
        })
    }

    /// Same trace with each sample replaced by `f(sample)`, frame unchanged.
    /// Used by fixture generators and symmetry tests.
    pub fn map_samples(&self, f: impl FnMut(&ImuSample) -> ImuSample) -> Self {
        Self {
            samples: self.samples.iter().map(f).collect(),
            ..self.clone()
        }
    }

    /// Samples whose time lies in `[from, to]`.
    pub fn window(&self, from: f64, to: f64) -> &[ImuSample] {
        let lo = self.samples.partition_point(|s| s.t < from);
        let hi = self.samples.partition_point(|s| s.t <= to);
        &self.samples[lo..hi.max(lo)]
    }
}

/// Front and back traces on a common time grid, plus their magnitude series.
#[derive(Debug, Clone, PartialEq)]
pub struct FusedTrace {
    front: SensorTrace,
    back: SensorTrace,
    total_front: Vec<f64>,
    total_back: Vec<f64>,
    total_mean: Vec<f64>,
}

impl FusedTrace {
    /// Pairs two traces already sampled on the same grid.
    pub(crate) fn from_aligned(front: SensorTrace, back: SensorTrace) -> Self {
        debug_assert_eq!(front.len(), back.len());
        let total_front: Vec<f64> = front.samples().iter().map(a_total).collect();
        let total_back: Vec<f64> = back.samples().iter().map(a_total).collect();
        let total_mean = total_front
            .iter()
            .zip(&total_back)
            .map(|(f, b)| (f + b) / 2.0)
            .collect();
        Self {
            front,
            back,
            total_front,
            total_back,
            total_mean,
        }
    }

    pub fn front(&self) -> &SensorTrace {
        &self.front
    }

    pub fn back(&self) -> &SensorTrace {
        &self.back
    }

    pub fn node(&self, position: MountPosition) -> &SensorTrace {
        match position {
            MountPosition::Front => &self.front,
            MountPosition::Back => &self.back,
        }
    }

    pub fn total_front(&self) -> &[f64] {
        &self.total_front
    }

    pub fn total_back(&self) -> &[f64] {
        &self.total_back
    }

    pub fn total_mean(&self) -> &[f64] {
        &self.total_mean
    }

    pub fn len(&self) -> usize {
        self.total_mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.total_mean.is_empty()
    }

    pub fn time(&self, index: usize) -> f64 {
        self.front.samples()[index].t
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.front.sample_rate_hz()
    }
}

/// A contiguous high-activity window on the fused grid.
///
/// `range` indexes both node traces of the [`FusedTrace`] it was cut from,
/// since they share one grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub t_start: f64,
    pub t_end: f64,
    pub range: Range<usize>,
    pub peak_a_total_mean: f64,
}

impl Segment {
    pub fn duration(&self) -> f64 {
        self.t_end - self.t_start
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Zone {
    LeftFront,
    RightFront,
    LeftBack,
    RightBack,
}

impl Zone {
    pub const ALL: [Zone; 4] = [
        Zone::LeftFront,
        Zone::RightFront,
        Zone::LeftBack,
        Zone::RightBack,
    ];

    pub fn new(position: MountPosition, right: bool) -> Self {
        match (position, right) {
            (MountPosition::Front, false) => Zone::LeftFront,
            (MountPosition::Front, true) => Zone::RightFront,
            (MountPosition::Back, false) => Zone::LeftBack,
            (MountPosition::Back, true) => Zone::RightBack,
        }
    }

    pub fn position(self) -> MountPosition {
        match self {
            Zone::LeftFront | Zone::RightFront => MountPosition::Front,
            Zone::LeftBack | Zone::RightBack => MountPosition::Back,
        }
    }

    pub fn is_right(self) -> bool {
        matches!(self, Zone::RightFront | Zone::RightBack)
    }

    pub fn mirrored_side(self) -> Self {
        Zone::new(self.position(), !self.is_right())
    }

    pub fn mirrored_end(self) -> Self {
        Zone::new(self.position().other(), self.is_right())
    }

    /// Short code used in reports ("LF", "RF", "LB", "RB").
    pub fn code(self) -> &'static str {
        match self {
            Zone::LeftFront => "LF",
            Zone::RightFront => "RF",
            Zone::LeftBack => "LB",
            Zone::RightBack => "RB",
        }
    }

    pub fn from_code(code: &str) -> Option<Self> {
        Zone::ALL.into_iter().find(|z| z.code() == code)
    }
}

impl fmt::Display for Zone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// Vibration severity: above (`AT`, rendered "AT!") or below (`BT`) the
/// severe-vibration threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SeverityLabel {
    BT,
    AT,
}

impl fmt::Display for SeverityLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SeverityLabel::BT => "BT",
            SeverityLabel::AT => "AT!",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EventKind {
    /// `peak` is the peak mean magnitude in m/s².
    Collision { zone: Zone, peak: f64 },
    HarshBraking,
    VibrationShort { label: SeverityLabel },
    VibrationLong { label: SeverityLabel },
}

impl EventKind {
    /// Event name in the detection vocabulary ("RB collision", "braking",
    /// "short vibration BT", "long vibration AT!").
    pub fn describe(&self) -> String {
        match self {
            EventKind::Collision { zone, .. } => format!("{zone} collision"),
            EventKind::HarshBraking => "braking".to_string(),
            EventKind::VibrationShort { label } => format!("short vibration {label}"),
            EventKind::VibrationLong { label } => format!("long vibration {label}"),
        }
    }

    pub fn label(&self) -> Option<SeverityLabel> {
        match self {
            EventKind::VibrationShort { label } | EventKind::VibrationLong { label } => {
                Some(*label)
            }
            _ => None,
        }
    }

    pub fn zone(&self) -> Option<Zone> {
        match self {
            EventKind::Collision { zone, .. } => Some(*zone),
            _ => None,
        }
    }

    pub fn is_vibration(&self) -> bool {
        self.label().is_some()
    }
}

/// Final classification of one segment.
///
/// `diagnostics` holds every feature value consulted by the decision tree, so
/// the outcome can be replayed with [`crate::classify::replay`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventReport {
    pub kind: EventKind,
    pub t_start: f64,
    pub t_end: f64,
    pub diagnostics: crate::classify::SegmentFeatures,
}

impl EventReport {
    pub fn peak(&self) -> f64 {
        self.diagnostics.peak_a_total_mean
    }
}
