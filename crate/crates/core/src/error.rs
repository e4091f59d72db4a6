use thiserror::Error;

use crate::model::Frame;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("sample rate must be positive and finite, got {0}")]
    InvalidSampleRate(f64),
    #[error("sample {index}: timestamp {t} is not a finite non-negative number")]
    InvalidTimestamp { index: usize, t: f64 },
    #[error("sample {index}: non-finite acceleration")]
    NonFiniteSample { index: usize },
    #[error("sample {index}: timestamps must be strictly increasing")]
    NotIncreasing { index: usize },
    #[error("illegal frame transition {from} -> {to}")]
    FrameTransition { from: Frame, to: Frame },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FusionError {
    #[error("front and back traces do not overlap in time")]
    NoOverlap,
    #[error("trace {node} is in the {found} frame, expected {expected}")]
    FrameMismatch {
        node: String,
        found: Frame,
        expected: Frame,
    },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("line {line}: malformed header: {reason}")]
    MalformedHeader { line: usize, reason: String },
    #[error("line {line}: unknown unit {unit:?} (expected G or ms2)")]
    UnknownUnit { line: usize, unit: String },
    #[error("line {line}: malformed record: {reason}")]
    MalformedRecord { line: usize, reason: String },
    #[error("line {line}: timestamps for node {node:?} are not increasing")]
    NonMonotoneTimestamps { line: usize, node: String },
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for ParseError {
    fn from(e: std::io::Error) -> Self {
        ParseError::Io(e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("unknown configuration key {0:?}")]
    UnknownKey(String),
    #[error("invalid value for {key}: {reason}")]
    InvalidValue { key: String, reason: String },
    #[error("i/o error: {0}")]
    Io(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CalibrationError {
    #[error("window covers {covered:.3} s, need at least {required:.3} s")]
    WindowTooShort { covered: f64, required: f64 },
    #[error("sensor is not stationary (per-axis std-dev {std_dev:?} m/s²)")]
    NotStationary { std_dev: [f64; 3] },
    #[error("tilt out of range: {0}")]
    TiltOutOfRange(String),
    #[error("not enough planar motion to estimate yaw ({magnitude:.3} m/s²)")]
    InsufficientMotion { magnitude: f64 },
    #[error("trace is in the {found} frame, expected {expected}")]
    FrameMismatch { found: Frame, expected: Frame },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClassifyError {
    #[error("segment covers no samples")]
    EmptySegment,
    #[error("segment range {start}..{end} is outside the fused trace ({len} samples)")]
    OutOfBounds { start: usize, end: usize, len: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PowerError {
    #[error("invalid power profile: {0}")]
    InvalidProfile(String),
    #[error("active time {active_s:.1} s/day exceeds one day")]
    DutyOverflow { active_s: f64 },
    #[error("{target:.3} years is not reachable (achievable range {min:.3}..={max:.3} years)")]
    Unachievable { target: f64, min: f64, max: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthError {
    #[error("scenario events {0} and {1} overlap in time")]
    OverlappingSpecs(usize, usize),
    #[error("unknown sweep parameter {0:?}")]
    UnknownParameter(String),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PipelineError {
    #[error("node {0:?} not found in log")]
    MissingNode(String),
    #[error("calibration of node {node:?} failed: {source}")]
    Calibration {
        node: String,
        #[source]
        source: CalibrationError,
    },
    #[error(transparent)]
    Fusion(#[from] FusionError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error(transparent)]
    Model(#[from] ModelError),
}
