//! Impact detection, classification and localization for forklifts fitted
//! with two 3-axis accelerometers (front and back).
//!
//! Pipeline: [`ingest`] → [`calibration`] → [`fusion`] → [`segmentation`] →
//! [`classify`] → [`report`]. [`power`] models node battery life and
//! [`synth`] / [`suite`] provide labeled synthetic traces and the scenario
//! suite that scores the pipeline against them.

pub mod calibration;
pub mod classify;
pub mod commands;
pub mod config;
pub mod error;
pub mod fusion;
pub mod ingest;
pub mod model;
pub mod pipeline;
pub mod power;
pub mod report;
pub mod segmentation;
pub mod suite;
pub mod synth;

pub use config::AnalysisConfig;
pub use model::{EventKind, EventReport, FusedTrace, ImuSample, MountPosition, Segment, SensorTrace, Zone};
