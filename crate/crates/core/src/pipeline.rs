//! End-to-end batch analysis: calibrate, level, compensate, fuse, segment,
//! classify.

use crate::calibration::{calibrate, CalibrationParams};
use crate::classify::classify_segment;
use crate::config::AnalysisConfig;
use crate::error::PipelineError;
use crate::fusion::resample_align;
use crate::model::{EventReport, FusedTrace, MountPosition, Segment, SensorTrace};

/// Calibration outcome and data-quality notes for one node.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSummary {
    pub node_id: String,
    pub position: MountPosition,
    pub params: CalibrationParams,
    /// Time span of the stationary window used for tilt estimation.
    pub static_window: (f64, f64),
    pub samples: usize,
    pub saturated: usize,
    pub gaps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    pub front: NodeSummary,
    pub back: NodeSummary,
    pub fused: FusedTrace,
    pub segments: Vec<Segment>,
    pub events: Vec<EventReport>,
}

fn calibrate_node(
    trace: &SensorTrace,
    position: MountPosition,
    cfg: &AnalysisConfig,
) -> Result<(NodeSummary, SensorTrace), PipelineError> {
    let node = calibrate(trace, cfg).map_err(|source| PipelineError::Calibration {
        node: trace.node_id().to_string(),
        source,
    })?;
    let samples = trace.samples();
    let summary = NodeSummary {
        node_id: trace.node_id().to_string(),
        position,
        params: node.params,
        static_window: (
            samples[node.static_window.start].t,
            samples[node.static_window.end - 1].t,
        ),
        samples: trace.len(),
        saturated: trace.saturated_count(),
        gaps: trace.gaps().len(),
    };
    Ok((summary, node.trace.with_position(position)))
}

/// Runs the whole pipeline on a tilted-frame front/back pair.
pub fn analyze_pair(front: &SensorTrace, back: &SensorTrace, cfg: &AnalysisConfig) -> Result<Analysis, PipelineError> {
    let (front_summary, front_level) = calibrate_node(front, MountPosition::Front, cfg)?;
    let (back_summary, back_level) = calibrate_node(back, MountPosition::Back, cfg)?;
    let fused = resample_align(&front_level, &back_level)?;
    let segments = crate::segmentation::extract_segments(&fused, cfg);
    let mut events = Vec::new();
    for seg in &segments {
        if let Some(event) = classify_segment(seg, &fused, cfg)? {
            events.push(event);
        }
    }
    Ok(Analysis {
        front: front_summary,
        back: back_summary,
        fused,
        segments,
        events,
    })
}

/// Picks the configured front and back nodes out of a parsed log.
pub fn select_nodes<'a>(
    traces: &'a [SensorTrace],
    cfg: &AnalysisConfig,
) -> Result<(&'a SensorTrace, &'a SensorTrace), PipelineError> {
    let find = |id: &str| {
        traces
            .iter()
            .find(|t| t.node_id() == id)
            .ok_or_else(|| PipelineError::MissingNode(id.to_string()))
    };
    Ok((find(&cfg.front_node_id)?, find(&cfg.back_node_id)?))
}

pub fn analyze_traces(traces: &[SensorTrace], cfg: &AnalysisConfig) -> Result<Analysis, PipelineError> {
    let (front, back) = select_nodes(traces, cfg)?;
    analyze_pair(front, back, cfg)
}
