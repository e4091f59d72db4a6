//! Segment extraction from the fused mean-magnitude series.
//!
//! 1. Samples with mean magnitude strictly above `trigger_threshold` trigger.
//! 2. Each trigger grows backward and forward over samples at or above
//!    `release_threshold`; the samples just outside are below it.
//! 3. Windows separated by at most `merge_gap` seconds merge.
//! 4. Windows shorter than `min_segment` are dropped.
//!
//! Durations run from the first to the last sample time of a window.

use crate::config::AnalysisConfig;
use crate::model::{FusedTrace, Segment};

/// Absorbs float error when comparing grid-time gaps against `merge_gap`.
pub const MERGE_EPS_S: f64 = 1e-9;

pub fn extract_segments(fused: &FusedTrace, cfg: &AnalysisConfig) -> Vec<Segment> {
    let times: Vec<f64> = (0..fused.len()).map(|i| fused.time(i)).collect();
    segments_from_series(&times, fused.total_mean(), cfg)
}

/// Segmentation over a bare `(time, magnitude)` series.
pub fn segments_from_series(times: &[f64], magnitude: &[f64], cfg: &AnalysisConfig) -> Vec<Segment> {
    debug_assert_eq!(times.len(), magnitude.len());

    // Runs of samples at or above the release level that contain a trigger.
    let mut windows: Vec<(usize, usize)> = Vec::new();
    let mut i = 0;
    while i < magnitude.len() {
        if magnitude[i] < cfg.release_threshold {
            i += 1;
            continue;
        }
        let start = i;
        let mut triggered = false;
        while i < magnitude.len() && magnitude[i] >= cfg.release_threshold {
            triggered |= magnitude[i] > cfg.trigger_threshold;
            i += 1;
        }
        if triggered {
            windows.push((start, i - 1));
        }
    }

    let mut merged: Vec<(usize, usize)> = Vec::with_capacity(windows.len());
    for (start, end) in windows {
        match merged.last_mut() {
            Some(last) if times[start] - times[last.1] <= cfg.merge_gap + MERGE_EPS_S => last.1 = end,
            _ => merged.push((start, end)),
        }
    }

    merged
        .into_iter()
        .filter(|&(s, e)| times[e] - times[s] >= cfg.min_segment)
        .map(|(s, e)| Segment {
            t_start: times[s],
            t_end: times[e],
            range: s..e + 1,
            peak_a_total_mean: magnitude[s..=e].iter().cloned().fold(f64::MIN, f64::max),
        })
        .collect()
}

/// Indices of samples strictly above the trigger threshold.
pub fn triggered_samples(magnitude: &[f64], trigger_threshold: f64) -> Vec<usize> {
    magnitude
        .iter()
        .enumerate()
        .filter_map(|(i, m)| (*m > trigger_threshold).then_some(i))
        .collect()
}
