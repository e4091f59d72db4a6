//! Alignment of the front and back streams onto one time grid.

use crate::error::FusionError;
use crate::model::{Frame, FusedTrace, ImuSample, MountPosition, SensorTrace};

/// Grid points closer than this to a recorded sample take that sample as-is.
const SNAP_S: f64 = 1e-9;

/// Resamples both gravity-compensated traces onto the common grid of their
/// overlap (`t0 + k / rate`, `t0` = later start) by linear interpolation and
/// computes the magnitude series.
pub fn resample_align(front: &SensorTrace, back: &SensorTrace) -> Result<FusedTrace, FusionError> {
    for trace in [front, back] {
        if trace.frame() != Frame::LeveledGravityCompensated {
            return Err(FusionError::FrameMismatch {
                node: trace.node_id().to_string(),
                found: trace.frame(),
                expected: Frame::LeveledGravityCompensated,
            });
        }
    }
    let (Some(f0), Some(f1), Some(b0), Some(b1)) =
        (front.start(), front.end(), back.start(), back.end())
    else {
        return Err(FusionError::NoOverlap);
    };
    let start = f0.max(b0);
    let end = f1.min(b1);
    if end < start {
        return Err(FusionError::NoOverlap);
    }
    let rate = front.sample_rate_hz();
    let n = ((end - start) * rate + 1e-6).floor() as usize + 1;
    let grid: Vec<f64> = (0..n).map(|k| start + k as f64 / rate).collect();

    let front = resample(front, &grid, MountPosition::Front);
    let back = resample(back, &grid, MountPosition::Back);
    Ok(FusedTrace::from_aligned(front, back))
}

fn resample(trace: &SensorTrace, grid: &[f64], position: MountPosition) -> SensorTrace {
    let src = trace.samples();
    let mut j = 0;
    let samples = grid
        .iter()
        .map(|&t| {
            while j + 1 < src.len() && src[j + 1].t <= t + SNAP_S {
                j += 1;
            }
            let a = &src[j];
            if (a.t - t).abs() <= SNAP_S || j + 1 == src.len() {
                return ImuSample { t, ..*a };
            }
            let b = &src[j + 1];
            let w = (t - a.t) / (b.t - a.t);
            let lerp = |x: f64, y: f64| x + w * (y - x);
            ImuSample {
                t,
                ax: lerp(a.ax, b.ax),
                ay: lerp(a.ay, b.ay),
                az: lerp(a.az, b.az),
                saturated: a.saturated || b.saturated,
            }
        })
        .collect();
    SensorTrace::new(
        trace.node_id(),
        Frame::LeveledGravityCompensated,
        trace.sample_rate_hz(),
        samples,
    )
    .expect("grid times are strictly increasing")
    .with_position(position)
}
