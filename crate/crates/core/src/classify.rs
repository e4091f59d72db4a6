//! Segment features and the event decision tree.
//!
//! ```text
//! segment ──duration──┬─ ≤ short_max ─────────────┐
//!                     ├─ ≥ long_min ──────────┐   │
//!                     └─ between: ratio_ax ───┤   │
//!                          > ratio_long: long │   │ otherwise short
//!                                             ▼   ▼
//!          long: crossing rate ≤ max?    short: area a_y > area a_z
//!          ├─ yes: net area < 0?         │      (dominant node)?
//!          │   ├─ yes: peak > harsh?     ├─ yes: collision, zone from
//!          │   │   ├─ yes: harsh braking │       dominant node + sign of
//!          │   │   └─ no:  (nothing)     │       net a_y
//!          │   └─ no: acceleration       └─ no: short vibration AT!/BT
//!          │          (nothing)
//!          └─ no: long vibration AT!/BT
//! ```

use serde::{Deserialize, Serialize};

use crate::config::{AnalysisConfig, BrakingAxis};
use crate::error::ClassifyError;
use crate::model::{
    EventKind, EventReport, FusedTrace, ImuSample, MountPosition, Segment, SeverityLabel, Zone,
};

/// Feature values of one segment. Areas are trapezoidal time integrals in m/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentFeatures {
    pub duration: f64,
    /// `|∫ a_x dt|` of the front/back mean.
    pub net_area_ax: f64,
    /// `∫ |a_x| dt` of the front/back mean.
    pub total_area_ax: f64,
    /// `net_area_ax / total_area_ax`, 0 when the total area is 0.
    pub ratio_ax: f64,
    /// Signed `∫ a_x dt` of the front/back mean.
    pub net_ax: f64,
    /// Signed `∫ a_y dt` of the front/back mean.
    pub net_ay: f64,
    /// Node holding the largest `|a_y|` sample (front wins ties).
    pub dominant_node: MountPosition,
    pub area_ay_dom: f64,
    pub area_az_dom: f64,
    pub peak_ay_dom: f64,
    pub net_ay_dom: f64,
    /// Sign changes of the mean-removed front/back mean `a_x`.
    pub crossings: usize,
    pub crossing_rate: f64,
    pub peak_a_total_mean: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Route {
    Short,
    Long,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShortClass {
    CollisionCandidate,
    ShortVibration,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LongClass {
    BrakingCandidate,
    LongVibration,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BrakingClass {
    HarshBraking,
    Acceleration,
    BelowHarsh,
}

fn trapezoid(t: &[f64], y: impl Fn(usize) -> f64) -> f64 {
    t.windows(2)
        .enumerate()
        .map(|(i, w)| 0.5 * (y(i) + y(i + 1)) * (w[1] - w[0]))
        .sum()
}

/// Sign changes of `x - mean(x)`. Exact zeros carry the previous sign.
pub fn baseline_crossings(x: &[f64]) -> usize {
    if x.is_empty() {
        return 0;
    }
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    let mut last = 0.0f64;
    let mut count = 0;
    for v in x {
        let d = v - mean;
        if d == 0.0 {
            continue;
        }
        if last != 0.0 && (d > 0.0) != (last > 0.0) {
            count += 1;
        }
        last = d;
    }
    count
}

pub fn compute_features(seg: &Segment, fused: &FusedTrace) -> Result<SegmentFeatures, ClassifyError> {
    let range = seg.range.clone();
    if range.is_empty() {
        return Err(ClassifyError::EmptySegment);
    }
    if range.end > fused.len() {
        return Err(ClassifyError::OutOfBounds {
            start: range.start,
            end: range.end,
            len: fused.len(),
        });
    }
    let front = &fused.front().samples()[range.clone()];
    let back = &fused.back().samples()[range.clone()];
    let t: Vec<f64> = front.iter().map(|s| s.t).collect();
    let duration = t[t.len() - 1] - t[0];

    let mean_ax: Vec<f64> = front.iter().zip(back).map(|(f, b)| (f.ax + b.ax) / 2.0).collect();
    let mean_ay: Vec<f64> = front.iter().zip(back).map(|(f, b)| (f.ay + b.ay) / 2.0).collect();
    let net_ax = trapezoid(&t, |i| mean_ax[i]);
    let net_ay = trapezoid(&t, |i| mean_ay[i]);
    let total_area_ax = trapezoid(&t, |i| mean_ax[i].abs());
    let net_area_ax = net_ax.abs();
    let ratio_ax = if total_area_ax > 0.0 {
        (net_area_ax / total_area_ax).clamp(0.0, 1.0)
    } else {
        0.0
    };

    let peak_ay = |samples: &[ImuSample]| {
        samples
            .iter()
            .map(|s| s.ay)
            .fold(0.0f64, |best, v| if v.abs() > best.abs() { v } else { best })
    };
    let (front_peak, back_peak) = (peak_ay(front), peak_ay(back));
    let (dominant_node, dom, peak_ay_dom) = if back_peak.abs() > front_peak.abs() {
        (MountPosition::Back, back, back_peak)
    } else {
        (MountPosition::Front, front, front_peak)
    };

    let crossings = baseline_crossings(&mean_ax);
    let crossing_rate = if duration > 0.0 {
        crossings as f64 / duration
    } else {
        0.0
    };
    let peak_a_total_mean = fused.total_mean()[range]
        .iter()
        .cloned()
        .fold(f64::MIN, f64::max);

    Ok(SegmentFeatures {
        duration,
        net_area_ax,
        total_area_ax,
        ratio_ax,
        net_ax,
        net_ay,
        dominant_node,
        area_ay_dom: trapezoid(&t, |i| dom[i].ay.abs()),
        area_az_dom: trapezoid(&t, |i| dom[i].az.abs()),
        peak_ay_dom,
        net_ay_dom: trapezoid(&t, |i| dom[i].ay),
        crossings,
        crossing_rate,
        peak_a_total_mean,
    })
}

/// Duration routing, with the `a_x` area ratio settling intermediate segments.
pub fn categorize(f: &SegmentFeatures, cfg: &AnalysisConfig) -> Route {
    if f.duration <= cfg.short_max {
        Route::Short
    } else if f.duration >= cfg.long_min || f.ratio_ax > cfg.ratio_long {
        Route::Long
    } else {
        Route::Short
    }
}

/// Lateral energy beating vertical energy on the dominant node means impact.
pub fn classify_short(f: &SegmentFeatures) -> ShortClass {
    if f.area_ay_dom > f.area_az_dom {
        ShortClass::CollisionCandidate
    } else {
        ShortClass::ShortVibration
    }
}

/// Front/back from the dominant node; side from the sign of its net `a_y`
/// (positive: pushed left, so the impact came from the right; zero counts as
/// right).
pub fn localize(f: &SegmentFeatures) -> Zone {
    Zone::new(f.dominant_node, f.net_ay_dom >= 0.0)
}

pub fn classify_long(f: &SegmentFeatures, cfg: &AnalysisConfig) -> LongClass {
    if f.crossing_rate <= cfg.crossing_rate_braking_max {
        LongClass::BrakingCandidate
    } else {
        LongClass::LongVibration
    }
}

/// Net area on the braking axis must be strictly negative for braking; the
/// peak then decides whether it was harsh.
pub fn confirm_braking(f: &SegmentFeatures, cfg: &AnalysisConfig) -> BrakingClass {
    let net = match cfg.braking_axis {
        BrakingAxis::X => f.net_ax,
        BrakingAxis::Y => f.net_ay,
    };
    if net >= 0.0 {
        BrakingClass::Acceleration
    } else if f.peak_a_total_mean > cfg.harsh_braking_threshold {
        BrakingClass::HarshBraking
    } else {
        BrakingClass::BelowHarsh
    }
}

pub fn label_vibration(f: &SegmentFeatures, cfg: &AnalysisConfig) -> SeverityLabel {
    if f.peak_a_total_mean > cfg.vibration_severe {
        SeverityLabel::AT
    } else {
        SeverityLabel::BT
    }
}

/// Runs the decision tree on precomputed features. `None` means the segment
/// is suppressed (acceleration, or braking below the harsh level).
pub fn replay(f: &SegmentFeatures, cfg: &AnalysisConfig) -> Option<EventKind> {
    match categorize(f, cfg) {
        Route::Short => match classify_short(f) {
            ShortClass::CollisionCandidate => Some(EventKind::Collision {
                zone: localize(f),
                peak: f.peak_a_total_mean,
            }),
            ShortClass::ShortVibration => Some(EventKind::VibrationShort {
                label: label_vibration(f, cfg),
            }),
        },
        Route::Long => match classify_long(f, cfg) {
            LongClass::BrakingCandidate => match confirm_braking(f, cfg) {
                BrakingClass::HarshBraking => Some(EventKind::HarshBraking),
                BrakingClass::Acceleration | BrakingClass::BelowHarsh => None,
            },
            LongClass::LongVibration => Some(EventKind::VibrationLong {
                label: label_vibration(f, cfg),
            }),
        },
    }
}

pub fn classify_segment(
    seg: &Segment,
    fused: &FusedTrace,
    cfg: &AnalysisConfig,
) -> Result<Option<EventReport>, ClassifyError> {
    let features = compute_features(seg, fused)?;
    Ok(replay(&features, cfg).map(|kind| EventReport {
        kind,
        t_start: seg.t_start,
        t_end: seg.t_end,
        diagnostics: features,
    }))
}
