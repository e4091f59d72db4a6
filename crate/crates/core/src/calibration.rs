//! Mounting calibration: tilt from static gravity, leveling, gravity
//! compensation, and a coarse yaw check from motion.
//!
//! The sensor (tilted) frame relates to the leveled frame through the 3-2-1
//! Euler rotation `P_tilted = R(roll, pitch, yaw) * P_leveled`. At rest the
//! leveled vector is `(0, 0, g)`, so the measured gravity gives
//! `pitch = asin(a_x / -g)` and `roll = atan2(a_y, a_z)`. Yaw is invisible to
//! gravity; it can only be estimated while driving and is reported, never
//! applied.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;
use std::f64::consts::FRAC_PI_4;
use std::ops::Range;

use crate::config::AnalysisConfig;
use crate::error::CalibrationError;
use crate::model::{Frame, ImuSample, SensorTrace};

/// Window starts are tried every this many samples when searching a trace.
const SEARCH_STRIDE: usize = 10;

/// Estimated mounting misalignment of one node. Angles in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationParams {
    pub roll: f64,
    pub pitch: f64,
    /// Only set when estimated from a motion window.
    pub yaw_estimate: Option<f64>,
    /// `|yaw| > 45°`: the sensor is mounted a quadrant or more off.
    pub yaw_gross_misalignment: bool,
}

impl CalibrationParams {
    pub fn level() -> Self {
        Self {
            roll: 0.0,
            pitch: 0.0,
            yaw_estimate: None,
            yaw_gross_misalignment: false,
        }
    }

    pub fn roll_deg(&self) -> f64 {
        self.roll.to_degrees()
    }

    pub fn pitch_deg(&self) -> f64 {
        self.pitch.to_degrees()
    }
}

/// The 3-2-1 (yaw, pitch, roll) rotation matrix taking leveled-frame vectors
/// into the tilted sensor frame.
pub fn euler_321(roll: f64, pitch: f64, yaw: f64) -> Matrix3<f64> {
    let (sf, cf) = roll.sin_cos();
    let (st, ct) = pitch.sin_cos();
    let (sp, cp) = yaw.sin_cos();
    Matrix3::new(
        ct * cp,
        sp * ct,
        -st,
        sf * st * cp - cf * sp,
        sf * st * sp + cf * cp,
        ct * sf,
        st * cf * cp + sf * sp,
        st * sp * cf - cp * sf,
        ct * cf,
    )
}

/// Per-axis mean and population standard deviation.
pub fn axis_stats(samples: &[ImuSample]) -> ([f64; 3], [f64; 3]) {
    let n = samples.len() as f64;
    let mut mean = [0.0; 3];
    for s in samples {
        for (m, v) in mean.iter_mut().zip(s.vector()) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = [0.0; 3];
    for s in samples {
        for ((acc, v), m) in var.iter_mut().zip(s.vector()).zip(mean) {
            *acc += (v - m) * (v - m);
        }
    }
    (mean, var.map(|v| (v / n).sqrt()))
}

/// Roll and pitch from a mean gravity reading.
pub fn tilt_from_gravity(mean: [f64; 3], gravity: f64) -> Result<CalibrationParams, CalibrationError> {
    let [ax, ay, az] = mean;
    let ratio = ax / -gravity;
    if ratio.abs() > 1.0 + 1e-9 {
        return Err(CalibrationError::TiltOutOfRange(format!(
            "|a_x| = {:.4} m/s² exceeds g",
            ax.abs()
        )));
    }
    let pitch = ratio.clamp(-1.0, 1.0).asin();
    let roll = ay.atan2(az);
    if pitch.abs() >= FRAC_PI_2 || roll.abs() >= FRAC_PI_2 {
        return Err(CalibrationError::TiltOutOfRange(format!(
            "roll {:.1}°, pitch {:.1}° (limit ±90°)",
            roll.to_degrees(),
            pitch.to_degrees()
        )));
    }
    Ok(CalibrationParams {
        roll,
        pitch,
        yaw_estimate: None,
        yaw_gross_misalignment: false,
    })
}

/// Estimates roll and pitch from a stationary window of tilted-frame samples.
pub fn estimate_tilt(window: &[ImuSample], cfg: &AnalysisConfig) -> Result<CalibrationParams, CalibrationError> {
    let covered = match (window.first(), window.last()) {
        (Some(a), Some(b)) => b.t - a.t + 1.0 / cfg.sample_rate,
        _ => 0.0,
    };
    if covered + 1e-9 < cfg.static_window_s {
        return Err(CalibrationError::WindowTooShort {
            covered,
            required: cfg.static_window_s,
        });
    }
    let (mean, std_dev) = axis_stats(window);
    if std_dev.iter().any(|s| *s >= cfg.stationary_std_max) {
        return Err(CalibrationError::NotStationary { std_dev });
    }
    tilt_from_gravity(mean, cfg.gravity)
}

/// Number of samples spanning the static window at the configured rate.
fn window_len(cfg: &AnalysisConfig) -> usize {
    ((cfg.static_window_s * cfg.sample_rate) - 1e-9).ceil().max(1.0) as usize
}

/// First stationary window of the trace (index range), searched from the start.
pub fn find_static_window(trace: &SensorTrace, cfg: &AnalysisConfig) -> Result<Range<usize>, CalibrationError> {
    let len = window_len(cfg);
    let samples = trace.samples();
    if samples.len() < len {
        let covered = match (samples.first(), samples.last()) {
            (Some(a), Some(b)) => b.t - a.t + 1.0 / cfg.sample_rate,
            _ => 0.0,
        };
        return Err(CalibrationError::WindowTooShort {
            covered,
            required: cfg.static_window_s,
        });
    }
    let mut calmest: Option<[f64; 3]> = None;
    for start in (0..=samples.len() - len).step_by(SEARCH_STRIDE) {
        match estimate_tilt(&samples[start..start + len], cfg) {
            Ok(_) => return Ok(start..start + len),
            Err(CalibrationError::NotStationary { std_dev }) => {
                let worst = |s: &[f64; 3]| s.iter().cloned().fold(0.0, f64::max);
                if calmest.is_none_or(|c| worst(&std_dev) < worst(&c)) {
                    calmest = Some(std_dev);
                }
            }
            Err(CalibrationError::WindowTooShort { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(CalibrationError::NotStationary {
        std_dev: calmest.unwrap_or([f64::NAN; 3]),
    })
}

/// Rotates a tilted trace into the leveled frame using roll and pitch only.
pub fn level_trace(trace: &SensorTrace, params: &CalibrationParams) -> Result<SensorTrace, CalibrationError> {
    if trace.frame() != Frame::Tilted {
        return Err(CalibrationError::FrameMismatch {
            found: trace.frame(),
            expected: Frame::Tilted,
        });
    }
    let inverse = euler_321(params.roll, params.pitch, 0.0).transpose();
    trace
        .transform(Frame::Leveled, |s| {
            let v = inverse * Vector3::new(s.ax, s.ay, s.az);
            ImuSample {
                ax: v.x,
                ay: v.y,
                az: v.z,
                ..*s
            }
        })
        .map_err(|_| unreachable!("Tilted -> Leveled is a forward transition"))
}

/// Removes gravity from the vertical axis of a leveled trace.
pub fn compensate_gravity(trace: &SensorTrace, gravity: f64) -> Result<SensorTrace, CalibrationError> {
    if trace.frame() != Frame::Leveled {
        return Err(CalibrationError::FrameMismatch {
            found: trace.frame(),
            expected: Frame::Leveled,
        });
    }
    trace
        .transform(Frame::LeveledGravityCompensated, |s| ImuSample {
            az: s.az - gravity,
            ..*s
        })
        .map_err(|_| unreachable!("Leveled -> compensated is a forward transition"))
}

/// Coarse yaw from a straight-line acceleration window of leveled samples:
/// the heading of the mean planar acceleration, `atan2(mean a_y, mean a_x)`.
///
/// The estimate is noisy, so it only feeds the gross-misalignment flag.
pub fn estimate_yaw_moving(
    window: &[ImuSample],
    params: &CalibrationParams,
) -> Result<CalibrationParams, CalibrationError> {
    if window.is_empty() {
        return Err(CalibrationError::InsufficientMotion { magnitude: 0.0 });
    }
    let n = window.len() as f64;
    let mx = window.iter().map(|s| s.ax).sum::<f64>() / n;
    let my = window.iter().map(|s| s.ay).sum::<f64>() / n;
    let magnitude = mx.hypot(my);
    if magnitude <= 1.0 {
        return Err(CalibrationError::InsufficientMotion { magnitude });
    }
    let yaw = my.atan2(mx);
    Ok(CalibrationParams {
        yaw_estimate: Some(yaw),
        yaw_gross_misalignment: yaw.abs() > FRAC_PI_4,
        ..*params
    })
}

/// First window after `from` (sample index) with more than 1 m/s² of mean
/// planar acceleration, taken as the pull-away after start-up.
pub fn find_motion_window(trace: &SensorTrace, from: usize, cfg: &AnalysisConfig) -> Option<Range<usize>> {
    let len = window_len(cfg);
    let samples = trace.samples();
    if samples.len() < from + len {
        return None;
    }
    (from..=samples.len() - len)
        .step_by(SEARCH_STRIDE)
        .map(|start| start..start + len)
        .find(|r| {
            let w = &samples[r.clone()];
            let n = w.len() as f64;
            let mx = w.iter().map(|s| s.ax).sum::<f64>() / n;
            let my = w.iter().map(|s| s.ay).sum::<f64>() / n;
            mx.hypot(my) > 1.0
        })
}

/// Result of calibrating one node.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibratedNode {
    pub params: CalibrationParams,
    pub static_window: Range<usize>,
    /// Leveled, gravity-compensated trace.
    pub trace: SensorTrace,
}

/// Full per-node calibration: find a static window, estimate tilt, level,
/// check yaw on the first motion window, compensate gravity.
pub fn calibrate(trace: &SensorTrace, cfg: &AnalysisConfig) -> Result<CalibratedNode, CalibrationError> {
    let static_window = find_static_window(trace, cfg)?;
    let mut params = estimate_tilt(&trace.samples()[static_window.clone()], cfg)?;
    let leveled = level_trace(trace, &params)?;
    if let Some(w) = find_motion_window(&leveled, static_window.end, cfg) {
        if let Ok(p) = estimate_yaw_moving(&leveled.samples()[w], &params) {
            params = p;
        }
    }
    let trace = compensate_gravity(&leveled, cfg.gravity)?;
    Ok(CalibratedNode {
        params,
        static_window,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn forward_gravity(roll: f64, pitch: f64, g: f64) -> [f64; 3] {
        // Component formulas of R * (0, 0, g).
        [
            -g * pitch.sin(),
            g * pitch.cos() * roll.sin(),
            g * pitch.cos() * roll.cos(),
        ]
    }

    fn constant_window(v: [f64; 3], n: usize) -> Vec<ImuSample> {
        (0..n)
            .map(|k| ImuSample::new(k as f64 / 100.0, v[0], v[1], v[2]))
            .collect()
    }

    fn trace_of(frame: Frame, samples: Vec<ImuSample>) -> SensorTrace {
        SensorTrace::new("n", frame, 100.0, samples).unwrap()
    }

    #[test]
    fn level_sensor_has_zero_tilt() {
        let p = estimate_tilt(&constant_window([0.0, 0.0, 9.81], 100), &AnalysisConfig::default()).unwrap();
        assert_eq!(p.roll, 0.0);
        assert_eq!(p.pitch, 0.0);
        assert_eq!(p.yaw_estimate, None);
    }

    #[test]
    fn twenty_ten_tilt_is_recovered() {
        let (roll, pitch) = (10f64.to_radians(), 20f64.to_radians());
        let mean = forward_gravity(roll, pitch, 9.81);
        let p = tilt_from_gravity(mean, 9.81).unwrap();
        assert_abs_diff_eq!(p.pitch, pitch, epsilon = 1e-6);
        assert_abs_diff_eq!(p.roll, roll, epsilon = 1e-6);

        // The same reading rounded to four decimals lands within 1e-4 rad.
        let p = tilt_from_gravity([-3.3552, 1.6007, 9.0788], 9.81).unwrap();
        assert_abs_diff_eq!(p.pitch, pitch, epsilon = 1e-4);
        assert_abs_diff_eq!(p.roll, roll, epsilon = 1e-4);
    }

    #[test]
    fn impossible_tilt_is_rejected() {
        assert!(matches!(
            tilt_from_gravity([-10.5, 0.0, 0.0], 9.81),
            Err(CalibrationError::TiltOutOfRange(_))
        ));
        // Upside down: roll beyond 90°.
        assert!(matches!(
            tilt_from_gravity([0.0, 0.0, -9.81], 9.81),
            Err(CalibrationError::TiltOutOfRange(_))
        ));
        assert!(matches!(
            tilt_from_gravity([-9.81, 0.0, 0.0], 9.81),
            Err(CalibrationError::TiltOutOfRange(_))
        ));
    }

    #[test]
    fn short_or_moving_windows_are_rejected() {
        let cfg = AnalysisConfig::default();
        assert!(matches!(
            estimate_tilt(&constant_window([0.0, 0.0, 9.81], 50), &cfg),
            Err(CalibrationError::WindowTooShort { .. })
        ));
        let moving: Vec<_> = (0..100)
            .map(|k| ImuSample::new(k as f64 / 100.0, (k as f64).sin(), 0.0, 9.81))
            .collect();
        assert!(matches!(
            estimate_tilt(&moving, &cfg),
            Err(CalibrationError::NotStationary { .. })
        ));
    }

    #[test]
    fn identity_rotation() {
        assert_eq!(euler_321(0.0, 0.0, 0.0), Matrix3::identity());
    }

    #[test]
    fn pitch_ninety_maps_z_to_minus_x() {
        let r = euler_321(0.0, FRAC_PI_2, 0.0);
        let c = FRAC_PI_2.cos();
        // Entries evaluated from the closed form at theta = pi/2.
        let expected = Matrix3::new(c, 0.0, -1.0, 0.0, 1.0, 0.0, 1.0, 0.0, c);
        assert_abs_diff_eq!(r, expected, epsilon = 1e-15);
        let z = r * Vector3::z();
        assert_abs_diff_eq!(z, -Vector3::x(), epsilon = 1e-15);
    }

    #[test]
    fn leveling_identity_and_tilted_rest() {
        let samples = constant_window([0.3, -0.2, 9.81], 20);
        let t = trace_of(Frame::Tilted, samples.clone());
        let out = level_trace(&t, &CalibrationParams::level()).unwrap();
        assert_eq!(out.samples(), &samples[..]);
        assert_eq!(out.frame(), Frame::Leveled);

        let (roll, pitch) = (10f64.to_radians(), 20f64.to_radians());
        let t = trace_of(Frame::Tilted, constant_window(forward_gravity(roll, pitch, 9.81), 120));
        let params = estimate_tilt(t.samples(), &AnalysisConfig::default()).unwrap();
        let leveled = level_trace(&t, &params).unwrap();
        let (mean, _) = axis_stats(leveled.samples());
        assert_abs_diff_eq!(mean[0], 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(mean[1], 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(mean[2], 9.81, epsilon = 1e-9);
    }

    #[test]
    fn moving_signal_round_trips() {
        let (roll, pitch) = (-0.3, 0.45);
        let r = euler_321(roll, pitch, 0.0);
        let original: Vec<ImuSample> = (0..300)
            .map(|k| {
                let t = k as f64 / 100.0;
                ImuSample::new(t, 3.0 * (5.0 * t).sin(), -2.0 * t, 9.81 + (11.0 * t).cos())
            })
            .collect();
        let tilted: Vec<ImuSample> = original
            .iter()
            .map(|s| {
                let v = r * Vector3::new(s.ax, s.ay, s.az);
                ImuSample::new(s.t, v.x, v.y, v.z)
            })
            .collect();
        let params = CalibrationParams {
            roll,
            pitch,
            ..CalibrationParams::level()
        };
        let leveled = level_trace(&trace_of(Frame::Tilted, tilted), &params).unwrap();
        for (a, b) in leveled.samples().iter().zip(&original) {
            assert_abs_diff_eq!(a.ax, b.ax, epsilon = 1e-9);
            assert_abs_diff_eq!(a.ay, b.ay, epsilon = 1e-9);
            assert_abs_diff_eq!(a.az, b.az, epsilon = 1e-9);
        }
    }

    #[test]
    fn gravity_compensation() {
        let t = trace_of(
            Frame::Leveled,
            vec![ImuSample::new(0.0, 0.0, 0.0, 9.81), ImuSample::new(0.01, 1.0, 2.0, 9.81)],
        );
        let c = compensate_gravity(&t, 9.81).unwrap();
        assert_eq!(c.samples()[0].vector(), [0.0, 0.0, 0.0]);
        assert_eq!(c.samples()[1].vector(), [1.0, 2.0, 0.0]);
        assert!(matches!(
            compensate_gravity(&c, 9.81),
            Err(CalibrationError::FrameMismatch { .. })
        ));
        assert!(matches!(
            level_trace(&c, &CalibrationParams::level()),
            Err(CalibrationError::FrameMismatch { .. })
        ));
    }

    #[test]
    fn yaw_estimates() {
        let p = CalibrationParams::level();
        let fwd = estimate_yaw_moving(&constant_window([2.0, 0.0, 0.0], 100), &p).unwrap();
        assert_eq!(fwd.yaw_estimate, Some(0.0));
        assert!(!fwd.yaw_gross_misalignment);

        let side = estimate_yaw_moving(&constant_window([0.0, 2.0, 0.0], 100), &p).unwrap();
        assert_abs_diff_eq!(side.yaw_estimate.unwrap(), FRAC_PI_2, epsilon = 1e-12);
        assert!(side.yaw_gross_misalignment);

        let back = estimate_yaw_moving(&constant_window([-2.0, 0.0, 0.0], 100), &p).unwrap();
        assert_abs_diff_eq!(back.yaw_estimate.unwrap().abs(), std::f64::consts::PI, epsilon = 1e-12);
        assert!(back.yaw_gross_misalignment);

        assert!(matches!(
            estimate_yaw_moving(&constant_window([0.5, 0.5, 0.0], 100), &p),
            Err(CalibrationError::InsufficientMotion { .. })
        ));
    }

    #[test]
    fn static_window_search() {
        let mut samples: Vec<ImuSample> = (0..150)
            .map(|k| ImuSample::new(k as f64 / 100.0, (k as f64 * 1.3).sin(), 0.0, 9.81))
            .collect();
        samples.extend((150..400).map(|k| ImuSample::new(k as f64 / 100.0, 0.0, 0.0, 9.81)));
        let t = trace_of(Frame::Tilted, samples);
        let w = find_static_window(&t, &AnalysisConfig::default()).unwrap();
        assert_eq!(w, 150..250);

        let moving = trace_of(
            Frame::Tilted,
            (0..400)
                .map(|k| ImuSample::new(k as f64 / 100.0, (k as f64).sin(), 0.0, 9.81))
                .collect(),
        );
        assert!(matches!(
            find_static_window(&moving, &AnalysisConfig::default()),
            Err(CalibrationError::NotStationary { .. })
        ));
    }

    proptest! {
        #[test]
        fn rotation_is_orthonormal(roll in -3.2f64..3.2, pitch in -3.2f64..3.2, yaw in -3.2f64..3.2) {
            let r = euler_321(roll, pitch, yaw);
            let err = (r.transpose() * r - Matrix3::identity()).abs().max();
            prop_assert!(err < 1e-12);
            prop_assert!((r.determinant() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn tilt_round_trips(roll in -1.5f64..1.5, pitch in -1.5f64..1.5) {
            let v = euler_321(roll, pitch, 0.0) * Vector3::new(0.0, 0.0, 9.81);
            let p = tilt_from_gravity([v.x, v.y, v.z], 9.81).unwrap();
            prop_assert!((p.roll - roll).abs() < 1e-6);
            prop_assert!((p.pitch - pitch).abs() < 1e-6);
        }

        #[test]
        fn tilt_ignores_yaw_when_level(yaw in -3.2f64..3.2) {
            let v = euler_321(0.0, 0.0, yaw) * Vector3::new(0.0, 0.0, 9.81);
            let p = tilt_from_gravity([v.x, v.y, v.z], 9.81).unwrap();
            prop_assert!(p.roll.abs() < 1e-12);
            prop_assert!(p.pitch.abs() < 1e-12);
        }

        #[test]
        fn leveling_preserves_norms(roll in -1.5f64..1.5, pitch in -1.5f64..1.5,
                                    x in -50.0f64..50.0, y in -50.0f64..50.0, z in -50.0f64..50.0) {
            let t = trace_of(Frame::Tilted, vec![ImuSample::new(0.0, x, y, z)]);
            let params = CalibrationParams { roll, pitch, ..CalibrationParams::level() };
            let out = level_trace(&t, &params).unwrap();
            let before = t.samples()[0].a_total();
            let after = out.samples()[0].a_total();
            prop_assert!((before - after).abs() <= 1e-12 * before.max(1.0));
        }
    }
}
