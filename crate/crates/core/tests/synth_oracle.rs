//! Generator and suite behavior checked from the outside: emitted samples,
//! recomputed features, sweep properties.

use impact_core::calibration::{calibrate, CalibrationParams};
use impact_core::classify::compute_features;
use impact_core::config::AnalysisConfig;
use impact_core::model::{EventKind, MountPosition, SeverityLabel, Zone};
use impact_core::pipeline::analyze_pair;
use impact_core::suite::{run_scenario_suite, sensitivity_sweep, SuiteOptions, YAW_PARAMETER};
use impact_core::synth::{
    generate, BrakingIntensity, CollisionSeverity, Expected, Misalignment, ScenarioKind, ScenarioSpec, SynthOptions,
};

fn cfg() -> AnalysisConfig {
    AnalysisConfig::default()
}

fn trapezoid(t: &[f64], y: &[f64]) -> f64 {
    t.windows(2)
        .zip(y.windows(2))
        .map(|(t, y)| 0.5 * (y[0] + y[1]) * (t[1] - t[0]))
        .sum()
}

#[test]
fn idle_minute_stays_quiet_after_compensation() {
    let spec = ScenarioSpec::new(ScenarioKind::Idle, 0.0, 60.0, 3);
    let (front, back, truth) = generate(&[spec], &SynthOptions::default(), &cfg()).unwrap();
    assert_eq!(truth.events.len(), 1);
    assert_eq!(truth.events[0].expected, Expected::Nothing);
    let f = calibrate(&front, &cfg()).unwrap().trace;
    let b = calibrate(&back, &cfg()).unwrap().trace;
    for (x, y) in f.samples().iter().zip(b.samples()) {
        let mean = 0.5 * (x.a_total() + y.a_total());
        assert!(mean < 1.0, "mean magnitude {mean} at t = {}", x.t);
    }
}

#[test]
fn right_back_collision_is_back_heavy_and_positive() {
    let spec = ScenarioSpec::new(
        ScenarioKind::Collision {
            zone: Zone::RightBack,
            severity: CollisionSeverity::Hard,
        },
        4.0,
        0.12,
        21,
    );
    let (front, back, truth) = generate(&[spec], &SynthOptions::default(), &cfg()).unwrap();
    let peak = |s: &[impact_core::ImuSample]| s.iter().map(|s| s.ay.abs()).fold(0.0, f64::max);
    let (fw, bw) = (front.window(3.9, 4.3), back.window(3.9, 4.3));
    assert!(peak(bw) > peak(fw));
    let t: Vec<f64> = bw.iter().map(|s| s.t).collect();
    let ay: Vec<f64> = bw.iter().map(|s| s.ay).collect();
    assert!(trapezoid(&t, &ay) > 0.0);
    assert_eq!(truth.events[0].expected, Expected::Collision(Zone::RightBack));
}

#[test]
fn hard_braking_is_one_sided() {
    let specs = [
        ScenarioSpec::new(ScenarioKind::Idle, 0.0, 3.0, 1),
        ScenarioSpec::new(
            ScenarioKind::Braking {
                intensity: BrakingIntensity::Hard,
            },
            4.0,
            2.5,
            5,
        ),
    ];
    let (front, back, _) = generate(&specs, &SynthOptions::default(), &cfg()).unwrap();
    let analysis = analyze_pair(&front, &back, &cfg()).unwrap();
    assert_eq!(analysis.segments.len(), 1);
    let seg = &analysis.segments[0];
    let features = compute_features(seg, &analysis.fused).unwrap();

    // Recompute the ratio straight from the fused samples.
    let f = &analysis.fused.front().samples()[seg.range.clone()];
    let b = &analysis.fused.back().samples()[seg.range.clone()];
    let t: Vec<f64> = f.iter().map(|s| s.t).collect();
    let ax: Vec<f64> = f.iter().zip(b).map(|(f, b)| 0.5 * (f.ax + b.ax)).collect();
    let abs: Vec<f64> = ax.iter().map(|v| v.abs()).collect();
    let ratio = trapezoid(&t, &ax).abs() / trapezoid(&t, &abs);
    assert!(ratio > 0.9, "recomputed ratio {ratio}");
    assert!((features.ratio_ax - ratio).abs() < 1e-12);
    assert_eq!(analysis.events.len(), 1);
    assert_eq!(analysis.events[0].kind, EventKind::HarshBraking);
}

#[test]
fn tilt_fixture_calibrates_back_to_injected_angles() {
    let specs = [ScenarioSpec::new(ScenarioKind::Idle, 0.0, 5.0, 1)];
    let opts = SynthOptions {
        front_misalignment: Misalignment::degrees(20.0, 10.0, 0.0),
        back_misalignment: Misalignment::default(),
        ..SynthOptions::default()
    };
    let (front, back, _) = generate(&specs, &opts, &cfg()).unwrap();
    let f = calibrate(&front, &cfg()).unwrap().params;
    assert!((f.roll_deg() - 20.0).abs() < 0.5 && (f.pitch_deg() - 10.0).abs() < 0.5, "{f:?}");
    let b = calibrate(&back, &cfg()).unwrap().params;
    assert!(b.roll_deg().abs() < 0.5 && b.pitch_deg().abs() < 0.5);
    assert_ne!(b, CalibrationParams::level());
}

#[test]
fn generation_is_byte_identical_for_equal_seeds() {
    let specs = [
        ScenarioSpec::new(ScenarioKind::TruckLoading, 1.0, 20.0, 9),
        ScenarioSpec::new(
            ScenarioKind::Collision {
                zone: Zone::LeftFront,
                severity: CollisionSeverity::Soft,
            },
            22.0,
            0.1,
            10,
        ),
    ];
    let opts = SynthOptions {
        noise_seed: 4,
        front_misalignment: Misalignment::degrees(5.0, -3.0, 1.0),
        ..SynthOptions::default()
    };
    let a = generate(&specs, &opts, &cfg()).unwrap();
    let b = generate(&specs, &opts, &cfg()).unwrap();
    let bits = |t: &impact_core::SensorTrace| {
        t.samples()
            .iter()
            .flat_map(|s| [s.t.to_bits(), s.ax.to_bits(), s.ay.to_bits(), s.az.to_bits()])
            .collect::<Vec<u64>>()
    };
    assert_eq!(bits(&a.0), bits(&b.0));
    assert_eq!(bits(&a.1), bits(&b.1));
    assert_eq!(a.2, b.2);
}

#[test]
fn rb_scenario_matches_field_pattern() {
    let opts = SuiteOptions {
        endurance_s: 0.0,
        ..SuiteOptions::default()
    };
    let report = run_scenario_suite(&cfg(), &opts).unwrap();
    let rb = report.scenarios.iter().find(|s| s.name == "collision_rb").unwrap();
    let rb_hits = rb
        .events
        .iter()
        .filter(|e| e.kind.zone() == Some(Zone::RightBack))
        .count();
    assert!(rb_hits >= 3, "{}", rb.summary);
    for (i, t) in rb.truth.events.iter().enumerate() {
        if let ScenarioKind::Collision {
            severity: CollisionSeverity::VerySoft,
            ..
        } = t.kind
        {
            assert!(rb.events_for(i).all(|e| e.kind.label() == Some(SeverityLabel::BT)));
        }
    }
    let fast = report
        .scenarios
        .iter()
        .find(|s| s.name == "driving_bumpy_road_fast")
        .unwrap();
    assert!(fast.events.iter().any(|e| e.kind.label() == Some(SeverityLabel::AT)));
    let braking = report.scenarios.iter().find(|s| s.name == "normal_braking").unwrap();
    assert!(braking.events.is_empty());
}

#[test]
fn trigger_sweep_is_monotone() {
    let opts = SuiteOptions {
        endurance_s: 300.0,
        ..SuiteOptions::default()
    };
    let values = [3.0, 4.0, 5.0, 6.0, 7.0, 8.0];
    let table = sensitivity_sweep("trigger_threshold", &values, &cfg(), &opts).unwrap();
    let counts: Vec<usize> = table.rows.iter().map(|r| r.metrics.detected_events).collect();
    assert!(counts.windows(2).all(|w| w[1] <= w[0]), "{counts:?}");
    assert!(table.max_unchanged_yaw_deg.is_none());
}

#[test]
fn yaw_sweep_baseline_and_gross_flag() {
    let opts = SuiteOptions {
        endurance_s: 0.0,
        ..SuiteOptions::default()
    };
    let table = sensitivity_sweep(YAW_PARAMETER, &[0.0, 5.0, 90.0], &cfg(), &opts).unwrap();
    let baseline = run_scenario_suite(&cfg(), &opts).unwrap();
    assert_eq!(table.rows[0].metrics, baseline.metrics);
    assert!(!table.rows[0].yaw_flagged);
    assert!(table.rows[2].yaw_flagged);
    let unchanged = table.max_unchanged_yaw_deg.unwrap();
    assert!((5.0..90.0).contains(&unchanged), "{unchanged}");
}

#[test]
fn trigger_above_every_peak_fails_the_suite() {
    let mut cfg = cfg();
    cfg.trigger_threshold = 500.0;
    let opts = SuiteOptions {
        endurance_s: 0.0,
        ..SuiteOptions::default()
    };
    let report = run_scenario_suite(&cfg, &opts).unwrap();
    assert!(!report.passed());
    assert!(report.failures().any(|c| c.name == "hard collisions localized"));
    assert_eq!(report.metrics.detected_events, 0);
}

#[test]
fn far_node_does_not_dominate() {
    let specs = [
        ScenarioSpec::new(ScenarioKind::Idle, 0.0, 3.0, 1),
        ScenarioSpec::new(
            ScenarioKind::Collision {
                zone: Zone::LeftFront,
                severity: CollisionSeverity::Hard,
            },
            4.0,
            0.12,
            8,
        ),
    ];
    let (front, back, _) = generate(&specs, &SynthOptions::default(), &cfg()).unwrap();
    let analysis = analyze_pair(&front, &back, &cfg()).unwrap();
    assert_eq!(analysis.events.len(), 1);
    assert_eq!(analysis.events[0].diagnostics.dominant_node, MountPosition::Front);
    assert_eq!(analysis.events[0].kind.zone(), Some(Zone::LeftFront));
}
