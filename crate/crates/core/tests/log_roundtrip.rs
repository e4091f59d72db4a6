//! Log files: write/parse round trips, unit handling and the analyze command
//! on generated fixtures.

use impact_core::commands::{self, EXIT_CALIBRATION_FAILURE, EXIT_INPUT_ERROR, EXIT_OK};
use impact_core::config::{AnalysisConfig, Settings};
use impact_core::ingest::{parse_log_str, write_log, Unit};
use impact_core::model::{Frame, ImuSample, SensorTrace, FSR};
use impact_core::report::{parse_machine_line, Format};
use impact_core::synth::{generate, BumpSpeed, ScenarioKind, ScenarioSpec, SynthOptions};
use proptest::prelude::*;

fn temp_path(tag: &str) -> std::path::PathBuf {
    std::env::temp_dir().join(format!("impact-{tag}-{}.csv", std::process::id()))
}

fn fixture(specs: &[ScenarioSpec]) -> String {
    let (front, back, _) = generate(specs, &SynthOptions::default(), &AnalysisConfig::default()).unwrap();
    let mut out = Vec::new();
    write_log(&[&front, &back], Unit::MetersPerSecondSquared, &mut out).unwrap();
    String::from_utf8(out).unwrap()
}

#[test]
fn generated_log_parses_back_exactly() {
    let specs = [ScenarioSpec::new(ScenarioKind::BumpyDriving { speed: BumpSpeed::Fast }, 1.0, 5.0, 2)];
    let (front, back, _) = generate(&specs, &SynthOptions::default(), &AnalysisConfig::default()).unwrap();
    let mut out = Vec::new();
    write_log(&[&front, &back], Unit::MetersPerSecondSquared, &mut out).unwrap();
    let parsed = parse_log_str(std::str::from_utf8(&out).unwrap(), 100.0).unwrap();
    // Sorted by node id: "back" < "front".
    assert_eq!(parsed.len(), 2);
    assert_eq!(parsed[0].samples(), back.samples());
    assert_eq!(parsed[1].samples(), front.samples());
    assert_eq!(parsed[1].node_id(), "front");
}

proptest! {
    #[test]
    fn g_unit_round_trip(values in prop::collection::vec((-70.0f64..70.0, -70.0f64..70.0, -70.0f64..70.0), 1..50)) {
        let samples: Vec<ImuSample> = values
            .iter()
            .enumerate()
            .map(|(k, &(x, y, z))| ImuSample::new(k as f64 / 100.0, x, y, z))
            .collect();
        let trace = SensorTrace::new("n1", Frame::Tilted, 100.0, samples).unwrap();
        let mut out = Vec::new();
        write_log(&[&trace], Unit::G, &mut out).unwrap();
        let parsed = parse_log_str(std::str::from_utf8(&out).unwrap(), 100.0).unwrap();
        for (a, b) in parsed[0].samples().iter().zip(trace.samples()) {
            prop_assert!((a.t - b.t).abs() < 1e-9);
            for (x, y) in a.vector().iter().zip(b.vector()) {
                prop_assert!((x - y).abs() <= 1e-12 * y.abs().max(1.0));
            }
            prop_assert!(a.vector().iter().all(|v| v.abs() <= FSR));
        }
    }
}

#[test]
fn analyze_reports_and_replays() {
    let specs = [ScenarioSpec::new(ScenarioKind::BumpyDriving { speed: BumpSpeed::Fast }, 6.0, 10.0, 4)];
    let path = temp_path("analyze");
    std::fs::write(&path, fixture(&specs)).unwrap();
    let settings = Settings::default();
    let human = commands::analyze(&path, &settings, Format::Human);
    assert_eq!(human.exit_code, EXIT_OK, "{}", human.stderr);
    assert!(human.stdout.contains("trigger_threshold = 5 (default)"));
    assert!(human.stdout.contains("vibration AT!"));
    let machine = commands::analyze(&path, &settings, Format::Machine);
    let records: Vec<_> = machine
        .stdout
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| parse_machine_line(l).expect("machine line parses"))
        .collect();
    assert!(!records.is_empty());
    let cfg = AnalysisConfig::default();
    for r in &records {
        assert_eq!(impact_core::classify::replay(&r.diagnostics, &cfg), r.event_kind());
    }
    std::fs::remove_file(&path).unwrap();
}

#[test]
fn analyze_exit_codes() {
    let settings = Settings::default();
    let empty = temp_path("empty");
    std::fs::write(&empty, "t_us,node_id,ax,ay,az,unit=G\n").unwrap();
    let out = commands::analyze(&empty, &settings, Format::Human);
    assert_eq!(out.exit_code, EXIT_OK);
    assert!(out.stdout.ends_with("Nothing\n"));

    let missing = commands::analyze(std::path::Path::new("/nonexistent/log.csv"), &settings, Format::Human);
    assert_eq!(missing.exit_code, EXIT_INPUT_ERROR);
    assert!(missing.stderr.contains("/nonexistent/log.csv"));

    std::fs::write(&empty, "t_us,node_id,ax,ay,az,unit=G\n0,front,0,0,1\nx,front,0,0,1\n").unwrap();
    let bad = commands::analyze(&empty, &settings, Format::Human);
    assert_eq!(bad.exit_code, EXIT_INPUT_ERROR);
    assert!(bad.stderr.contains("line 3"), "{}", bad.stderr);

    // Both nodes shaking throughout: no stationary window.
    let mut text = String::from("t_us,node_id,ax,ay,az,unit=ms2\n");
    for k in 0..500 {
        let t = k as f64 / 100.0;
        let wobble = 3.0 * (std::f64::consts::TAU * 7.0 * t).sin();
        for node in ["back", "front"] {
            text.push_str(&format!("{},{node},{wobble},{},{}\n", k * 10_000, 0.5 * wobble, 9.81 + wobble));
        }
    }
    std::fs::write(&empty, &text).unwrap();
    let moving = commands::analyze(&empty, &settings, Format::Human);
    assert_eq!(moving.exit_code, EXIT_CALIBRATION_FAILURE, "{}", moving.stdout);
    assert_eq!(commands::calibrate_log(&empty, &settings).exit_code, EXIT_CALIBRATION_FAILURE);

    text = text.replace(",back,", ",rear,");
    std::fs::write(&empty, &text).unwrap();
    assert_eq!(commands::analyze(&empty, &settings, Format::Human).exit_code, EXIT_INPUT_ERROR);
    std::fs::remove_file(&empty).unwrap();
}

#[test]
fn calibrate_reports_level_fixture() {
    let specs = [ScenarioSpec::new(ScenarioKind::Idle, 0.0, 4.0, 1)];
    let opts = SynthOptions {
        noise_sigma: 0.0,
        ..SynthOptions::default()
    };
    let (front, back, _) = generate(&specs, &opts, &AnalysisConfig::default()).unwrap();
    let mut out = Vec::new();
    write_log(&[&front, &back], Unit::G, &mut out).unwrap();
    let path = temp_path("level");
    std::fs::write(&path, out).unwrap();
    let res = commands::calibrate_log(&path, &Settings::default());
    assert_eq!(res.exit_code, EXIT_OK);
    assert_eq!(res.stdout.matches("roll 0.000°, pitch 0.000°").count(), 2, "{}", res.stdout);
    std::fs::remove_file(&path).unwrap();
}
