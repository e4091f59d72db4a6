//! Command implementations behind the `forklift-impact` binary.
//!
//! Each command is a pure function from its request to a [`CommandOutput`]
//! (stdout text, stderr text, exit code), so the binary only parses flags
//! and prints.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::calibration::{calibrate, CalibrationParams};
use crate::config::Settings;
use crate::error::{CalibrationError, PipelineError, SynthError};
use crate::ingest::{read_log, write_log, Unit};
use crate::pipeline::{analyze_traces, NodeSummary};
use crate::power::{autonomy_years, daily_energy, solve_active_time, PowerProfile};
use crate::report::{emit_report, Format};
use crate::suite::{run_scenario_suite, scenarios, sensitivity_sweep, SuiteOptions};
use crate::synth::{generate, Misalignment, SynthOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_SUITE_FAILURE: i32 = 1;
pub const EXIT_INPUT_ERROR: i32 = 2;
pub const EXIT_CALIBRATION_FAILURE: i32 = 3;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CommandOutput {
    pub stdout: String,
    pub stderr: String,
    pub exit_code: i32,
}

impl CommandOutput {
    fn ok(stdout: String) -> Self {
        Self {
            stdout,
            stderr: String::new(),
            exit_code: EXIT_OK,
        }
    }

    fn fail(code: i32, stdout: String, message: impl std::fmt::Display) -> Self {
        Self {
            stdout,
            stderr: format!("error: {message}\n"),
            exit_code: code,
        }
    }
}

/// Degrees to 3 decimals; values that round to zero print unsigned.
fn deg3(rad: f64) -> String {
    let d = rad.to_degrees();
    format!("{:.3}°", if d.abs() < 5e-4 { 0.0 } else { d })
}

fn degrees(p: &CalibrationParams) -> String {
    let yaw = p.yaw_estimate.map_or_else(|| "n/a".to_string(), deg3);
    format!(
        "roll {}, pitch {}, yaw {yaw}, gross yaw misalignment: {}",
        deg3(p.roll),
        deg3(p.pitch),
        if p.yaw_gross_misalignment { "yes" } else { "no" }
    )
}

fn node_header(n: &NodeSummary) -> String {
    format!(
        "# {:?} node {:?}: {}; static window {:.2}-{:.2} s; {} samples, {} saturated, {} gaps",
        n.position,
        n.node_id,
        degrees(&n.params),
        n.static_window.0,
        n.static_window.1,
        n.samples,
        n.saturated,
        n.gaps
    )
}

/// Runs the full pipeline on one log file.
///
/// Output starts with `#` lines echoing the file, the effective settings and
/// the per-node calibration, followed by the event report.
pub fn analyze(path: &Path, settings: &Settings, format: Format) -> CommandOutput {
    let cfg = &settings.config;
    let mut out = String::new();
    let _ = writeln!(out, "# log: {}", path.display());
    for line in settings.echo() {
        let _ = writeln!(out, "# {line}");
    }
    let traces = match read_log(path, cfg.sample_rate) {
        Ok(t) => t,
        Err(e) => return CommandOutput::fail(EXIT_INPUT_ERROR, String::new(), format!("{}: {e}", path.display())),
    };
    if traces.is_empty() {
        out.push_str(&emit_report(&[], format));
        return CommandOutput::ok(out);
    }
    match analyze_traces(&traces, cfg) {
        Ok(analysis) => {
            let _ = writeln!(out, "{}", node_header(&analysis.front));
            let _ = writeln!(out, "{}", node_header(&analysis.back));
            out.push_str(&emit_report(&analysis.events, format));
            CommandOutput::ok(out)
        }
        Err(e @ PipelineError::Calibration { .. }) => {
            CommandOutput::fail(EXIT_CALIBRATION_FAILURE, String::new(), format!("{}: {e}", path.display()))
        }
        Err(e) => CommandOutput::fail(EXIT_INPUT_ERROR, String::new(), format!("{}: {e}", path.display())),
    }
}

/// Reports tilt angles and the yaw check for every node in a log.
pub fn calibrate_log(path: &Path, settings: &Settings) -> CommandOutput {
    let cfg = &settings.config;
    let traces = match read_log(path, cfg.sample_rate) {
        Ok(t) => t,
        Err(e) => return CommandOutput::fail(EXIT_INPUT_ERROR, String::new(), format!("{}: {e}", path.display())),
    };
    if traces.is_empty() {
        return CommandOutput::fail(
            EXIT_CALIBRATION_FAILURE,
            String::new(),
            format!("{}: no samples to calibrate", path.display()),
        );
    }
    let mut out = String::new();
    let mut failures: Vec<(String, CalibrationError)> = Vec::new();
    for trace in &traces {
        match calibrate(trace, cfg) {
            Ok(node) => {
                let _ = writeln!(out, "{}: {}", trace.node_id(), degrees(&node.params));
            }
            Err(e) => failures.push((trace.node_id().to_string(), e)),
        }
    }
    if failures.is_empty() {
        return CommandOutput::ok(out);
    }
    let message = failures
        .iter()
        .map(|(node, e)| format!("node {node:?}: {e}"))
        .collect::<Vec<_>>()
        .join("; ");
    CommandOutput::fail(EXIT_CALIBRATION_FAILURE, out, format!("{}: {message}", path.display()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerRequest {
    pub profile: PowerProfile,
    /// Trigger rates to tabulate; the first one is used for solving.
    pub triggers_per_day: Vec<f64>,
    pub active_s: Option<f64>,
    pub solve_years: Option<f64>,
}

/// Autonomy table, optionally after solving the per-trigger active time
/// that meets `solve_years` at the first trigger rate.
pub fn power(req: &PowerRequest) -> CommandOutput {
    let rates = if req.triggers_per_day.is_empty() {
        vec![0.0]
    } else {
        req.triggers_per_day.clone()
    };
    let mut out = String::new();
    let active_s = match (req.solve_years, req.active_s) {
        (Some(years), _) => match solve_active_time(years, rates[0], &req.profile) {
            Ok(s) => {
                let _ = writeln!(
                    out,
                    "solved active time: {s:.3} s per trigger for {years} years at {} triggers/day",
                    rates[0]
                );
                s
            }
            Err(e) => return CommandOutput::fail(EXIT_INPUT_ERROR, String::new(), e),
        },
        (None, Some(s)) => s,
        (None, None) if rates.iter().all(|&r| r == 0.0) => 0.0,
        (None, None) => {
            return CommandOutput::fail(
                EXIT_INPUT_ERROR,
                String::new(),
                "--active-s or --solve-years is required with --triggers",
            )
        }
    };
    let _ = writeln!(
        out,
        "{:>12} {:>10} {:>14} {:>8}",
        "triggers/day", "active s", "energy mWh/d", "years"
    );
    for rate in rates {
        let profile = req.profile.with_activity(rate, active_s);
        let row = daily_energy(&profile).and_then(|e| Ok((e, autonomy_years(&profile)?)));
        match row {
            Ok((energy, years)) => {
                let _ = writeln!(out, "{rate:>12} {active_s:>10.3} {:>14.3} {years:>8.1}", energy * 1e3);
            }
            Err(e) => return CommandOutput::fail(EXIT_INPUT_ERROR, out, e),
        }
    }
    CommandOutput::ok(out)
}

/// Runs the scenario suite; exit 1 lists every failed assertion.
pub fn suite(settings: &Settings, opts: &SuiteOptions, format: Format) -> CommandOutput {
    match run_scenario_suite(&settings.config, opts) {
        Ok(report) => {
            let stdout = report.render(format);
            if report.passed() {
                CommandOutput::ok(stdout)
            } else {
                let stderr = report
                    .failures()
                    .map(|c| format!("assertion failed: {}: {}\n", c.name, c.detail))
                    .collect();
                CommandOutput {
                    stdout,
                    stderr,
                    exit_code: EXIT_SUITE_FAILURE,
                }
            }
        }
        Err(e) => CommandOutput::fail(EXIT_SUITE_FAILURE, String::new(), e),
    }
}

pub fn sweep(parameter: &str, values: &[f64], settings: &Settings, opts: &SuiteOptions, format: Format) -> CommandOutput {
    match sensitivity_sweep(parameter, values, &settings.config, opts) {
        Ok(table) => CommandOutput::ok(table.render(format)),
        Err(e @ SynthError::UnknownParameter(_)) => CommandOutput::fail(EXIT_INPUT_ERROR, String::new(), e),
        Err(e) => CommandOutput::fail(EXIT_SUITE_FAILURE, String::new(), e),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerateRequest {
    pub scenario: String,
    pub seed: u64,
    pub misalignment: Misalignment,
    pub noise_sigma: f64,
    pub unit: Unit,
    /// Ground truth is written here as JSON when set.
    pub truth_path: Option<PathBuf>,
}

/// Renders one suite scenario as a CSV log (the fixture format).
pub fn generate_fixture(req: &GenerateRequest, settings: &Settings) -> CommandOutput {
    let cfg = &settings.config;
    let list = scenarios(req.seed, SuiteOptions::default().endurance_s);
    let Some((index, scenario)) = list.iter().enumerate().find(|(_, s)| s.name == req.scenario) else {
        let names: Vec<_> = list.iter().map(|s| s.name).collect();
        return CommandOutput::fail(
            EXIT_INPUT_ERROR,
            String::new(),
            format!("unknown scenario {:?} (known: {})", req.scenario, names.join(", ")),
        );
    };
    let opts = SynthOptions {
        noise_sigma: req.noise_sigma,
        noise_seed: req.seed.wrapping_add(index as u64),
        front_misalignment: req.misalignment,
        back_misalignment: req.misalignment,
        front_node_id: cfg.front_node_id.clone(),
        back_node_id: cfg.back_node_id.clone(),
        ..SynthOptions::default()
    };
    let (front, back, truth) = match generate(&scenario.specs, &opts, cfg) {
        Ok(x) => x,
        Err(e) => return CommandOutput::fail(EXIT_INPUT_ERROR, String::new(), e),
    };
    let mut csv = Vec::new();
    write_log(&[&front, &back], req.unit, &mut csv).expect("writing to memory");
    if let Some(path) = &req.truth_path {
        let json = serde_json::to_string_pretty(&truth).expect("truth serializes");
        if let Err(e) = std::fs::write(path, json + "\n") {
            return CommandOutput::fail(EXIT_INPUT_ERROR, String::new(), format!("{}: {e}", path.display()));
        }
    }
    CommandOutput::ok(String::from_utf8(csv).expect("CSV is UTF-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn request(triggers: &[f64], active_s: Option<f64>, solve_years: Option<f64>) -> PowerRequest {
        PowerRequest {
            profile: PowerProfile::default(),
            triggers_per_day: triggers.to_vec(),
            active_s,
            solve_years,
        }
    }

    #[test]
    fn signed_zero_prints_unsigned() {
        assert_eq!(deg3(-1e-9), "0.000°");
        assert_eq!(deg3(20f64.to_radians()), "20.000°");
        assert_eq!(deg3(-0.5f64.to_radians()), "-0.500°");
    }

    #[test]
    fn power_rows() {
        let out = power(&request(&[720.0, 5000.0], Some(0.5), None));
        assert_eq!(out.exit_code, EXIT_OK);
        let years: Vec<&str> = out
            .stdout
            .lines()
            .skip(1)
            .map(|l| l.split_whitespace().last().unwrap())
            .collect();
        assert_eq!(years, ["8.8", "2.0"]);
    }

    #[test]
    fn power_defaults_to_sleep_only() {
        let out = power(&request(&[], None, None));
        assert_eq!(out.exit_code, EXIT_OK);
        assert!(out.stdout.lines().nth(1).unwrap().ends_with("20.8"));
    }

    #[test]
    fn power_errors_exit_2() {
        assert_eq!(power(&request(&[720.0], None, None)).exit_code, EXIT_INPUT_ERROR);
        assert_eq!(power(&request(&[720.0], None, Some(30.0))).exit_code, EXIT_INPUT_ERROR);
        let overflow = power(&request(&[900.0], Some(100.0), None));
        assert_eq!(overflow.exit_code, EXIT_INPUT_ERROR);
        assert!(overflow.stderr.contains("exceeds one day"), "{}", overflow.stderr);
    }

    #[test]
    fn unknown_scenario_lists_known_ones() {
        let req = GenerateRequest {
            scenario: "moon_landing".into(),
            seed: 1,
            misalignment: Misalignment::default(),
            noise_sigma: 0.05,
            unit: Unit::G,
            truth_path: None,
        };
        let out = generate_fixture(&req, &Settings::default());
        assert_eq!(out.exit_code, EXIT_INPUT_ERROR);
        assert!(out.stderr.contains("collision_rb"));
    }
}
