//! `forklift-impact`: analyze dual-accelerometer forklift logs, check sensor
//! calibration, size batteries and run the synthetic scenario suite.
//!
//! Exit codes: 0 ok, 1 suite assertion failure, 2 input error,
//! 3 calibration failure.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use impact_core::commands::{self, CommandOutput, GenerateRequest, PowerRequest, EXIT_INPUT_ERROR};
use impact_core::config::{load_config, Settings, Source};
use impact_core::ingest::Unit;
use impact_core::power::PowerProfile;
use impact_core::report::Format;
use impact_core::suite::SuiteOptions;
use impact_core::synth::Misalignment;

#[derive(Parser)]
#[command(name = "forklift-impact", version, about = "Impact detection for forklifts with two accelerometers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Detect and classify events in one or more logs.
    Analyze {
        #[arg(required = true)]
        logs: Vec<PathBuf>,
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, value_enum, default_value_t = OutputFormat::Human)]
        format: OutputFormat,
    },
    /// Estimate roll/pitch and check yaw for every node in a log.
    Calibrate {
        log: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Battery autonomy under wake-on-motion duty cycling.
    Power(PowerArgs),
    /// Run the synthetic scenario suite and its assertions.
    Suite {
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        suite: SuiteArgs,
        #[arg(long, value_enum, default_value_t = OutputFormat::Human)]
        format: OutputFormat,
    },
    /// Rerun the suite across values of one threshold, or of injected yaw.
    Sweep {
        /// A configuration key, or `yaw` (degrees).
        parameter: String,
        #[arg(long, required = true, num_args = 1.., value_delimiter = ',', allow_negative_numbers = true)]
        values: Vec<f64>,
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        suite: SuiteArgs,
        #[arg(long, value_enum, default_value_t = OutputFormat::Human)]
        format: OutputFormat,
    },
    /// Write one suite scenario as a CSV log on standard output.
    Generate {
        scenario: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Injected mounting roll, degrees.
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        roll: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        pitch: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        yaw: f64,
        #[arg(long, default_value_t = 0.05)]
        noise: f64,
        #[arg(long, value_enum, default_value_t = LogUnit::Ms2)]
        unit: LogUnit,
        /// Also write the ground truth as JSON.
        #[arg(long)]
        truth: Option<PathBuf>,
        #[command(flatten)]
        config: ConfigArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Human,
    Machine,
}

impl From<OutputFormat> for Format {
    fn from(f: OutputFormat) -> Self {
        match f {
            OutputFormat::Human => Format::Human,
            OutputFormat::Machine => Format::Machine,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum LogUnit {
    G,
    Ms2,
}

/// Config file plus per-key overrides; flags beat the file, the file beats
/// the defaults.
#[derive(Args)]
struct ConfigArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    front_node: Option<String>,
    #[arg(long)]
    back_node: Option<String>,
    #[arg(long)]
    trigger_threshold: Option<String>,
    #[arg(long)]
    release_threshold: Option<String>,
    #[arg(long)]
    merge_gap: Option<String>,
    #[arg(long)]
    min_segment: Option<String>,
    #[arg(long)]
    short_max: Option<String>,
    #[arg(long)]
    long_min: Option<String>,
    #[arg(long)]
    ratio_long: Option<String>,
    #[arg(long)]
    vibration_severe: Option<String>,
    #[arg(long)]
    harsh_braking_threshold: Option<String>,
    #[arg(long)]
    braking_axis: Option<String>,
    #[arg(long)]
    crossing_rate_braking_max: Option<String>,
    #[arg(long)]
    sample_rate: Option<String>,
    #[arg(long)]
    gravity: Option<String>,
    #[arg(long)]
    static_window_s: Option<String>,
    #[arg(long)]
    stationary_std_max: Option<String>,
}

impl ConfigArgs {
    fn settings(&self) -> Result<Settings, String> {
        let mut settings = load_config(self.config.as_deref()).map_err(|e| e.to_string())?;
        let flags = [
            ("front_node_id", &self.front_node),
            ("back_node_id", &self.back_node),
            ("trigger_threshold", &self.trigger_threshold),
            ("release_threshold", &self.release_threshold),
            ("merge_gap", &self.merge_gap),
            ("min_segment", &self.min_segment),
            ("short_max", &self.short_max),
            ("long_min", &self.long_min),
            ("ratio_long", &self.ratio_long),
            ("vibration_severe", &self.vibration_severe),
            ("harsh_braking_threshold", &self.harsh_braking_threshold),
            ("braking_axis", &self.braking_axis),
            ("crossing_rate_braking_max", &self.crossing_rate_braking_max),
            ("sample_rate", &self.sample_rate),
            ("gravity", &self.gravity),
            ("static_window_s", &self.static_window_s),
            ("stationary_std_max", &self.stationary_std_max),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                settings
                    .apply(key, v, Source::CommandLine)
                    .map_err(|e| format!("--{}: {e}", key.replace('_', "-")))?;
            }
        }
        settings.config.validate().map_err(|e| e.to_string())?;
        Ok(settings)
    }
}

#[derive(Args)]
struct SuiteArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Length of the benign endurance scenario in seconds (0 skips it).
    #[arg(long, default_value_t = 3600.0)]
    endurance_s: f64,
    /// Mounting roll injected into both nodes, degrees.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    roll: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pitch: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    yaw: f64,
    /// Negate the lateral axis of every generated trace.
    #[arg(long)]
    mirror: bool,
    /// Exchange the front and back traces.
    #[arg(long)]
    swap_nodes: bool,
    #[arg(long, default_value_t = 0.05)]
    noise: f64,
}

impl SuiteArgs {
    fn options(&self) -> SuiteOptions {
        let m = Misalignment::degrees(self.roll, self.pitch, self.yaw);
        SuiteOptions {
            seed: self.seed,
            endurance_s: self.endurance_s,
            front_misalignment: m,
            back_misalignment: m,
            mirror_lateral: self.mirror,
            swap_nodes: self.swap_nodes,
            noise_sigma: self.noise,
        }
    }
}

#[derive(Args)]
struct PowerArgs {
    /// Wake-ups per day; repeat or comma-separate for several rows.
    #[arg(long, value_delimiter = ',')]
    triggers: Vec<f64>,
    /// Active seconds per wake-up.
    #[arg(long)]
    active_s: Option<f64>,
    #[arg(long)]
    battery_wh: Option<f64>,
    /// Solve the active time that yields this many years at the first trigger rate.
    #[arg(long)]
    solve_years: Option<f64>,
    /// Sleep draw, microwatts.
    #[arg(long)]
    sleep_uw: Option<f64>,
    /// Active draw, milliwatts.
    #[arg(long)]
    active_mw: Option<f64>,
}

fn input_error(message: String) -> CommandOutput {
    CommandOutput {
        stdout: String::new(),
        stderr: format!("error: {message}\n"),
        exit_code: EXIT_INPUT_ERROR,
    }
}

/// Analyzes every log on its own thread; outputs keep argument order and the
/// worst exit code wins.
fn analyze_many(logs: &[PathBuf], settings: &Settings, format: Format) -> CommandOutput {
    let outputs: Vec<CommandOutput> = std::thread::scope(|s| {
        let handles: Vec<_> = logs
            .iter()
            .map(|path| s.spawn(move || commands::analyze(path, settings, format)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("analysis thread panicked")).collect()
    });
    let mut merged = CommandOutput::default();
    for o in outputs {
        merged.stdout.push_str(&o.stdout);
        merged.stderr.push_str(&o.stderr);
        merged.exit_code = merged.exit_code.max(o.exit_code);
    }
    merged
}

fn run(cli: Cli) -> CommandOutput {
    match cli.command {
        Command::Analyze { logs, config, format } => match config.settings() {
            Ok(settings) => analyze_many(&logs, &settings, format.into()),
            Err(e) => input_error(e),
        },
        Command::Calibrate { log, config } => match config.settings() {
            Ok(settings) => commands::calibrate_log(&log, &settings),
            Err(e) => input_error(e),
        },
        Command::Power(args) => {
            let defaults = PowerProfile::default();
            let profile = PowerProfile {
                battery_wh: args.battery_wh.unwrap_or(defaults.battery_wh),
                p_sleep: args.sleep_uw.map_or(defaults.p_sleep, |v| v * 1e-6),
                p_active: args.active_mw.map_or(defaults.p_active, |v| v * 1e-3),
                ..defaults
            };
            commands::power(&PowerRequest {
                profile,
                triggers_per_day: args.triggers,
                active_s: args.active_s,
                solve_years: args.solve_years,
            })
        }
        Command::Suite { config, suite, format } => match config.settings() {
            Ok(settings) => commands::suite(&settings, &suite.options(), format.into()),
            Err(e) => input_error(e),
        },
        Command::Sweep {
            parameter,
            values,
            config,
            suite,
            format,
        } => match config.settings() {
            Ok(settings) => commands::sweep(&parameter, &values, &settings, &suite.options(), format.into()),
            Err(e) => input_error(e),
        },
        Command::Generate {
            scenario,
            seed,
            roll,
            pitch,
            yaw,
            noise,
            unit,
            truth,
            config,
        } => match config.settings() {
            Ok(settings) => commands::generate_fixture(
                &GenerateRequest {
                    scenario,
                    seed,
                    misalignment: Misalignment::degrees(roll, pitch, yaw),
                    noise_sigma: noise,
                    unit: match unit {
                        LogUnit::G => Unit::G,
                        LogUnit::Ms2 => Unit::MetersPerSecondSquared,
                    },
                    truth_path: truth,
                },
                &settings,
            ),
            Err(e) => input_error(e),
        },
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT_ERROR as u8 } else { 0 });
        }
    };
    let out = run(cli);
    let _ = std::io::stdout().lock().write_all(out.stdout.as_bytes());
    let _ = std::io::stderr().lock().write_all(out.stderr.as_bytes());
    ExitCode::from(out.exit_code as u8)
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn flag_definitions_are_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn every_config_key_has_a_flag() {
        let cmd = Cli::command();
        let analyze = cmd.find_subcommand("analyze").unwrap();
        let flags: Vec<String> = analyze
            .get_arguments()
            .filter_map(|a| a.get_long().map(str::to_string))
            .collect();
        for key in impact_core::config::KEYS {
            let flag = key.replace('_', "-").replace("-node-id", "-node");
            assert!(flags.contains(&flag), "missing --{flag}");
        }
    }

    #[test]
    fn negative_angles_parse() {
        let cli = Cli::try_parse_from(["forklift-impact", "suite", "--roll", "-30", "--pitch", "-5"]).unwrap();
        let Command::Suite { suite, .. } = cli.command else {
            panic!("suite expected")
        };
        assert_eq!(suite.options().front_misalignment, Misalignment::degrees(-30.0, -5.0, 0.0));
    }
}
