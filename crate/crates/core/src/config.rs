//! Analysis configuration: defaults, flat `key = value` files and overrides.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::Path;

use crate::error::ConfigError;
use crate::model::{DEFAULT_SAMPLE_RATE_HZ, G};

/// Longitudinal (`X`) or lateral (`Y`) axis for the braking sign test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BrakingAxis {
    X,
    Y,
}

impl fmt::Display for BrakingAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BrakingAxis::X => "X",
            BrakingAxis::Y => "Y",
        })
    }
}

/// Every tunable of the detection pipeline. Accelerations in m/s², times in s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    /// Mean magnitude that starts a segment (strict `>`).
    pub trigger_threshold: f64,
    /// Segments extend while the mean magnitude stays at or above this.
    pub release_threshold: f64,
    /// Windows separated by at most this gap are merged.
    pub merge_gap: f64,
    pub min_segment: f64,
    pub short_max: f64,
    pub long_min: f64,
    /// Net/total `a_x` area ratio above which an intermediate segment is long.
    pub ratio_long: f64,
    /// Peak mean magnitude above which a vibration is labeled AT!.
    pub vibration_severe: f64,
    /// Peak mean magnitude above which a confirmed braking is harsh.
    pub harsh_braking_threshold: f64,
    pub braking_axis: BrakingAxis,
    /// Long segments at or below this baseline-crossing rate (1/s) are braking candidates.
    pub crossing_rate_braking_max: f64,
    pub sample_rate: f64,
    pub gravity: f64,
    /// Minimum stationary window length for tilt estimation.
    pub static_window_s: f64,
    /// Per-axis std-dev bound (m/s²) for a window to count as stationary.
    pub stationary_std_max: f64,
    pub front_node_id: String,
    pub back_node_id: String,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            trigger_threshold: 5.0,
            release_threshold: 1.0,
            merge_gap: 0.5,
            min_segment: 0.005,
            short_max: 0.75,
            long_min: 1.25,
            ratio_long: 0.75,
            vibration_severe: 22.0,
            harsh_braking_threshold: 5.0,
            braking_axis: BrakingAxis::X,
            crossing_rate_braking_max: 4.0,
            sample_rate: DEFAULT_SAMPLE_RATE_HZ,
            gravity: G,
            static_window_s: 1.0,
            stationary_std_max: 0.15,
            front_node_id: "front".to_string(),
            back_node_id: "back".to_string(),
        }
    }
}

/// Keys accepted in config files and on the command line, in echo order.
pub const KEYS: &[&str] = &[
    "trigger_threshold",
    "release_threshold",
    "merge_gap",
    "min_segment",
    "short_max",
    "long_min",
    "ratio_long",
    "vibration_severe",
    "harsh_braking_threshold",
    "braking_axis",
    "crossing_rate_braking_max",
    "sample_rate",
    "gravity",
    "static_window_s",
    "stationary_std_max",
    "front_node_id",
    "back_node_id",
];

impl AnalysisConfig {
    /// Effective value of `key`, formatted for echoing.
    pub fn get(&self, key: &str) -> Option<String> {
        let v = match key {
            "trigger_threshold" => self.trigger_threshold.to_string(),
            "release_threshold" => self.release_threshold.to_string(),
            "merge_gap" => self.merge_gap.to_string(),
            "min_segment" => self.min_segment.to_string(),
            "short_max" => self.short_max.to_string(),
            "long_min" => self.long_min.to_string(),
            "ratio_long" => self.ratio_long.to_string(),
            "vibration_severe" => self.vibration_severe.to_string(),
            "harsh_braking_threshold" => self.harsh_braking_threshold.to_string(),
            "braking_axis" => self.braking_axis.to_string(),
            "crossing_rate_braking_max" => self.crossing_rate_braking_max.to_string(),
            "sample_rate" => self.sample_rate.to_string(),
            "gravity" => self.gravity.to_string(),
            "static_window_s" => self.static_window_s.to_string(),
            "stationary_std_max" => self.stationary_std_max.to_string(),
            "front_node_id" => self.front_node_id.clone(),
            "back_node_id" => self.back_node_id.clone(),
            _ => return None,
        };
        Some(v)
    }

    /// Sets one key from its textual value. Cross-field constraints are
    /// checked separately by [`AnalysisConfig::validate`].
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let value = value.trim();
        let invalid = |reason: &str| ConfigError::InvalidValue {
            key: key.to_string(),
            reason: reason.to_string(),
        };
        let number = || -> Result<f64, ConfigError> {
            let v: f64 = value.parse().map_err(|_| invalid("not a number"))?;
            if !v.is_finite() || v <= 0.0 {
                return Err(invalid("must be a positive number"));
            }
            Ok(v)
        };
        match key {
            "trigger_threshold" => self.trigger_threshold = number()?,
            "release_threshold" => self.release_threshold = number()?,
            "merge_gap" => self.merge_gap = number()?,
            "min_segment" => self.min_segment = number()?,
            "short_max" => self.short_max = number()?,
            "long_min" => self.long_min = number()?,
            "ratio_long" => self.ratio_long = number()?,
            "vibration_severe" => self.vibration_severe = number()?,
            "harsh_braking_threshold" => self.harsh_braking_threshold = number()?,
            "crossing_rate_braking_max" => self.crossing_rate_braking_max = number()?,
            "sample_rate" => self.sample_rate = number()?,
            "gravity" => self.gravity = number()?,
            "static_window_s" => self.static_window_s = number()?,
            "stationary_std_max" => self.stationary_std_max = number()?,
            "braking_axis" => {
                self.braking_axis = match value.to_ascii_uppercase().as_str() {
                    "X" => BrakingAxis::X,
                    "Y" => BrakingAxis::Y,
                    _ => return Err(invalid("expected X or Y")),
                }
            }
            "front_node_id" | "back_node_id" => {
                let id = value.trim_matches('"');
                if id.is_empty() {
                    return Err(invalid("node id must not be empty"));
                }
                if key == "front_node_id" {
                    self.front_node_id = id.to_string();
                } else {
                    self.back_node_id = id.to_string();
                }
            }
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |key: &str, reason: &str| ConfigError::InvalidValue {
            key: key.to_string(),
            reason: reason.to_string(),
        };
        if self.ratio_long >= 1.0 {
            return Err(invalid("ratio_long", "must lie strictly between 0 and 1"));
        }
        if self.short_max >= self.long_min {
            return Err(invalid("short_max", "must be smaller than long_min"));
        }
        if self.front_node_id == self.back_node_id {
            return Err(invalid("back_node_id", "front and back node ids must differ"));
        }
        Ok(())
    }
}

/// Where an effective setting came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Default,
    File,
    CommandLine,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::Default => "default",
            Source::File => "config file",
            Source::CommandLine => "command line",
        })
    }
}

/// A configuration together with the provenance of each key, so runs can echo
/// their effective settings. Later layers win: defaults < file < command line.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Settings {
    pub config: AnalysisConfig,
    sources: Vec<(String, Source)>,
}

impl Settings {
    pub fn apply(&mut self, key: &str, value: &str, source: Source) -> Result<(), ConfigError> {
        self.config.set(key, value)?;
        self.sources.retain(|(k, _)| k != key);
        self.sources.push((key.to_string(), source));
        Ok(())
    }

    /// Applies every `key = value` line of a config file body.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or(ConfigError::Syntax { line: i + 1 })?;
            let key = key.trim();
            if key.is_empty() {
                return Err(ConfigError::Syntax { line: i + 1 });
            }
            self.apply(key, value, Source::File)?;
        }
        self.config.validate()
    }

    pub fn source(&self, key: &str) -> Source {
        self.sources
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, s)| *s)
            .unwrap_or(Source::Default)
    }

    pub fn overrides(&self) -> impl Iterator<Item = (&str, Source)> {
        self.sources.iter().map(|(k, s)| (k.as_str(), *s))
    }

    /// One line per key: `key = value (source)`.
    pub fn echo(&self) -> Vec<String> {
        KEYS.iter()
            .map(|k| {
                format!(
                    "{k} = {} ({})",
                    self.config.get(k).unwrap_or_default(),
                    self.source(k)
                )
            })
            .collect()
    }
}

/// Parses a config file body on top of the defaults.
pub fn parse_config(text: &str) -> Result<Settings, ConfigError> {
    let mut settings = Settings::default();
    settings.apply_text(text)?;
    Ok(settings)
}

/// Loads a config file; `None` yields the defaults.
pub fn load_config(path: Option<&Path>) -> Result<Settings, ConfigError> {
    match path {
        None => Ok(Settings::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| ConfigError::Io(format!("{}: {e}", p.display())))?;
            parse_config(&text)
        }
    }
}
