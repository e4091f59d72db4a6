//! Event report rendering.
//!
//! Human format: one line per event, led by the detection vocabulary
//! (`1x RB collision`, `1x braking`, `1x short vibration BT`, ...), or the
//! single line `Nothing` when no event was found.
//!
//! Machine format: one event per line, tab-separated columns
//!
//! | column | content |
//! |---|---|
//! | `t_start`, `t_end` | seconds, 3 decimals |
//! | `kind` | `collision`, `harsh_braking`, `vibration_short`, `vibration_long` |
//! | `zone_or_label` | `LF`/`RF`/`LB`/`RB`, `AT`/`BT`, or `-` |
//! | `peak` | peak mean magnitude in m/s², 3 decimals |
//! | `diag_json` | every feature value consulted by the decision tree |
//!
//! Both formats are pure functions of the events, so identical inputs render
//! byte-identical output.

use std::fmt::Write as _;

use crate::classify::SegmentFeatures;
use crate::model::{EventKind, EventReport, SeverityLabel, Zone};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Human,
    Machine,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "human" => Ok(Format::Human),
            "machine" => Ok(Format::Machine),
            _ => Err(format!("unknown format {s:?} (expected human or machine)")),
        }
    }
}

pub fn kind_token(kind: &EventKind) -> &'static str {
    match kind {
        EventKind::Collision { .. } => "collision",
        EventKind::HarshBraking => "harsh_braking",
        EventKind::VibrationShort { .. } => "vibration_short",
        EventKind::VibrationLong { .. } => "vibration_long",
    }
}

fn zone_or_label(kind: &EventKind) -> &'static str {
    match kind {
        EventKind::Collision { zone, .. } => zone.code(),
        EventKind::HarshBraking => "-",
        EventKind::VibrationShort { label } | EventKind::VibrationLong { label } => match label {
            SeverityLabel::AT => "AT",
            SeverityLabel::BT => "BT",
        },
    }
}

pub fn human_line(event: &EventReport) -> String {
    format!(
        "1x {} [{:.3} s - {:.3} s, peak {:.2} m/s²]",
        event.kind.describe(),
        event.t_start,
        event.t_end,
        event.peak()
    )
}

pub fn machine_line(event: &EventReport) -> String {
    let diag = serde_json::to_string(&event.diagnostics).expect("features serialize");
    format!(
        "{:.3}\t{:.3}\t{}\t{}\t{:.3}\t{}",
        event.t_start,
        event.t_end,
        kind_token(&event.kind),
        zone_or_label(&event.kind),
        event.peak(),
        diag
    )
}

pub fn emit_report(events: &[EventReport], format: Format) -> String {
    let mut out = String::new();
    match format {
        Format::Human if events.is_empty() => out.push_str("Nothing\n"),
        Format::Human => events.iter().for_each(|e| {
            let _ = writeln!(out, "{}", human_line(e));
        }),
        Format::Machine => events.iter().for_each(|e| {
            let _ = writeln!(out, "{}", machine_line(e));
        }),
    }
    out
}

/// Parsed machine-format line.
#[derive(Debug, Clone, PartialEq)]
pub struct MachineRecord {
    pub t_start: f64,
    pub t_end: f64,
    pub kind: String,
    pub zone_or_label: String,
    pub peak: f64,
    pub diagnostics: SegmentFeatures,
}

impl MachineRecord {
    /// Rebuilds the event kind named by the `kind` and `zone_or_label` columns.
    pub fn event_kind(&self) -> Option<EventKind> {
        let label = || match self.zone_or_label.as_str() {
            "AT" => Some(SeverityLabel::AT),
            "BT" => Some(SeverityLabel::BT),
            _ => None,
        };
        match self.kind.as_str() {
            "collision" => Some(EventKind::Collision {
                zone: Zone::from_code(&self.zone_or_label)?,
                peak: self.diagnostics.peak_a_total_mean,
            }),
            "harsh_braking" => Some(EventKind::HarshBraking),
            "vibration_short" => Some(EventKind::VibrationShort { label: label()? }),
            "vibration_long" => Some(EventKind::VibrationLong { label: label()? }),
            _ => None,
        }
    }
}

pub fn parse_machine_line(line: &str) -> Option<MachineRecord> {
    let mut cols = line.splitn(6, '\t');
    Some(MachineRecord {
        t_start: cols.next()?.parse().ok()?,
        t_end: cols.next()?.parse().ok()?,
        kind: cols.next()?.to_string(),
        zone_or_label: cols.next()?.to_string(),
        peak: cols.next()?.parse().ok()?,
        diagnostics: serde_json::from_str(cols.next()?).ok()?,
    })
}
