//! Sensor log reading and writing.
//!
//! A log is UTF-8 CSV. The first line is a header naming the five columns and
//! declaring the unit of the acceleration columns:
//!
//! ```text
//! t_us,node_id,ax,ay,az,unit=ms2
//! 0,front,0.01,-0.02,9.81
//! 0,back,0.00,0.03,9.80
//! ```
//!
//! `t_us` is an integer timestamp in microseconds and `unit` is `G` or `ms2`.
//! Columns may appear in any order; the `unit=` token is not a column.
//! Rows of different nodes may interleave freely, but each node's own rows
//! must be strictly increasing in time.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::ParseError;
use crate::model::{Frame, ImuSample, SensorTrace, G};

/// Unit of the acceleration columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unit {
    G,
    MetersPerSecondSquared,
}

impl Unit {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "G" => Some(Unit::G),
            "ms2" => Some(Unit::MetersPerSecondSquared),
            _ => None,
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            Unit::G => "G",
            Unit::MetersPerSecondSquared => "ms2",
        }
    }

    fn to_si(self, v: f64) -> f64 {
        match self {
            Unit::G => v * G,
            Unit::MetersPerSecondSquared => v,
        }
    }

    fn of_si(self, v: f64) -> f64 {
        match self {
            Unit::G => v / G,
            Unit::MetersPerSecondSquared => v,
        }
    }
}

const COLUMNS: [&str; 5] = ["t_us", "node_id", "ax", "ay", "az"];

struct Header {
    /// Position of each of `COLUMNS` in a row.
    index: [usize; 5],
    unit: Unit,
}

fn parse_header(line: &str) -> Result<Header, ParseError> {
    let malformed = |reason: String| ParseError::MalformedHeader { line: 1, reason };
    let mut unit = None;
    let mut columns = Vec::new();
    for token in line.trim().split(',').map(str::trim) {
        if let Some(u) = token.strip_prefix("unit=") {
            if unit.is_some() {
                return Err(malformed("unit declared twice".into()));
            }
            unit = Some(Unit::parse(u).ok_or_else(|| ParseError::UnknownUnit {
                line: 1,
                unit: u.to_string(),
            })?);
        } else {
            columns.push(token);
        }
    }
    let unit = unit.ok_or_else(|| malformed("missing unit=<G|ms2>".into()))?;
    if columns.len() != COLUMNS.len() {
        return Err(malformed(format!(
            "expected columns {}, found {}",
            COLUMNS.join(","),
            columns.join(",")
        )));
    }
    let mut index = [0; 5];
    for (slot, name) in index.iter_mut().zip(COLUMNS) {
        let mut hits = columns.iter().enumerate().filter(|(_, c)| **c == name);
        *slot = match (hits.next(), hits.next()) {
            (Some((i, _)), None) => i,
            (None, _) => return Err(malformed(format!("missing column {name}"))),
            (Some(_), Some(_)) => return Err(malformed(format!("duplicate column {name}"))),
        };
    }
    Ok(Header { index, unit })
}

struct Record {
    line: usize,
    t_us: i64,
    ax: f64,
    ay: f64,
    az: f64,
}

/// Parses a log into one tilted-frame trace per node, sorted by node id.
///
/// Timestamps become seconds relative to the earliest record in the file;
/// accelerations are converted to m/s² and clipped to the full-scale range.
pub fn parse_log<R: BufRead>(reader: R, sample_rate_hz: f64) -> Result<Vec<SensorTrace>, ParseError> {
    let mut lines = reader.lines();
    let header = match lines.next() {
        Some(line) => parse_header(&line?)?,
        None => {
            return Err(ParseError::MalformedHeader {
                line: 1,
                reason: "empty input".into(),
            })
        }
    };

    let mut nodes: BTreeMap<String, Vec<Record>> = BTreeMap::new();
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != COLUMNS.len() {
            return Err(ParseError::MalformedRecord {
                line: line_no,
                reason: format!("expected 5 fields, found {}", fields.len()),
            });
        }
        let field = |c: usize| fields[header.index[c]];
        let bad = |what: &str| ParseError::MalformedRecord {
            line: line_no,
            reason: format!("invalid {what}"),
        };
        let t_us: i64 = field(0).parse().map_err(|_| bad("t_us"))?;
        let node = field(1);
        if node.is_empty() {
            return Err(bad("node_id"));
        }
        let axis = |c: usize, name: &str| -> Result<f64, ParseError> {
            let v: f64 = field(c).parse().map_err(|_| bad(name))?;
            if v.is_finite() {
                Ok(header.unit.to_si(v))
            } else {
                Err(bad(name))
            }
        };
        let (ax, ay, az) = (axis(2, "ax")?, axis(3, "ay")?, axis(4, "az")?);

        let records = nodes.entry(node.to_string()).or_default();
        if records.last().is_some_and(|prev| prev.t_us >= t_us) {
            return Err(ParseError::NonMonotoneTimestamps {
                line: line_no,
                node: node.to_string(),
            });
        }
        records.push(Record {
            line: line_no,
            t_us,
            ax,
            ay,
            az,
        });
    }

    let Some(origin) = nodes.values().filter_map(|r| r.first()).map(|r| r.t_us).min() else {
        return Ok(Vec::new());
    };
    nodes
        .into_iter()
        .map(|(node, records)| {
            let first_line = records.first().map_or(2, |r| r.line);
            let samples = records
                .iter()
                .map(|r| {
                    let t = (r.t_us - origin) as f64 / 1e6;
                    ImuSample::clipped(t, r.ax, r.ay, r.az)
                })
                .collect();
            SensorTrace::new(node, Frame::Tilted, sample_rate_hz, samples).map_err(|e| {
                ParseError::MalformedRecord {
                    line: first_line,
                    reason: e.to_string(),
                }
            })
        })
        .collect()
}

pub fn parse_log_str(text: &str, sample_rate_hz: f64) -> Result<Vec<SensorTrace>, ParseError> {
    parse_log(text.as_bytes(), sample_rate_hz)
}

pub fn read_log(path: &Path, sample_rate_hz: f64) -> Result<Vec<SensorTrace>, ParseError> {
    let file = std::fs::File::open(path)?;
    parse_log(std::io::BufReader::new(file), sample_rate_hz)
}

/// Writes traces as one merged log, rows ordered by time then by trace order.
pub fn write_log<W: Write>(traces: &[&SensorTrace], unit: Unit, mut out: W) -> std::io::Result<()> {
    writeln!(out, "t_us,node_id,ax,ay,az,unit={}", unit.token())?;
    let mut rows: Vec<(i64, usize, &ImuSample)> = traces
        .iter()
        .enumerate()
        .flat_map(|(k, tr)| {
            tr.samples()
                .iter()
                .map(move |s| ((s.t * 1e6).round() as i64, k, s))
        })
        .collect();
    rows.sort_by_key(|&(t, k, _)| (t, k));
    for (t_us, k, s) in rows {
        writeln!(
            out,
            "{t_us},{},{},{},{}",
            traces[k].node_id(),
            unit.of_si(s.ax),
            unit.of_si(s.ay),
            unit.of_si(s.az)
        )?;
    }
    Ok(())
}
