//! Plain-text event files.
//!
//! One value per line. `timestamps` files hold reals in `(0, 1]`; `positions`
//! files hold integers (e.g. read start coordinates) that are mapped to
//! `(pos - min + 1) / (max - min + 1)`. An optional `# n=<replicates>` line sets
//! the replicate count (default 1). Other `#` lines and blank lines are ignored.

use std::fmt::Write as _;
use std::path::Path;

use clap::ValueEnum;
use tvpoint_core::EventSeries;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EventFormat {
    Timestamps,
    Positions,
}

impl EventFormat {
    pub fn name(self) -> &'static str {
        match self {
            EventFormat::Timestamps => "timestamps",
            EventFormat::Positions => "positions",
        }
    }
}

pub fn read_event_file(path: &Path, format: EventFormat) -> Result<EventSeries> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    parse_events(&text, format).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn parse_header(line: &str) -> Option<&str> {
    let rest = line.strip_prefix('#')?.trim_start();
    rest.strip_prefix("n=").map(str::trim)
}

/// Parses the body of an event file. Errors are plain messages.
pub fn parse_events(text: &str, format: EventFormat) -> std::result::Result<EventSeries, String> {
    let mut n = 1usize;
    let mut raw: Vec<(usize, &str)> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('#') {
            if let Some(v) = parse_header(line) {
                n =
                    v.parse().ok().filter(|&n: &usize| n >= 1).ok_or_else(|| {
                        format!("line {}: bad replicate header {line:?}", lineno + 1)
                    })?;
            }
            continue;
        }
        raw.push((lineno + 1, line));
    }

    let times = match format {
        EventFormat::Timestamps => raw
            .iter()
            .map(|&(lineno, s)| {
                let t: f64 = s
                    .parse()
                    .map_err(|_| format!("line {lineno}: {s:?} is not a number"))?;
                if t > 0.0 && t <= 1.0 {
                    Ok(t)
                } else {
                    Err(format!("line {lineno}: timestamp {t} is outside (0, 1]"))
                }
            })
            .collect::<std::result::Result<Vec<f64>, String>>()?,
        EventFormat::Positions => {
            let positions = raw
                .iter()
                .map(|&(lineno, s)| {
                    s.parse::<i64>()
                        .map_err(|_| format!("line {lineno}: {s:?} is not an integer position"))
                })
                .collect::<std::result::Result<Vec<i64>, String>>()?;
            normalize_positions(&positions)
        }
    };
    EventSeries::from_unsorted(times, n).map_err(|e| e.to_string())
}

/// Maps integer positions into `(0, 1]`, keeping their order; the largest maps to 1.
pub fn normalize_positions(positions: &[i64]) -> Vec<f64> {
    let (Some(&min), Some(&max)) = (positions.iter().min(), positions.iter().max()) else {
        return Vec::new();
    };
    let span = (max as i128 - min as i128 + 1) as f64;
    positions
        .iter()
        .map(|&p| (p as i128 - min as i128 + 1) as f64 / span)
        .collect()
}

/// Timestamps format with a replicate header.
pub fn format_timestamps(events: &EventSeries) -> String {
    let mut out = String::with_capacity(events.len() * 20 + 16);
    let _ = writeln!(out, "# n={}", events.replicates());
    for t in events.times() {
        let _ = writeln!(out, "{t}");
    }
    out
}
