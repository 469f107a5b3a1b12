//! Privacy-reducing aggregation of device usage events and coarse
//! location handling.
//!
//! Raw events never leave this module: callers get a [`UsageReport`] with
//! per-day totals, first/last use timestamps for a selected set of apps,
//! screen-off windows of at least one hour, and positions snapped to a
//! 0.1° grid.

mod location;
mod report;
mod usage;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::time::EpochMillis;

pub use location::{coarsen_location, GridLocation};
pub use report::{AppUsage, DailyValues, UsageReport};
pub use usage::{aggregate_usage, sleep_windows, AggregationConfig, Interval, SLEEP_THRESHOLD_MS};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SensingError {
    #[error("position ({lat}, {lon}) is outside [-90, 90] x [-180, 180]")]
    Range { lat: f64, lon: f64 },
    #[error("event {index} at {timestamp} is earlier than its predecessor")]
    Unsorted { index: usize, timestamp: EpochMillis },
    #[error("period ends at {end} before it begins at {begin}")]
    Period { begin: EpochMillis, end: EpochMillis },
    #[error("event log line {line}: {message}")]
    EventLog { line: usize, message: String },
}

impl SensingError {
    pub fn code(&self) -> &'static str {
        match self {
            Self::Range { .. } => "E_RANGE",
            Self::Unsorted { .. } => "E_UNSORTED",
            Self::Period { .. } => "E_PERIOD",
            Self::EventLog { .. } => "E_EVENT_LOG",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UsageEventKind {
    ForegroundStart,
    ForegroundStop,
    FgServiceStart,
    FgServiceStop,
    ScreenOn,
    ScreenOff,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UsageEvent {
    pub timestamp: EpochMillis,
    #[serde(default)]
    pub package: String,
    pub kind: UsageEventKind,
}

/// Observation period `[begin, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Period {
    pub begin: EpochMillis,
    pub end: EpochMillis,
}

impl Period {
    pub fn new(begin: EpochMillis, end: EpochMillis) -> Result<Self, SensingError> {
        if end < begin {
            return Err(SensingError::Period { begin, end });
        }
        Ok(Self { begin, end })
    }
}

/// Reads a JSON-lines event log. Blank lines are skipped; line numbers in
/// errors are 1-based.
pub fn parse_event_log(text: &str) -> Result<Vec<UsageEvent>, SensingError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| SensingError::EventLog { line: i + 1, message: e.to_string() })
        })
        .collect()
}

pub(crate) fn check_sorted(events: &[UsageEvent]) -> Result<(), SensingError> {
    match events.windows(2).position(|w| w[1].timestamp < w[0].timestamp) {
        Some(i) => Err(SensingError::Unsorted { index: i + 1, timestamp: events[i + 1].timestamp }),
        None => Ok(()),
    }
}
