//! Timestamps, time-of-day values and fixed-offset calendar days.
//!
//! All instants are epoch milliseconds (UTC). Calendar-day splitting uses a
//! single fixed UTC offset per deployment.

use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, FixedOffset, SecondsFormat, TimeZone, Utc};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub type EpochMillis = i64;

pub const MINUTE_MS: i64 = 60_000;
pub const HOUR_MS: i64 = 60 * MINUTE_MS;
pub const DAY_MS: i64 = 24 * HOUR_MS;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TimeError {
    #[error("invalid time of day {0:?}, expected HH:MM")]
    TimeOfDay(String),
    #[error("invalid UTC offset {0:?}, expected +HH:MM, -HH:MM or Z")]
    Offset(String),
    #[error("invalid RFC 3339 timestamp {0:?}")]
    Timestamp(String),
}

/// Minutes since local midnight, `00:00` to `23:59`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TimeOfDay(u16);

impl TimeOfDay {
    pub fn from_hm(hour: u16, minute: u16) -> Option<Self> {
        (hour < 24 && minute < 60).then_some(Self(hour * 60 + minute))
    }

    pub fn minutes(self) -> u16 {
        self.0
    }

    pub fn millis(self) -> i64 {
        i64::from(self.0) * MINUTE_MS
    }
}

impl fmt::Display for TimeOfDay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:02}:{:02}", self.0 / 60, self.0 % 60)
    }
}

impl FromStr for TimeOfDay {
    type Err = TimeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || TimeError::TimeOfDay(s.to_string());
        let (h, m) = s.trim().split_once(':').ok_or_else(err)?;
        if h.is_empty() || h.len() > 2 || m.len() != 2 {
            return Err(err());
        }
        let hour = h.parse::<u16>().map_err(|_| err())?;
        let minute = m.parse::<u16>().map_err(|_| err())?;
        Self::from_hm(hour, minute).ok_or_else(err)
    }
}

impl Serialize for TimeOfDay {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TimeOfDay {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A fixed offset from UTC used to place calendar-day boundaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct UtcOffset {
    seconds: i32,
}

impl UtcOffset {
    pub const UTC: UtcOffset = UtcOffset { seconds: 0 };

    pub fn from_seconds(seconds: i32) -> Option<Self> {
        (seconds.abs() < 24 * 3600).then_some(Self { seconds })
    }

    pub fn seconds(self) -> i32 {
        self.seconds
    }

    fn millis(self) -> i64 {
        i64::from(self.seconds) * 1000
    }

    /// Index of the local calendar day containing `t`.
    pub fn day_index(self, t: EpochMillis) -> i64 {
        (t + self.millis()).div_euclid(DAY_MS)
    }

    /// UTC instant of local midnight starting day `day`.
    pub fn day_start(self, day: i64) -> EpochMillis {
        day * DAY_MS - self.millis()
    }

    /// Local time of day of `t`, in milliseconds since local midnight.
    pub fn ms_into_day(self, t: EpochMillis) -> i64 {
        (t + self.millis()).rem_euclid(DAY_MS)
    }
}

impl fmt::Display for UtcOffset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.seconds < 0 { '-' } else { '+' };
        let abs = self.seconds.unsigned_abs();
        write!(f, "{sign}{:02}:{:02}", abs / 3600, (abs % 3600) / 60)
    }
}

impl FromStr for UtcOffset {
    type Err = TimeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("z") || t.eq_ignore_ascii_case("utc") {
            return Ok(Self::UTC);
        }
        let err = || TimeError::Offset(s.to_string());
        let (sign, rest) = match t.as_bytes().first() {
            Some(b'+') => (1, &t[1..]),
            Some(b'-') => (-1, &t[1..]),
            _ => return Err(err()),
        };
        let tod: TimeOfDay = rest.parse().map_err(|_| err())?;
        Self::from_seconds(sign * i32::from(tod.minutes()) * 60).ok_or_else(err)
    }
}

impl Serialize for UtcOffset {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for UtcOffset {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub fn parse_rfc3339(s: &str) -> Result<EpochMillis, TimeError> {
    DateTime::parse_from_rfc3339(s.trim())
        .map(|dt| dt.timestamp_millis())
        .map_err(|_| TimeError::Timestamp(s.to_string()))
}

pub fn format_rfc3339(t: EpochMillis) -> String {
    match Utc.timestamp_millis_opt(t).single() {
        Some(dt) => dt.to_rfc3339_opts(SecondsFormat::Millis, true),
        None => t.to_string(),
    }
}

pub fn format_rfc3339_at(t: EpochMillis, offset: UtcOffset) -> String {
    let Some(tz) = FixedOffset::east_opt(offset.seconds) else {
        return format_rfc3339(t);
    };
    match tz.timestamp_millis_opt(t).single() {
        Some(dt) => dt.to_rfc3339_opts(SecondsFormat::Millis, false),
        None => t.to_string(),
    }
}
