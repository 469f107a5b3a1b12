use serde::{Deserialize, Serialize};

use crate::time::EpochMillis;

use super::usage::SLEEP_THRESHOLD_MS;

/// Per-day values for one app. Durations are milliseconds; timestamps
/// are epoch milliseconds and are 0 on days without use.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DailyValues {
    #[serde(rename = "useTime")]
    pub use_time: i64,
    #[serde(rename = "firstUseTime")]
    pub first_use_time: EpochMillis,
    #[serde(rename = "lastUseTime")]
    pub last_use_time: EpochMillis,
    #[serde(rename = "FGServiceUseTime")]
    pub fg_service_use_time: i64,
    #[serde(rename = "firstFGServiceUseTime")]
    pub first_fg_service_use_time: EpochMillis,
    #[serde(rename = "lastFGServiceUseTime")]
    pub last_fg_service_use_time: EpochMillis,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AppUsage {
    #[serde(rename = "packageName")]
    pub package_name: String,
    #[serde(rename = "completeUseTime")]
    pub complete_use_time: i64,
    #[serde(rename = "completeFGServiceUseTime")]
    pub complete_fg_service_use_time: i64,
    #[serde(rename = "dailyValues")]
    pub daily_values: Vec<DailyValues>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UsageReport {
    #[serde(rename = "beginTime")]
    pub begin_time: EpochMillis,
    #[serde(rename = "endTime")]
    pub end_time: EpochMillis,
    #[serde(rename = "collectedAt")]
    pub collected_at: EpochMillis,
    pub apps: Vec<AppUsage>,
    #[serde(rename = "top5Apps")]
    pub top5_apps: Vec<AppUsage>,
    #[serde(rename = "sleepTimes")]
    pub sleep_times: Vec<(EpochMillis, EpochMillis)>,
    /// `[app-visible time per day, screen-active time per day]`.
    #[serde(rename = "screenTime")]
    pub screen_time: [Vec<i64>; 2],
}

impl UsageReport {
    /// Invariant violations of a received report, as human-readable
    /// messages. Empty for every report produced by `aggregate_usage`.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.begin_time > self.end_time {
            out.push("beginTime is after endTime".to_string());
        }
        if self.top5_apps.len() > 5 {
            out.push(format!("top5Apps has {} entries", self.top5_apps.len()));
        }
        let mut prev_end = i64::MIN;
        for (b, e) in &self.sleep_times {
            if e.saturating_sub(*b) < SLEEP_THRESHOLD_MS {
                out.push(format!("sleep window {b}..{e} is shorter than one hour"));
            }
            if *b < prev_end {
                out.push(format!("sleep window {b}..{e} overlaps its predecessor"));
            }
            prev_end = *e;
        }
        let [visible, active] = &self.screen_time;
        if visible.len() != active.len() {
            out.push("screenTime lists differ in length".to_string());
        }
        if visible.iter().zip(active).any(|(v, a)| v > a) {
            out.push("screen-active time is below app-visible time".to_string());
        }
        for app in self.apps.iter().chain(&self.top5_apps) {
            let sum = app.daily_values.iter().try_fold(0i64, |acc, d| acc.checked_add(d.use_time));
            if sum != Some(app.complete_use_time) {
                out.push(format!("{}: completeUseTime is not the sum of daily use", app.package_name));
            }
            if app.daily_values.iter().any(|d| d.first_use_time > d.last_use_time) {
                out.push(format!("{}: firstUseTime after lastUseTime", app.package_name));
            }
        }
        out
    }
}
