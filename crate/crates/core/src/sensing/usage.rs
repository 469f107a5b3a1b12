use std::collections::{BTreeMap, BTreeSet};

use crate::time::{EpochMillis, UtcOffset, HOUR_MS};

use super::report::{AppUsage, DailyValues, UsageReport};
use super::{check_sorted, Period, SensingError, UsageEvent, UsageEventKind};

pub const SLEEP_THRESHOLD_MS: i64 = HOUR_MS;

/// Half-open interval `[start, end)` in epoch milliseconds.
pub type Interval = (EpochMillis, EpochMillis);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AggregationConfig {
    /// Offset placing calendar-day boundaries.
    pub offset: UtcOffset,
    pub collected_at: EpochMillis,
}

fn overlap(a: Interval, b: Interval) -> i64 {
    (a.1.min(b.1) - a.0.max(b.0)).max(0)
}

/// Clips to the period, drops empty intervals, and merges overlapping or
/// touching ones.
fn normalize(mut intervals: Vec<Interval>, period: Period) -> Vec<Interval> {
    intervals.retain_mut(|iv| {
        iv.0 = iv.0.max(period.begin);
        iv.1 = iv.1.min(period.end);
        iv.0 < iv.1
    });
    intervals.sort_unstable();
    let mut out: Vec<Interval> = Vec::with_capacity(intervals.len());
    for iv in intervals {
        match out.last_mut() {
            Some(last) if iv.0 <= last.1 => last.1 = last.1.max(iv.1),
            _ => out.push(iv),
        }
    }
    out
}

/// Screen-off intervals within the period.
///
/// The screen is taken to be on before the first screen event if that
/// event is `screen_off`, and off otherwise (including when there are no
/// screen events at all).
fn screen_off_intervals(events: &[UsageEvent], period: Period) -> Vec<Interval> {
    let first_screen = events
        .iter()
        .find(|e| matches!(e.kind, UsageEventKind::ScreenOn | UsageEventKind::ScreenOff));
    let mut off_since = match first_screen {
        Some(e) if e.kind == UsageEventKind::ScreenOff => None,
        _ => Some(period.begin.min(events.first().map_or(period.begin, |e| e.timestamp))),
    };
    let mut out = Vec::new();
    for e in events {
        match (e.kind, off_since) {
            (UsageEventKind::ScreenOn, Some(since)) => {
                out.push((since, e.timestamp));
                off_since = None;
            }
            (UsageEventKind::ScreenOff, None) => off_since = Some(e.timestamp),
            _ => {}
        }
    }
    if let Some(since) = off_since {
        out.push((since, period.end));
    }
    normalize(out, period)
}

fn complement(intervals: &[Interval], period: Period) -> Vec<Interval> {
    let mut out = Vec::new();
    let mut cursor = period.begin;
    for &(s, e) in intervals {
        if s > cursor {
            out.push((cursor, s));
        }
        cursor = cursor.max(e);
    }
    if cursor < period.end {
        out.push((cursor, period.end));
    }
    out
}

/// Per-package activity intervals from start/stop pairs.
///
/// A repeated start while active is ignored (overlap merge). A stop as the
/// first event of a package means the activity began before the period.
fn activity_intervals(
    events: &[UsageEvent],
    period: Period,
    start: UsageEventKind,
    stop: UsageEventKind,
) -> BTreeMap<String, Vec<Interval>> {
    struct State {
        open: Option<EpochMillis>,
        intervals: Vec<Interval>,
    }
    let mut states: BTreeMap<&str, State> = BTreeMap::new();
    for e in events.iter().filter(|e| e.kind == start || e.kind == stop) {
        let seen = states.contains_key(e.package.as_str());
        let st = states.entry(&e.package).or_insert(State { open: None, intervals: Vec::new() });
        if e.kind == start {
            st.open.get_or_insert(e.timestamp);
        } else if let Some(s) = st.open.take() {
            st.intervals.push((s, e.timestamp));
        } else if !seen {
            st.intervals.push((period.begin, e.timestamp));
        }
    }
    states
        .into_iter()
        .map(|(pkg, mut st)| {
            if let Some(s) = st.open {
                st.intervals.push((s, period.end));
            }
            (pkg.to_string(), normalize(st.intervals, period))
        })
        .collect()
}

/// Screen-off windows of at least one hour, clipped to the period, sorted
/// and pairwise disjoint.
pub fn sleep_windows(events: &[UsageEvent], period: Period) -> Result<Vec<Interval>, SensingError> {
    check_sorted(events)?;
    Ok(screen_off_intervals(events, period)
        .into_iter()
        .filter(|(s, e)| e - s >= SLEEP_THRESHOLD_MS)
        .collect())
}

fn days(period: Period, offset: UtcOffset) -> Vec<Interval> {
    if period.end <= period.begin {
        return Vec::new();
    }
    (offset.day_index(period.begin)..=offset.day_index(period.end - 1))
        .map(|d| (offset.day_start(d).max(period.begin), offset.day_start(d + 1).min(period.end)))
        .collect()
}

/// Total overlap with `day` plus the (clipped) start of the first and last
/// interval touching it.
fn day_summary(intervals: &[Interval], day: Interval) -> (i64, EpochMillis, EpochMillis) {
    let mut total = 0;
    let mut first = None;
    let mut last = 0;
    for &iv in intervals {
        let o = overlap(iv, day);
        if o > 0 {
            total += o;
            let start = iv.0.max(day.0);
            first.get_or_insert(start);
            last = start;
        }
    }
    (total, first.unwrap_or(0), last)
}

fn app_usage(package: &str, fg: &[Interval], service: &[Interval], days: &[Interval]) -> AppUsage {
    let daily_values: Vec<DailyValues> = days
        .iter()
        .map(|&day| {
            let (use_time, first_use_time, last_use_time) = day_summary(fg, day);
            let (fg_service_use_time, first_fg_service_use_time, last_fg_service_use_time) = day_summary(service, day);
            DailyValues {
                use_time,
                first_use_time,
                last_use_time,
                fg_service_use_time,
                first_fg_service_use_time,
                last_fg_service_use_time,
            }
        })
        .collect();
    AppUsage {
        package_name: package.to_string(),
        complete_use_time: daily_values.iter().map(|d| d.use_time).sum(),
        complete_fg_service_use_time: daily_values.iter().map(|d| d.fg_service_use_time).sum(),
        daily_values,
    }
}

/// Reduces a raw event stream to a [`UsageReport`].
///
/// `apps` holds every tracked package (zero-valued when unused) and
/// `top5Apps` the five packages with the largest foreground time, ties
/// broken by package name.
pub fn aggregate_usage(
    events: &[UsageEvent],
    period: Period,
    tracked: &BTreeSet<String>,
    config: AggregationConfig,
) -> Result<UsageReport, SensingError> {
    check_sorted(events)?;
    let period = Period::new(period.begin, period.end)?;
    let days = days(period, config.offset);

    let foreground =
        activity_intervals(events, period, UsageEventKind::ForegroundStart, UsageEventKind::ForegroundStop);
    let service = activity_intervals(events, period, UsageEventKind::FgServiceStart, UsageEventKind::FgServiceStop);
    let none: Vec<Interval> = Vec::new();
    let usage_of = |pkg: &str| {
        app_usage(
            pkg,
            foreground.get(pkg).unwrap_or(&none),
            service.get(pkg).unwrap_or(&none),
            &days,
        )
    };

    let packages: BTreeSet<&str> = foreground.keys().chain(service.keys()).map(String::as_str).collect();
    let mut ranked: Vec<AppUsage> = packages
        .into_iter()
        .map(usage_of)
        .filter(|a| a.complete_use_time > 0)
        .collect();
    ranked.sort_by(|a, b| b.complete_use_time.cmp(&a.complete_use_time).then_with(|| a.package_name.cmp(&b.package_name)));
    ranked.truncate(5);

    let apps = tracked.iter().map(|p| usage_of(p)).collect();

    let all_fg = normalize(foreground.values().flatten().copied().collect(), period);
    let off = screen_off_intervals(events, period);
    let mut active = complement(&off, period);
    active.extend(all_fg.iter().copied());
    let active = normalize(active, period);
    let per_day = |ivs: &[Interval]| -> Vec<i64> {
        days.iter().map(|&d| ivs.iter().map(|&iv| overlap(iv, d)).sum()).collect()
    };

    Ok(UsageReport {
        begin_time: period.begin,
        end_time: period.end,
        collected_at: config.collected_at,
        apps,
        top5_apps: ranked,
        sleep_times: off.into_iter().filter(|(s, e)| e - s >= SLEEP_THRESHOLD_MS).collect(),
        screen_time: [per_day(&all_fg), per_day(&active)],
    })
}
