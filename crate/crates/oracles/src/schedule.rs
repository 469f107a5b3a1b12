//! Random notification scenarios and a reference model built on calendar
//! arithmetic from `chrono`.

use chrono::{DateTime, Duration, FixedOffset, NaiveTime, TimeZone};
use ema_core::model::ScheduleSpec;
use ema_core::time::{EpochMillis, TimeOfDay, UtcOffset, HOUR_MS, MINUTE_MS};
use rand::Rng;

#[derive(Debug, Clone)]
pub struct Scenario {
    pub activated_at: EpochMillis,
    pub schedule: ScheduleSpec,
    pub offset: UtcOffset,
    pub fills: Vec<EpochMillis>,
    pub fired: Vec<EpochMillis>,
    pub queries: Vec<EpochMillis>,
}

pub fn random_scenario(rng: &mut impl Rng) -> Scenario {
    let activated_at = 1_620_000_000_000 + rng.random_range(0..30 * 24 * 60) * MINUTE_MS;
    let interval_hours = match rng.random_range(0..4) {
        0 => 24,
        1 => 168,
        _ => rng.random_range(24..=400),
    };
    let start = rng.random_range(0..23 * 60);
    let end = rng.random_range(start + 1..24 * 60);
    let schedule = ScheduleSpec {
        interval_hours,
        window_start: TimeOfDay::from_hm(start / 60, start % 60).expect("valid"),
        window_end: TimeOfDay::from_hm(end / 60, end % 60).expect("valid"),
        max_pending: rng.random_range(1..=4),
    };
    let offset = UtcOffset::from_seconds(rng.random_range(-12 * 4..=14 * 4) * 900).expect("valid");
    let horizon = i64::from(interval_hours) * HOUR_MS * rng.random_range(1..12);
    let mut fills: Vec<EpochMillis> =
        (0..rng.random_range(0..10)).map(|_| activated_at + rng.random_range(0..=horizon)).collect();
    fills.sort_unstable();
    let queries = (0..5).map(|_| activated_at + rng.random_range(-HOUR_MS..=horizon + HOUR_MS)).collect();
    Scenario { activated_at, schedule, offset, fills, fired: Vec::new(), queries }
}

fn zone(offset: UtcOffset) -> FixedOffset {
    FixedOffset::east_opt(offset.seconds()).expect("offset in range")
}

fn naive(t: TimeOfDay) -> NaiveTime {
    NaiveTime::from_hms_opt(u32::from(t.minutes() / 60), u32::from(t.minutes() % 60), 0).expect("valid")
}

/// Tick `k` via local wall-clock time.
pub fn reference_tick(s: &Scenario, k: i64) -> EpochMillis {
    let tz = zone(s.offset);
    let activated: DateTime<FixedOffset> = tz.timestamp_millis_opt(s.activated_at).single().expect("valid");
    let raw = activated + Duration::hours(k * i64::from(s.schedule.interval_hours));
    let local = raw.time();
    let (lo, hi) = (naive(s.schedule.window_start), naive(s.schedule.window_end));
    let shifted = if local < lo {
        raw.date_naive().and_time(lo)
    } else if local > hi {
        raw.date_naive().and_time(hi)
    } else {
        raw.naive_local()
    };
    tz.from_local_datetime(&shifted).single().expect("fixed offset").timestamp_millis()
}

/// Expected due list at `now`, given `fired` ticks already delivered.
pub fn reference_due(s: &Scenario, now: EpochMillis, fired: &[EpochMillis]) -> Vec<EpochMillis> {
    if now < s.activated_at {
        return Vec::new();
    }
    let interval = i64::from(s.schedule.interval_hours) * HOUR_MS;
    // enough ticks to cover every fill look-ahead
    let mut ticks = Vec::new();
    let mut k = 1;
    loop {
        let t = reference_tick(s, k);
        ticks.push(t);
        if t > now + interval {
            break;
        }
        k += 1;
    }
    let mut answered = vec![false; ticks.len()];
    for &f in s.fills.iter().filter(|f| **f <= now) {
        let mut hit = None;
        for i in (0..ticks.len()).rev() {
            if ticks[i] <= f && f - ticks[i] <= interval && !answered[i] {
                hit = Some(i);
                break;
            }
            if ticks[i] <= f && f - ticks[i] > interval {
                break;
            }
        }
        if hit.is_none() {
            if let Some(i) = ticks.iter().position(|t| *t > f) {
                if ticks[i] - f <= interval {
                    hit = Some(i);
                }
            }
        }
        if let Some(i) = hit {
            answered[i] = true;
        }
    }
    let open: Vec<EpochMillis> = ticks
        .iter()
        .zip(&answered)
        .filter(|(t, a)| **t <= now && !**a)
        .map(|(t, _)| *t)
        .collect();
    let skip = open.len().saturating_sub(s.schedule.max_pending as usize);
    open[skip..].iter().copied().filter(|t| !fired.contains(t)).collect()
}
