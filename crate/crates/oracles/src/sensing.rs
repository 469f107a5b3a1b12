//! Random usage-event streams on minute boundaries and a minute-resolution
//! brute-force simulation of screen and app state.

use std::collections::{BTreeMap, BTreeSet};

use ema_core::sensing::{Period, UsageEvent, UsageEventKind};
use ema_core::time::{parse_rfc3339, UtcOffset, MINUTE_MS};
use rand::seq::IndexedRandom;
use rand::Rng;

pub const PACKAGES: [&str; 7] = ["chat", "mail", "maps", "news", "photo", "social", "video"];

const KINDS: [UsageEventKind; 6] = [
    UsageEventKind::ForegroundStart,
    UsageEventKind::ForegroundStop,
    UsageEventKind::FgServiceStart,
    UsageEventKind::FgServiceStop,
    UsageEventKind::ScreenOn,
    UsageEventKind::ScreenOff,
];

#[derive(Debug, Clone)]
pub struct Scenario {
    pub events: Vec<UsageEvent>,
    pub period: Period,
    pub offset: UtcOffset,
    pub tracked: BTreeSet<String>,
}

pub fn random_scenario(rng: &mut impl Rng) -> Scenario {
    let base = parse_rfc3339("2021-05-10T00:00:00Z").expect("valid");
    let begin = base + rng.random_range(0..2 * 24 * 60) * MINUTE_MS;
    let minutes = rng.random_range(0..4 * 24 * 60);
    let end = begin + minutes * MINUTE_MS;
    let offset = UtcOffset::from_seconds(*[0, 3600, 7200, -5 * 3600, 19800].choose(rng).expect("non-empty"))
        .expect("valid offset");

    let n = rng.random_range(0..80);
    let mut times: Vec<i64> = (0..n)
        .map(|_| begin + rng.random_range(-120..=minutes + 30) * MINUTE_MS)
        .collect();
    times.sort_unstable();
    let events = times
        .into_iter()
        .map(|timestamp| {
            let kind = *KINDS.choose(rng).expect("non-empty");
            let package = match kind {
                UsageEventKind::ScreenOn | UsageEventKind::ScreenOff => String::new(),
                _ => PACKAGES[..rng.random_range(1..=PACKAGES.len())].choose(rng).expect("non-empty").to_string(),
            };
            UsageEvent { timestamp, package, kind }
        })
        .collect();
    let tracked = PACKAGES.iter().filter(|_| rng.random_bool(0.3)).map(|p| p.to_string()).collect();
    Scenario { events, period: Period { begin, end }, offset, tracked }
}

/// Per-minute state of the device over the period.
struct MinuteTimeline {
    minutes: Vec<i64>,
    screen_on: Vec<bool>,
    foreground: BTreeMap<String, Vec<bool>>,
    service: BTreeMap<String, Vec<bool>>,
}

fn simulate(s: &Scenario) -> MinuteTimeline {
    let minutes: Vec<i64> = (0..(s.period.end - s.period.begin) / MINUTE_MS)
        .map(|i| s.period.begin + i * MINUTE_MS)
        .collect();

    let first_screen = s
        .events
        .iter()
        .find(|e| e.kind == UsageEventKind::ScreenOn || e.kind == UsageEventKind::ScreenOff);
    let mut screen = matches!(first_screen, Some(e) if e.kind == UsageEventKind::ScreenOff);

    let pkgs: BTreeSet<&str> = s
        .events
        .iter()
        .filter(|e| !matches!(e.kind, UsageEventKind::ScreenOn | UsageEventKind::ScreenOff))
        .map(|e| e.package.as_str())
        .collect();
    // a package whose first event on a channel is a stop was already active
    let initially = |start: UsageEventKind, stop: UsageEventKind, pkg: &str| {
        s.events
            .iter()
            .find(|e| e.package == pkg && (e.kind == start || e.kind == stop))
            .is_some_and(|e| e.kind == stop)
    };
    let mut fg: BTreeMap<&str, bool> = pkgs
        .iter()
        .map(|p| (*p, initially(UsageEventKind::ForegroundStart, UsageEventKind::ForegroundStop, p)))
        .collect();
    let mut sv: BTreeMap<&str, bool> = pkgs
        .iter()
        .map(|p| (*p, initially(UsageEventKind::FgServiceStart, UsageEventKind::FgServiceStop, p)))
        .collect();

    let mut t = MinuteTimeline {
        minutes: minutes.clone(),
        screen_on: Vec::new(),
        foreground: pkgs.iter().map(|p| (p.to_string(), Vec::new())).collect(),
        service: pkgs.iter().map(|p| (p.to_string(), Vec::new())).collect(),
    };
    let mut next = 0;
    for m in minutes {
        while next < s.events.len() && s.events[next].timestamp <= m {
            let e = &s.events[next];
            match e.kind {
                UsageEventKind::ScreenOn => screen = true,
                UsageEventKind::ScreenOff => screen = false,
                UsageEventKind::ForegroundStart => *fg.get_mut(e.package.as_str()).expect("known") = true,
                UsageEventKind::ForegroundStop => *fg.get_mut(e.package.as_str()).expect("known") = false,
                UsageEventKind::FgServiceStart => *sv.get_mut(e.package.as_str()).expect("known") = true,
                UsageEventKind::FgServiceStop => *sv.get_mut(e.package.as_str()).expect("known") = false,
            }
            next += 1;
        }
        t.screen_on.push(screen);
        for (p, on) in &fg {
            t.foreground.get_mut(*p).expect("known").push(*on);
        }
        for (p, on) in &sv {
            t.service.get_mut(*p).expect("known").push(*on);
        }
    }
    t
}

/// Runs of `true` as `(start, end)` epoch-ms intervals.
fn runs(minutes: &[i64], flags: &[bool]) -> Vec<(i64, i64)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, f) in flags.iter().enumerate() {
        match (f, start) {
            (true, None) => start = Some(minutes[i]),
            (false, Some(s)) => {
                out.push((s, minutes[i]));
                start = None;
            }
            _ => {}
        }
    }
    if let (Some(s), Some(last)) = (start, minutes.last()) {
        out.push((s, last + MINUTE_MS));
    }
    out
}

pub fn brute_force_sleep_windows(s: &Scenario) -> Vec<(i64, i64)> {
    let t = simulate(s);
    let off: Vec<bool> = t.screen_on.iter().map(|on| !on).collect();
    runs(&t.minutes, &off).into_iter().filter(|(a, b)| b - a >= 60 * MINUTE_MS).collect()
}

/// Expected per-app values for one package.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpectedApp {
    pub package: String,
    pub complete_use: i64,
    pub complete_service: i64,
    /// `(use, first, last, service, first_service, last_service)` per day.
    pub daily: Vec<(i64, i64, i64, i64, i64, i64)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpectedReport {
    pub apps: Vec<ExpectedApp>,
    pub top5: Vec<String>,
    pub sleep: Vec<(i64, i64)>,
    pub visible_per_day: Vec<i64>,
    pub active_per_day: Vec<i64>,
}

pub fn brute_force_report(s: &Scenario) -> ExpectedReport {
    let t = simulate(s);
    let day_of = |m: i64| (m + i64::from(s.offset.seconds()) * 1000).div_euclid(24 * 60 * MINUTE_MS);
    let mut day_ids: Vec<i64> = t.minutes.iter().map(|m| day_of(*m)).collect();
    day_ids.dedup();

    let per_day = |flags: &[bool]| -> Vec<(i64, i64, i64)> {
        day_ids
            .iter()
            .map(|d| {
                let idx: Vec<usize> = (0..t.minutes.len()).filter(|i| day_of(t.minutes[*i]) == *d).collect();
                let ms: Vec<i64> = idx.iter().map(|i| t.minutes[*i]).collect();
                let fl: Vec<bool> = idx.iter().map(|i| flags[*i]).collect();
                let r = runs(&ms, &fl);
                let total = fl.iter().filter(|f| **f).count() as i64 * MINUTE_MS;
                (total, r.first().map_or(0, |x| x.0), r.last().map_or(0, |x| x.0))
            })
            .collect()
    };

    let app = |pkg: &str| -> ExpectedApp {
        let empty = vec![false; t.minutes.len()];
        let fg = per_day(t.foreground.get(pkg).unwrap_or(&empty));
        let sv = per_day(t.service.get(pkg).unwrap_or(&empty));
        let daily: Vec<_> = fg.iter().zip(&sv).map(|(f, s)| (f.0, f.1, f.2, s.0, s.1, s.2)).collect();
        ExpectedApp {
            package: pkg.to_string(),
            complete_use: daily.iter().map(|d| d.0).sum(),
            complete_service: daily.iter().map(|d| d.3).sum(),
            daily,
        }
    };

    let mut ranking: Vec<(i64, String)> = t
        .foreground
        .keys()
        .map(|p| (app(p).complete_use, p.clone()))
        .filter(|(u, _)| *u > 0)
        .collect();
    ranking.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));

    let any_fg: Vec<bool> = (0..t.minutes.len()).map(|i| t.foreground.values().any(|v| v[i])).collect();
    let active: Vec<bool> = (0..t.minutes.len()).map(|i| any_fg[i] || t.screen_on[i]).collect();

    ExpectedReport {
        apps: s.tracked.iter().map(|p| app(p)).collect(),
        top5: ranking.into_iter().take(5).map(|(_, p)| p).collect(),
        sleep: brute_force_sleep_windows(s),
        visible_per_day: per_day(&any_fg).into_iter().map(|d| d.0).collect(),
        active_per_day: per_day(&active).into_iter().map(|d| d.0).collect(),
    }
}
