//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any
//! fails. Runs the real `ema` binary where a criterion names a command.

mod common;

use std::collections::BTreeSet;
use std::fs;
use std::process::ExitCode;
use std::thread;
use std::time::{Duration, Instant};

use common::*;
use ema_core::feedback::{evaluate, RuleError};
use ema_core::schedule::activate;
use ema_core::sensing::{aggregate_usage, coarsen_location, sleep_windows, AggregationConfig};
use ema_oracles::population::{self, Population};
use rand::Rng;
use reqwest::Method;
use serde_json::{json, Value};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn secs(d: Duration) -> String {
    format!("{:.2} s", d.as_secs_f64())
}

fn fixture_fidelity() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let start = Instant::now();
    let o = ema().args(["convert", "--in"]).arg(fixture("paperlike")).arg("--out").arg(dir.path()).output().unwrap();
    let took = start.elapsed();
    if !o.status.success() {
        return outcome(false, format!("convert exited {:?}", o.status.code()));
    }
    let s = stdout_json(&o);
    let c = &s["element_counts"];
    let got = [&c["page"], &c["text"], &c["question"], &c["headline"], &c["media"], &s["elements_total"]]
        .map(|v| v.as_u64().unwrap_or(u64::MAX));
    let pass = got == [117, 159, 976, 24, 0, 1276] && took < Duration::from_secs(5);
    outcome(
        pass,
        format!(
            "page {} text {} question {} headline {} media {} total {} (want 117/159/976/24/0 = 1276) in {} (limit 5 s)",
            got[0], got[1], got[2], got[3], got[4], got[5], secs(took)
        ),
    )
}

/// Requests every endpoint, successful and failing, and returns the
/// number of endpoint/method pairs touched.
fn sweep_endpoints(api: &Api, study: &str, qid: &str) -> usize {
    let (uid, token) = api.login();
    api.subscribe(&token, study);
    let lang = "en";
    let q = api.get(&format!("/api/v1/questionnaires/{qid}?lang={lang}"), None);
    let answers: Value = {
        let mut rng = ema_oracles::rng(3);
        let parsed: ema_core::model::Questionnaire = {
            let mut attrs = q.data()["attributes"].clone();
            attrs["id"] = json!(qid);
            serde_json::from_value(attrs).unwrap()
        };
        json!(population::valid_answers(&mut rng, &parsed, 33))
    };
    let sheet_r = api.submit(&token, sheet("sweep-1", qid, lang, "android", answers));
    let sid = sheet_r.id();
    let calls: Vec<(Method, String, Option<&str>, Option<Value>)> = vec![
        (Method::GET, "/api/v1/health".into(), None, None),
        (Method::GET, "/api/v1/studies".into(), None, None),
        (Method::GET, format!("/api/v1/studies/{study}"), None, None),
        (Method::GET, "/api/v1/studies/none".into(), None, None),
        (Method::GET, format!("/api/v1/studies/{study}/questionnaires"), None, None),
        (Method::GET, format!("/api/v1/questionnaires/{qid}?lang=de&version=1"), None, None),
        (Method::GET, format!("/api/v1/questionnaires/{qid}?lang=xx"), None, None),
        (Method::DELETE, format!("/api/v1/questionnaires/{qid}"), Some(ADMIN), None),
        (Method::GET, "/api/v1/questionnaires".into(), None, None),
        (Method::POST, "/api/v1/subscriptions".into(), Some(&token), Some(json!({"data": {"type": "subscriptions", "attributes": {"study_id": study}}}))),
        (Method::POST, "/api/v1/subscriptions".into(), None, Some(json!({"data": {"type": "subscriptions"}}))),
        (Method::POST, "/api/v1/answersheets".into(), Some(&token), Some(json!({"data": {"type": "users", "attributes": {}}}))),
        (Method::GET, format!("/api/v1/answersheets/{sid}/evaluation?lang=de"), Some(&token), None),
        (Method::GET, "/api/v1/answersheets/missing/evaluation".into(), Some(&token), None),
        (Method::GET, format!("/api/v1/users/{uid}/notifications?now=2021-06-01T12:00:00Z"), Some(&token), None),
        (Method::GET, format!("/api/v1/users/{uid}/notifications?now=soon"), Some(&token), None),
        (Method::GET, "/api/v1/stats".into(), Some(ADMIN), None),
        (Method::GET, "/api/v1/stats".into(), Some(&token), None),
        (Method::PATCH, "/api/v1/stats".into(), Some(ADMIN), None),
        (Method::GET, "/api/v1/nowhere".into(), None, None),
    ];
    let n = calls.len();
    for (m, path, tok, body) in calls {
        api.call(m, &path, tok, body);
    }
    api.raw(Method::POST, "/api/v1/users", None, Some("text/plain"), "hello".into());
    api.raw(Method::POST, "/api/v1/subscriptions", Some(&token), Some(MEDIA), "{".into());
    let doc = json!({"data": {"type": "questionnaire-documents", "attributes": {"meta": {}}}});
    api.call(Method::PUT, "/api/v1/questionnaires", Some(ADMIN), Some(doc));
    n + 6
}

struct ReplayRun {
    stats: Value,
    took: Duration,
    failures: String,
    responses: usize,
    violations: Vec<String>,
    endpoints: usize,
    stopped_cleanly: bool,
}

fn replay_population() -> ReplayRun {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "");
    let start = Instant::now();
    let json_dir = dir.path().join("json");
    let docs = convert_paperlike(&json_dir);
    let served = Served::start(&config, &["--now", "2021-03-01T08:00:00Z"]);
    let seeded = seed_dir(&served.base, &json_dir);
    assert!(seeded.status.success(), "{}", String::from_utf8_lossy(&seeded.stderr));
    let pop: Population = population::population(&mut ema_oracles::rng(0x7290));
    let api = served.api();
    let failures = replay(&api, &docs, &pop, 8, 0x17241);
    let mut stopped_cleanly = served.stop().success();
    let o = ema().args(["stats", "--format", "json", "--config"]).arg(&config).output().unwrap();
    let took = start.elapsed();

    // the sweep runs on a restarted service over the same database
    let served = Served::start(&config, &[]);
    let api = served.api().sharing(&api);
    let endpoints = sweep_endpoints(&api, "mood", "mood-baseline");
    stopped_cleanly &= served.stop().success();
    let responses = *api.checked.lock().unwrap();
    let violations = api.violations.lock().unwrap().clone();
    ReplayRun {
        stats: stdout_json(&o),
        took,
        failures: format!("{failures:?}"),
        responses,
        violations,
        endpoints,
        stopped_cleanly,
    }
}

fn statistics(run: &ReplayRun) -> Outcome {
    let g = &run.stats["global"];
    let f = |k: &str| g[k].as_f64().unwrap_or(f64::NAN);
    let activation = f("activation_rate") * 100.0;
    let followup = f("followup_rate") * 100.0;
    let mean = f("mean_followups_per_followup_user");
    let (users, sheets) = (f("verified_users"), f("answersheets_total"));
    let pass = (activation - 38.4).abs() <= 0.05
        && (followup - 52.7).abs() <= 0.05
        && (mean - 8.6).abs() <= 0.05
        && users == 7290.0
        && sheets == 17241.0
        && run.failures == "{}"
        && run.took < Duration::from_secs(120);
    outcome(
        pass,
        format!(
            "activation {activation:.3}% (38.4 ± 0.05), follow-up {followup:.3}% (52.7 ± 0.05), mean follow-ups {mean:.3} (8.6 ± 0.05), \
             users {users} (7290), answersheets {sheets} (17241), rejected requests {}, in {} (limit 120 s); \
             Android/iOS {:.2}, age {:.2} ± {:.2}",
            run.failures,
            secs(run.took),
            f("os_ratio"),
            f("age_mean"),
            f("age_sd"),
        ),
    )
}

fn conformance(run: &ReplayRun) -> Outcome {
    let pass = run.violations.is_empty() && run.responses > 30_000 && run.stopped_cleanly;
    let mut detail = format!(
        "{} responses validated ({} endpoint/method cases in the sweep), {} violations, clean shutdown {}",
        run.responses,
        run.endpoints,
        run.violations.len(),
        run.stopped_cleanly
    );
    if let Some(v) = run.violations.first() {
        detail.push_str(&format!("; first: {v}"));
    }
    outcome(pass, detail)
}

fn oracle_suites() -> Outcome {
    let start = Instant::now();
    let mut rng = ema_oracles::rng(0xacce_0001);
    let mut feedback = 0;
    for case in 0..10_000 {
        let rules = ema_oracles::feedback::random_rules(&mut rng);
        let answers = ema_oracles::feedback::random_answers(&mut rng);
        let lang = if case % 2 == 0 { "en" } else { "de" };
        let got = evaluate(&rules, &answers, lang)
            .map(|e| e.fired.into_iter().map(|f| (f.key, f.text)).collect::<Vec<_>>())
            .map_err(|e| match e {
                RuleError::LangMissing { key, .. } => key,
                other => other.to_string(),
            });
        if got != ema_oracles::feedback::reference_evaluate(&rules, &answers, lang) {
            feedback += 1;
        }
    }

    let close = |a: i64, b: i64| (a - b).abs() <= 1000;
    let pairs_close = |a: &[(i64, i64)], b: &[(i64, i64)]| {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| close(x.0, y.0) && close(x.1, y.1))
    };
    let mut sensing = 0;
    for _ in 0..1000 {
        let s = ema_oracles::sensing::random_scenario(&mut rng);
        let want = ema_oracles::sensing::brute_force_report(&s);
        let windows = sleep_windows(&s.events, s.period).unwrap_or_default();
        let cfg = AggregationConfig { offset: s.offset, collected_at: s.period.end };
        let ok = match aggregate_usage(&s.events, s.period, &s.tracked, cfg) {
            Ok(r) => {
                let top: Vec<&str> = r.top5_apps.iter().map(|a| a.package_name.as_str()).collect();
                pairs_close(&r.sleep_times, &want.sleep)
                    && pairs_close(&windows, &want.sleep)
                    && top == want.top5
                    && r.screen_time[0].len() == want.visible_per_day.len()
                    && r.screen_time[0].iter().zip(&want.visible_per_day).all(|(a, b)| close(*a, *b))
                    && r.screen_time[1].iter().zip(&want.active_per_day).all(|(a, b)| close(*a, *b))
                    && r.apps.len() == want.apps.len()
                    && r.apps.iter().zip(&want.apps).all(|(g, w)| {
                        g.package_name == w.package
                            && close(g.complete_use_time, w.complete_use)
                            && close(g.complete_fg_service_use_time, w.complete_service)
                            && g.daily_values.len() == w.daily.len()
                            && g.daily_values.iter().zip(&w.daily).all(|(d, e)| {
                                close(d.use_time, e.0)
                                    && close(d.first_use_time, e.1)
                                    && close(d.last_use_time, e.2)
                                    && close(d.fg_service_use_time, e.3)
                                    && close(d.first_fg_service_use_time, e.4)
                                    && close(d.last_fg_service_use_time, e.5)
                            })
                    })
            }
            Err(_) => false,
        };
        if !ok {
            sensing += 1;
        }
    }

    let mut schedule = 0;
    for _ in 0..1000 {
        let s = ema_oracles::schedule::random_scenario(&mut rng);
        let mut plan = activate("sub", s.activated_at, s.schedule.clone(), s.offset);
        let mut ok = (1..20).all(|k| plan.tick(k) == ema_oracles::schedule::reference_tick(&s, k));
        for &f in &s.fills {
            ok &= plan.record_fillout(f).is_ok();
        }
        let mut queries = s.queries.clone();
        queries.sort_unstable();
        let mut fired = Vec::new();
        for now in queries {
            let due = plan.due_notifications(now);
            ok &= due == ema_oracles::schedule::reference_due(&s, now, &fired);
            plan.mark_fired(&due);
            fired.extend(due);
        }
        if !ok {
            schedule += 1;
        }
    }
    outcome(
        feedback + sensing + schedule == 0,
        format!(
            "feedback 10000 cases: {feedback} mismatches; sleep_windows/aggregate_usage 1000 streams (±1 s): {sensing} mismatches; \
             scheduler 1000 scenarios: {schedule} mismatches; {}",
            secs(start.elapsed())
        ),
    )
}

fn coarsening() -> Outcome {
    let mut rng = ema_oracles::rng(0xacce_0005);
    let (mut bad_delta, mut bad_idem, mut bad_grid) = (0, 0, 0);
    let mut spacing = BTreeSet::new();
    for _ in 0..1_000_000 {
        let lat: f64 = rng.random_range(-90.0..=90.0);
        let lon: f64 = rng.random_range(-180.0..=180.0);
        let Ok(g) = coarsen_location(lat, lon) else {
            bad_delta += 1;
            continue;
        };
        let dlon = (g.lon() - lon).abs();
        if (g.lat() - lat).abs() > 0.05 + 1e-9 || dlon.min(360.0 - dlon) > 0.05 + 1e-9 {
            bad_delta += 1;
        }
        if coarsen_location(g.lat(), g.lon()).ok() != Some(g) {
            bad_idem += 1;
        }
        let (la, lo) = (g.lat() * 10.0, g.lon() * 10.0);
        if (la - la.round()).abs() > 1e-9 || (lo - lo.round()).abs() > 1e-9 {
            bad_grid += 1;
        }
        // neighbouring cells one step north sit exactly 0.1° apart
        if spacing.len() < 1000 && g.lat() < 89.9 {
            if let Ok(n) = coarsen_location(g.lat() + 0.1, g.lon()) {
                spacing.insert(((n.lat() - g.lat()) * 1e6).round() as i64);
            }
        }
    }
    let spacing_ok = spacing.iter().all(|s| *s == 100_000);
    let km = 0.1 * std::f64::consts::PI / 180.0 * 6371.0088;
    outcome(
        bad_delta + bad_idem + bad_grid == 0 && spacing_ok,
        format!(
            "10^6 points: {bad_delta} outside ±0.05°, {bad_idem} not idempotent, {bad_grid} off grid; spacing 0.1° ({km:.1} km) {}",
            if spacing_ok { "confirmed" } else { "violated" }
        ),
    )
}

fn idempotency() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "");
    let file = dir.path().join("mood.json");
    ema().args(["convert", "--in"]).arg(fixture("mini")).arg("--out").arg(&file).output().unwrap();
    let served = Served::start(&config, &[]);
    assert!(seed_dir(&served.base, &file).status.success());
    let api = served.api();
    let users: Vec<String> = (0..10)
        .map(|_| {
            let (_, t) = api.login();
            api.subscribe(&t, "mood");
            t
        })
        .collect();
    let statuses = std::sync::Mutex::new(Vec::new());
    thread::scope(|s| {
        for copy in 0..5 {
            for chunk in 0..10 {
                let (api, users, statuses) = (api.clone(), &users, &statuses);
                s.spawn(move || {
                    for i in (chunk * 10..chunk * 10 + 10).map(|i| (i + copy * 7) % 100) {
                        let answers = json!({"mood": 2, "sleep_h": 7, "alone": 0, "birth": "1980-02-29"});
                        let r = api.submit(&users[i % 10], sheet(&format!("csid-{i}"), "mood-baseline", "en", "android", answers));
                        statuses.lock().unwrap().push(r.status);
                    }
                });
            }
        }
    });
    let stats = api.get("/api/v1/stats", Some(ADMIN));
    let total = stats.data()[0]["attributes"]["answersheets_total"].as_u64().unwrap_or(0);
    let statuses = statuses.into_inner().unwrap();
    let created = statuses.iter().filter(|s| **s == 201).count();
    let replayed = statuses.iter().filter(|s| **s == 200).count();
    outcome(
        total == 100 && created == 100 && replayed == 400,
        format!("500 concurrent submissions of 100 ids: {total} answersheets stored, {created} created, {replayed} replays answered 200"),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    convert_paperlike(&a);
    convert_paperlike(&b);
    let mut names: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    let identical = names.iter().filter(|n| fs::read(a.join(n)).unwrap() == fs::read(b.join(n)).unwrap()).count();

    let config = write_config(dir.path(), "");
    let served = Served::start(&config, &[]);
    let lines = |o: std::process::Output| -> Vec<Value> {
        String::from_utf8_lossy(&o.stdout).lines().map(|l| serde_json::from_str(l).unwrap()).collect()
    };
    let first = lines(seed_dir(&served.base, &a));
    let second = lines(seed_dir(&served.base, &b));
    let created = first.iter().filter(|r| r["action"] == "created").count();
    let new_versions = second.iter().filter(|r| r["action"] != "unchanged").count();
    outcome(
        identical == names.len() && names.len() == 5 && created == first.len() && !second.is_empty() && new_versions == 0,
        format!(
            "{identical}/{} files byte-identical across two converts; second seed: {} results, {new_versions} new versions",
            names.len(),
            second.len()
        ),
    )
}

fn main() -> ExitCode {
    let run = replay_population();
    let results = [
        ("fixture fidelity", fixture_fidelity()),
        ("statistics reproduction", statistics(&run)),
        ("JSON:API conformance", conformance(&run)),
        ("oracle equivalence", oracle_suites()),
        ("location coarsening", coarsening()),
        ("idempotent submission", idempotency()),
        ("determinism", determinism()),
    ];
    let mut failed = 0;
    for (name, o) in &results {
        println!("{} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
