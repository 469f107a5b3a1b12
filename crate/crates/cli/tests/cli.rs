mod common;

use std::fs;
use std::io::Read;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread;
use std::time::Duration;

use common::*;
use reqwest::Method;
use serde_json::{json, Value};

fn copy_dir(from: &std::path::Path, to: &std::path::Path) {
    fs::create_dir_all(to).unwrap();
    for e in fs::read_dir(from).unwrap() {
        let p = e.unwrap().path();
        fs::copy(&p, to.join(p.file_name().unwrap())).unwrap();
    }
}

#[test]
fn convert_writes_the_golden_document() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("mini.json");
    let o = ema().args(["convert", "--in"]).arg(fixture("mini")).arg("--out").arg(&out).output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read(&out).unwrap(), fs::read(fixture("mini.golden.json")).unwrap());
    let summary = stdout_json(&o);
    assert_eq!(summary["documents"][0]["study_id"], "mood");
    assert_eq!(summary["documents"][0]["file"], json!(out));
}

#[test]
fn convert_reports_validation_errors_as_json_lines() {
    let dir = tempfile::tempdir().unwrap();
    let wb = dir.path().join("broken");
    copy_dir(&fixture("mini"), &wb);
    let base = fs::read_to_string(wb.join("baseline.csv")).unwrap();
    fs::write(wb.join("baseline.csv"), base.replacen("0;1;2;3,", "0;1;1;3,", 1)).unwrap();
    let out = dir.path().join("out.json");
    let o = ema().args(["convert", "--in"]).arg(&wb).arg("--out").arg(&out).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(o.stdout.is_empty());
    assert!(!out.exists(), "nothing is written on failure");
    let lines = stderr_lines(&o);
    assert!(!lines.is_empty());
    assert!(lines.iter().all(|l| l["severity"] == "error" && l["code"].as_str().unwrap().starts_with("E_")));
    assert!(lines.iter().any(|l| l["code"] == "E_DUP_CODE"), "{lines:?}");
}

#[test]
fn convert_io_failure_exits_2() {
    let o = run(&["convert", "--in", "/definitely/missing", "--out", "x.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_lines(&o)[0]["code"], "E_IO");
}

#[test]
fn convert_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    convert_paperlike(&a);
    convert_paperlike(&b);
    let names: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(names.len(), 5);
    for n in names {
        assert_eq!(fs::read(a.join(&n)).unwrap(), fs::read(b.join(&n)).unwrap(), "{n:?}");
    }
}

#[test]
fn seed_then_get_round_trips_questionnaires() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("mood.json");
    let o = ema().args(["convert", "--in"]).arg(fixture("mini")).arg("--out").arg(&file).output().unwrap();
    assert!(o.status.success());
    let served = Served::start(&write_config(dir.path(), ""), &[]);
    let o = seed_dir(&served.base, &file);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let results: Vec<Value> =
        String::from_utf8_lossy(&o.stdout).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert!(results.iter().all(|r| r["action"] == "created" && r["new_version"] == 1), "{results:?}");

    // compare against the file's own JSON, not the typed model
    let on_disk: Value = serde_json::from_str(&fs::read_to_string(&file).unwrap()).unwrap();
    let api = served.api();
    for q in on_disk["questionnaires"].as_array().unwrap() {
        let (id, lang) = (q["id"].as_str().unwrap(), q["language"].as_str().unwrap());
        let r = api.get(&format!("/api/v1/questionnaires/{id}?lang={lang}"), None);
        assert_eq!(r.status, 200);
        let mut expected = q.clone();
        expected.as_object_mut().unwrap().remove("id");
        assert_eq!(r.data()["attributes"], expected, "{id}/{lang}");
    }

    let again = seed_dir(&served.base, &file);
    let results: Vec<Value> =
        String::from_utf8_lossy(&again.stdout).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert!(results.iter().all(|r| r["action"] == "unchanged"), "{results:?}");
    assert!(api.violations.lock().unwrap().is_empty());
}

#[test]
fn seed_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("mood.json");
    ema().args(["convert", "--in"]).arg(fixture("mini")).arg("--out").arg(&file).output().unwrap();
    let served = Served::start(&write_config(dir.path(), ""), &[]);

    let o = ema().args(["seed", "--api", &served.base, "--token", "wrong", "--file"]).arg(&file).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stderr_lines(&o)[0]["code"], "E_AUTH");

    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\"meta\": 1}").unwrap();
    let o = ema().args(["seed", "--api", &served.base, "--token", ADMIN, "--file"]).arg(&bad).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stderr_lines(&o)[0]["code"], "E_VALIDATION");

    // a document the service rejects
    let mut doc: Value = serde_json::from_str(&fs::read_to_string(&file).unwrap()).unwrap();
    doc["meta"]["languages"] = json!([]);
    fs::write(&bad, doc.to_string()).unwrap();
    let o = ema().args(["seed", "--api", &served.base, "--token", ADMIN, "--file"]).arg(&bad).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stderr_lines(&o)[0]["code"], "E_VALIDATION");

    let closed = format!("http://{}", std::net::TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap());
    let o = ema().args(["seed", "--api", &closed, "--token", ADMIN, "--file"]).arg(&file).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_lines(&o)[0]["code"], "E_NETWORK");
}

#[test]
fn seed_token_falls_back_to_config() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("mood.json");
    ema().args(["convert", "--in"]).arg(fixture("mini")).arg("--out").arg(&file).output().unwrap();
    let config = write_config(dir.path(), "");
    let served = Served::start(&config, &[]);
    let o = ema().env("EMA_CONFIG", &config).args(["seed", "--api", &served.base, "--file"]).arg(&file).output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn serve_answers_health_and_reports_bind_errors() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "");
    let served = Served::start(&config, &[]);
    let r = served.api().get("/api/v1/health", None);
    assert_eq!(r.status, 200);

    let taken = served.base.trim_start_matches("http://").to_string();
    let o = ema().args(["serve", "--config"]).arg(&config).args(["--listen", &taken]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_lines(&o).last().unwrap()["code"], "E_BIND");
    assert!(served.stop().success());
}

#[test]
fn sigterm_lets_in_flight_submissions_finish() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "");
    let file = dir.path().join("mood.json");
    ema().args(["convert", "--in"]).arg(fixture("mini")).arg("--out").arg(&file).output().unwrap();
    let served = Served::start(&config, &[]);
    assert!(seed_dir(&served.base, &file).status.success());
    let api = served.api();
    let base = served.base.clone();

    let stop = Arc::new(AtomicBool::new(false));
    let workers: Vec<_> = (0..4)
        .map(|w| {
            let (api, base, stop) = (api.clone(), base.clone(), stop.clone());
            thread::spawn(move || {
                let (_, token) = api.login();
                api.subscribe(&token, "mood");
                let client = reqwest::blocking::Client::new();
                let mut created = 0;
                for i in 0.. {
                    let body = json!({"data": {"type": "answersheets", "attributes": sheet(
                        &format!("w{w}-{i}"), "mood-baseline", "en", "ios",
                        json!({"mood": 1, "sleep_h": 8, "alone": 1, "birth": "2000-01-01"}),
                    )}});
                    let sent = client
                        .post(format!("{base}/api/v1/answersheets"))
                        .bearer_auth(&token)
                        .header("content-type", MEDIA)
                        .body(body.to_string())
                        .send();
                    match sent {
                        Ok(r) if r.status().as_u16() == 201 => created += 1,
                        Ok(r) => panic!("unexpected {}", r.status()),
                        Err(_) => break,
                    }
                    if stop.load(Ordering::Relaxed) && i > 10_000 {
                        break;
                    }
                }
                created
            })
        })
        .collect();
    thread::sleep(Duration::from_millis(400));
    let status = served.stop();
    stop.store(true, Ordering::Relaxed);
    let created: u64 = workers.into_iter().map(|w| w.join().unwrap()).sum();
    assert!(status.success(), "{status:?}");
    assert!(created > 0);

    let o = ema().args(["stats", "--format", "json", "--config"]).arg(&config).output().unwrap();
    let stats = stdout_json(&o);
    assert_eq!(stats["global"]["answersheets_total"].as_u64().unwrap(), created);
}

#[test]
fn stats_on_an_empty_database_is_a_zero_table() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "");
    let o = ema().args(["stats", "--config"]).arg(&config).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split_whitespace().collect();
    assert_eq!(row[0], "all");
    assert!(row[1..].iter().all(|c| c.parse::<f64>().unwrap() == 0.0), "{text}");
}

/// Column values of the table, keyed by scope and header.
fn parse_table(text: &str) -> Vec<(String, Vec<(String, f64)>)> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split_whitespace().collect();
    lines
        .filter(|l| !l.starts_with("users_total"))
        .map(|l| {
            let cells: Vec<&str> = l.split_whitespace().collect();
            let values = header[1..].iter().zip(&cells[1..]).map(|(h, c)| (h.to_string(), c.parse().unwrap())).collect();
            (cells[0].to_string(), values)
        })
        .collect()
}

#[test]
fn stats_json_matches_the_table() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "");
    let docs = convert_paperlike(&dir.path().join("json"));
    let served = Served::start(&config, &["--now", "2021-03-01T08:00:00Z"]);
    assert!(seed_dir(&served.base, &dir.path().join("json")).status.success());
    let mut rng = ema_oracles::rng(5);
    let population = ema_oracles::population::population(&mut rng);
    let small = ema_oracles::population::Population {
        verified: population.verified.into_iter().take(300).collect(),
        unverified: 7,
    };
    let failures = replay(&served.api(), &docs, &small, 4, 99);
    assert!(failures.is_empty(), "{failures:?}");
    assert!(served.stop().success());

    let table = ema().args(["stats", "--config"]).arg(&config).output().unwrap();
    let json = ema().args(["stats", "--format", "json", "--config"]).arg(&config).output().unwrap();
    let rows = parse_table(&String::from_utf8(table.stdout).unwrap());
    let stats = stdout_json(&json);
    assert_eq!(rows.len(), 6);
    let field = |h: &str| match h {
        "verified" => ("verified_users", 1.0),
        "active" => ("active_users", 1.0),
        "activation_%" => ("activation_rate", 100.0),
        "followup_users" => ("followup_users", 1.0),
        "followup_%" => ("followup_rate", 100.0),
        "mean_followups" => ("mean_followups_per_followup_user", 1.0),
        "answersheets" => ("answersheets_total", 1.0),
        "baseline" => ("baseline_answersheets", 1.0),
        "followup" => ("followup_answersheets", 1.0),
        "android" => ("android_users", 1.0),
        "ios" => ("ios_users", 1.0),
        "android_per_ios" => ("os_ratio", 1.0),
        "age_mean" => ("age_mean", 1.0),
        "age_sd" => ("age_sd", 1.0),
        other => panic!("unknown column {other}"),
    };
    for (scope, values) in rows {
        let obj = if scope == "all" { &stats["global"] } else { &stats["studies"][&scope] };
        for (h, v) in values {
            let (key, scale) = field(&h);
            let expected = obj[key].as_f64().unwrap() * scale;
            assert!((v - expected).abs() <= 0.005 + 1e-9, "{scope}.{h}: table {v}, json {expected}");
        }
    }
    assert_eq!(stats["global"]["verified_users"], 300);
    assert_eq!(stats["users_total"], 307);

    let again = ema().args(["stats", "--format", "json", "--config"]).arg(&config).output().unwrap();
    assert_eq!(again.stdout, json.stdout);
}

#[test]
fn config_errors_and_env_fallback() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "listen = 5").unwrap();
    let o = ema().args(["stats", "--config"]).arg(&bad).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stderr_lines(&o)[0]["code"], "E_CONFIG");

    let o = ema().env("EMA_CONFIG", &bad).arg("stats").output().unwrap();
    assert_eq!(o.status.code(), Some(1));

    let o = ema().env("EMA_CONFIG", dir.path().join("absent.toml")).arg("stats").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_lines(&o)[0]["code"], "E_IO");

    let o = run(&["serve", "--now", "yesterday"]);
    assert_eq!(o.status.code(), Some(2), "clap rejects bad --now values");
}

#[test]
fn tracked_package_list_filters_usage_reports() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("packages.txt"), "# tracked\ncom.whatsapp\n").unwrap();
    let config = write_config(dir.path(), "tracked_packages = \"packages.txt\"\ntimezone = \"+01:00\"\n");
    let file = dir.path().join("mood.json");
    ema().args(["convert", "--in"]).arg(fixture("mini")).arg("--out").arg(&file).output().unwrap();
    let served = Served::start(&config, &[]);
    assert!(seed_dir(&served.base, &file).status.success());
    let api = served.api();
    let (_, token) = api.login();
    api.subscribe(&token, "mood");
    let mut attrs = sheet("s1", "mood-baseline", "en", "android", json!({"mood": 2, "sleep_h": 7, "alone": 0, "birth": "1990-01-01"}));
    let app = json!({"packageName": "com.example.game", "completeUseTime": 0, "completeFGServiceUseTime": 0, "dailyValues": []});
    attrs["sensing"] = json!({"beginTime": 0, "endTime": 1, "collectedAt": 1, "apps": [app], "top5Apps": [], "sleepTimes": [], "screenTime": [[], []]});
    let r = api.submit(&token, attrs);
    assert_eq!((r.status, r.error_code()), (422, "E_SENSING"));

    fs::remove_file(dir.path().join("packages.txt")).unwrap();
    let mut child = ema().args(["serve", "--config"]).arg(&config).stderr(std::process::Stdio::piped()).spawn().unwrap();
    assert_eq!(child.wait().unwrap().code(), Some(2));
    let mut err = String::new();
    child.stderr.take().unwrap().read_to_string(&mut err).unwrap();
    assert!(err.contains("E_IO"), "{err}");
    let _ = Method::GET;
}
