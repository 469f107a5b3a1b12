#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::process::{Child, Command, ExitStatus, Output, Stdio};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use ema_core::model::{QuestionnaireDocument, QuestionnaireKind};
use ema_oracles::population::{valid_answers, Population, SimUser};
use rand::seq::IndexedRandom;
use reqwest::blocking::Client;
use reqwest::Method;
use serde_json::{json, Value};

pub const ADMIN: &str = "cli-admin-token";
pub const MEDIA: &str = "application/vnd.api+json";

pub fn ema() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_ema"));
    c.env_remove("EMA_CONFIG").env_remove("EMA_TOKEN");
    c
}

pub fn run(args: &[&str]) -> Output {
    ema().args(args).output().expect("ema runs")
}

pub fn stdout_json(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stdout);
    serde_json::from_str(text.trim()).unwrap_or_else(|e| panic!("stdout is not one JSON value ({e}): {text}"))
}

pub fn stderr_lines(out: &Output) -> Vec<Value> {
    String::from_utf8_lossy(&out.stderr)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap_or_else(|e| panic!("stderr line is not JSON ({e}): {l}")))
        .collect()
}

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../pipeline/fixtures").join(name)
}

/// A config file in `dir` pointing the database at `dir/ema.sqlite3`.
pub fn write_config(dir: &Path, extra: &str) -> PathBuf {
    let path = dir.join("ema.toml");
    let text = format!("listen = \"127.0.0.1:0\"\ndatabase = \"ema.sqlite3\"\nadmin_token = \"{ADMIN}\"\n{extra}");
    fs::write(&path, text).unwrap();
    path
}

/// `ema serve` running as a child process.
pub struct Served {
    child: Option<Child>,
    pub base: String,
    pub log: PathBuf,
}

impl Served {
    pub fn start(config: &Path, extra: &[&str]) -> Self {
        let log = config.with_extension("log");
        let mut child = ema()
            .args(["serve", "--config"])
            .arg(config)
            .args(extra)
            .stdout(Stdio::piped())
            .stderr(File::create(&log).unwrap())
            .spawn()
            .expect("ema serve starts");
        let mut line = String::new();
        BufReader::new(child.stdout.take().unwrap()).read_line(&mut line).unwrap();
        let v: Value = serde_json::from_str(&line)
            .unwrap_or_else(|_| panic!("no listening line; log:\n{}", fs::read_to_string(&log).unwrap_or_default()));
        let base = v["listening"].as_str().unwrap().to_string();
        Self { child: Some(child), base, log }
    }

    pub fn api(&self) -> Api {
        Api::new(&self.base)
    }

    /// Sends SIGTERM and waits for the process to exit.
    pub fn stop(mut self) -> ExitStatus {
        let mut child = self.child.take().unwrap();
        Command::new("kill").args(["-TERM", &child.id().to_string()]).status().unwrap();
        child.wait().unwrap()
    }
}

impl Drop for Served {
    fn drop(&mut self) {
        if let Some(mut c) = self.child.take() {
            let _ = c.kill();
            let _ = c.wait();
        }
    }
}

#[derive(Debug, Clone)]
pub struct Reply {
    pub status: u16,
    pub body: Value,
}

impl Reply {
    pub fn data(&self) -> &Value {
        &self.body["data"]
    }

    pub fn id(&self) -> String {
        self.body["data"]["id"].as_str().unwrap_or_default().to_string()
    }

    pub fn error_code(&self) -> &str {
        self.body["errors"][0]["code"].as_str().unwrap_or("")
    }
}

/// Blocking client that checks every response with the JSON:API validator
/// and keeps the violations it found.
#[derive(Clone)]
pub struct Api {
    base: String,
    client: Client,
    pub checked: Arc<Mutex<usize>>,
    pub violations: Arc<Mutex<Vec<String>>>,
}

impl Api {
    pub fn new(base: &str) -> Self {
        let client = Client::builder().timeout(Duration::from_secs(60)).build().unwrap();
        Self { base: base.to_string(), client, checked: Default::default(), violations: Default::default() }
    }

    /// This client's address with `other`'s response counters.
    pub fn sharing(self, other: &Api) -> Self {
        Self { checked: other.checked.clone(), violations: other.violations.clone(), ..self }
    }

    pub fn raw(&self, method: Method, path: &str, token: Option<&str>, content_type: Option<&str>, body: String) -> Reply {
        let mut req = self.client.request(method.clone(), format!("{}{path}", self.base));
        if let Some(t) = token {
            req = req.bearer_auth(t);
        }
        if let Some(ct) = content_type {
            req = req.header("content-type", ct);
        }
        let resp = req.body(body).send().unwrap_or_else(|e| panic!("{method} {path}: {e}"));
        let status = resp.status().as_u16();
        let ct = resp.headers().get("content-type").and_then(|v| v.to_str().ok()).map(str::to_string);
        let text = resp.text().unwrap();
        let body: Value = serde_json::from_str(&text).unwrap_or(Value::Null);
        *self.checked.lock().unwrap() += 1;
        if let Err(e) = ema_oracles::jsonapi::validate(status, ct.as_deref(), &body) {
            self.violations.lock().unwrap().push(format!("{method} {path} -> {status}: {e}"));
        }
        Reply { status, body }
    }

    pub fn call(&self, method: Method, path: &str, token: Option<&str>, body: Option<Value>) -> Reply {
        match body {
            Some(b) => self.raw(method, path, token, Some(MEDIA), b.to_string()),
            None => self.raw(method, path, token, None, String::new()),
        }
    }

    pub fn get(&self, path: &str, token: Option<&str>) -> Reply {
        self.call(Method::GET, path, token, None)
    }

    pub fn login(&self) -> (String, String) {
        let r = self.call(Method::POST, "/api/v1/users", None, None);
        assert_eq!(r.status, 201, "{}", r.body);
        (r.id(), r.data()["attributes"]["token"].as_str().unwrap().to_string())
    }

    pub fn subscribe(&self, token: &str, study: &str) -> Reply {
        let body = json!({"data": {"type": "subscriptions", "attributes": {"study_id": study}}});
        self.call(Method::POST, "/api/v1/subscriptions", Some(token), Some(body))
    }

    pub fn submit(&self, token: &str, attributes: Value) -> Reply {
        let body = json!({"data": {"type": "answersheets", "attributes": attributes}});
        self.call(Method::POST, "/api/v1/answersheets", Some(token), Some(body))
    }
}

pub fn sheet(csid: &str, qid: &str, lang: &str, os: &str, answers: Value) -> Value {
    json!({
        "client_submission_id": csid,
        "questionnaire_id": qid,
        "language": lang,
        "answers": answers,
        "device": {"os": os, "os_version": "12", "model": "test"},
    })
}

/// Compiles the paperlike corpus into `out` with `ema convert`.
pub fn convert_paperlike(out: &Path) -> Vec<QuestionnaireDocument> {
    let o = ema().args(["convert", "--in"]).arg(fixture("paperlike")).arg("--out").arg(out).output().unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut files: Vec<PathBuf> = fs::read_dir(out).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    files.iter().map(|f| serde_json::from_str(&fs::read_to_string(f).unwrap()).unwrap()).collect()
}

pub fn seed_dir(base: &str, dir: &Path) -> Output {
    ema().args(["seed", "--api", base, "--token", ADMIN, "--file"]).arg(dir).output().unwrap()
}

/// Replays a synthetic population through the API on `threads` client
/// threads. Each user's requests stay in order on one thread. Returns
/// responses that were not the expected success, by status.
pub fn replay(api: &Api, docs: &[QuestionnaireDocument], population: &Population, threads: usize, seed: u64) -> BTreeMap<u16, usize> {
    let by_study: BTreeMap<&str, &QuestionnaireDocument> = docs.iter().map(|d| (d.meta.study_id.as_str(), d)).collect();
    let failures = Mutex::new(BTreeMap::new());
    let users: Vec<(usize, &SimUser)> = population.verified.iter().enumerate().collect();
    thread::scope(|s| {
        for t in 0..threads {
            let (api, by_study, failures, users) = (api.clone(), &by_study, &failures, &users);
            s.spawn(move || {
                let mut rng = ema_oracles::rng(seed.wrapping_add(t as u64));
                let fail = |status: u16| *failures.lock().unwrap().entry(status).or_insert(0) += 1;
                for &(idx, user) in users.iter().skip(t).step_by(threads) {
                    let (id, token) = api.login();
                    if user.enrollments.is_empty() {
                        // one authenticated request makes the user verified
                        let r = api.get(&format!("/api/v1/users/{id}/notifications"), Some(&token));
                        if r.status != 200 {
                            fail(r.status);
                        }
                        continue;
                    }
                    let mut n = 0;
                    for e in &user.enrollments {
                        let doc = by_study[e.study_id.as_str()];
                        let r = api.subscribe(&token, &e.study_id);
                        if r.status != 201 {
                            fail(r.status);
                        }
                        let lang = doc.meta.languages.choose(&mut rng).unwrap().clone();
                        let q = |kind| doc.questionnaires.iter().find(|q| q.kind == kind && q.language == lang).unwrap();
                        let plan = [(QuestionnaireKind::Baseline, e.baselines), (QuestionnaireKind::Followup, e.followups)];
                        for (kind, count) in plan {
                            let q = q(kind);
                            for _ in 0..count {
                                n += 1;
                                let answers = valid_answers(&mut rng, q, user.age);
                                let body = sheet(&format!("u{idx}-{n}"), &q.id, &lang, user.os, json!(answers));
                                let r = api.submit(&token, body);
                                if r.status != 201 {
                                    fail(r.status);
                                }
                            }
                        }
                    }
                }
                for _ in 0..(population.unverified / threads + usize::from(t < population.unverified % threads)) {
                    api.login();
                }
            });
        }
    });
    failures.into_inner().unwrap()
}
