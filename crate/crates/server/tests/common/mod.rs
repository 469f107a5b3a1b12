#![allow(dead_code)]

use std::path::PathBuf;

use axum::body::Body;
use axum::http::{header, Method, Request};
use axum::Router;
use ema_core::model::QuestionnaireDocument;
use ema_core::time::{parse_rfc3339, EpochMillis};
use ema_server::{router, AppState, Clock, ServiceConfig, Store};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

pub const ADMIN: &str = "admin-secret";
pub const MEDIA: &str = "application/vnd.api+json";

pub fn t(s: &str) -> EpochMillis {
    parse_rfc3339(s).unwrap()
}

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../pipeline/fixtures").join(name)
}

pub fn mini_doc() -> QuestionnaireDocument {
    ema_pipeline::compile_dir(&fixture("mini")).unwrap().document
}

pub fn paperlike_docs() -> Vec<QuestionnaireDocument> {
    ema_pipeline::workbook_dirs(&fixture("paperlike"))
        .unwrap()
        .iter()
        .map(|d| ema_pipeline::compile_dir(d).unwrap().document)
        .collect()
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
        self.body["data"]["id"].as_str().unwrap().to_string()
    }

    pub fn error_code(&self) -> &str {
        self.body["errors"][0]["code"].as_str().unwrap_or("")
    }

    pub fn pointer(&self) -> &str {
        self.body["errors"][0]["source"]["pointer"].as_str().unwrap_or("")
    }
}

#[derive(Clone)]
pub struct Harness {
    pub app: Router,
    pub state: AppState,
}

impl Harness {
    pub fn new() -> Self {
        Self::at(t("2021-05-03T10:00:00Z"))
    }

    pub fn at(now: EpochMillis) -> Self {
        Self::with_config(ServiceConfig { clock: Some(Clock::Fixed(now)), admin_token: Some(ADMIN.into()), ..Default::default() })
    }

    pub fn with_config(config: ServiceConfig) -> Self {
        let state = AppState::new(Store::in_memory().unwrap(), config);
        Self { app: router(state.clone()), state }
    }

    /// Sends one request and checks the response against the JSON:API
    /// validator before returning it.
    pub async fn raw(&self, method: Method, path: &str, token: Option<&str>, content_type: Option<&str>, body: String) -> Reply {
        let mut req = Request::builder().method(method.clone()).uri(path);
        if let Some(tok) = token {
            req = req.header(header::AUTHORIZATION, format!("Bearer {tok}"));
        }
        if let Some(ct) = content_type {
            req = req.header(header::CONTENT_TYPE, ct);
        }
        let resp = self.app.clone().oneshot(req.body(Body::from(body)).unwrap()).await.unwrap();
        let status = resp.status().as_u16();
        let ct = resp.headers().get(header::CONTENT_TYPE).and_then(|v| v.to_str().ok()).map(str::to_string);
        let bytes = resp.into_body().collect().await.unwrap().to_bytes();
        let body: Value = serde_json::from_slice(&bytes)
            .unwrap_or_else(|e| panic!("{method} {path}: body is not JSON ({e}): {}", String::from_utf8_lossy(&bytes)));
        if let Err(e) = ema_oracles::jsonapi::validate(status, ct.as_deref(), &body) {
            panic!("{method} {path} -> {status}: not JSON:API conformant: {e}\n{body:#}");
        }
        Reply { status, body }
    }

    pub async fn call(&self, method: Method, path: &str, token: Option<&str>, body: Option<Value>) -> Reply {
        match body {
            Some(b) => self.raw(method, path, token, Some(MEDIA), b.to_string()).await,
            None => self.raw(method, path, token, None, String::new()).await,
        }
    }

    pub async fn get(&self, path: &str, token: Option<&str>) -> Reply {
        self.call(Method::GET, path, token, None).await
    }

    pub async fn login(&self) -> (String, String) {
        let r = self.call(Method::POST, "/api/v1/users", None, None).await;
        assert_eq!(r.status, 201, "{:#}", r.body);
        (r.id(), r.data()["attributes"]["token"].as_str().unwrap().to_string())
    }

    pub async fn collaborator(&self, studies: &[&str]) -> String {
        let body = json!({"data": {"type": "users", "attributes": {"role": "collaborator", "studies": studies}}});
        let r = self.call(Method::POST, "/api/v1/users", Some(ADMIN), Some(body)).await;
        assert_eq!(r.status, 201, "{:#}", r.body);
        r.data()["attributes"]["token"].as_str().unwrap().to_string()
    }

    pub async fn seed(&self, token: &str, doc: &QuestionnaireDocument) -> Reply {
        let body = json!({"data": {"type": "questionnaire-documents", "attributes": doc}});
        self.call(Method::PUT, "/api/v1/questionnaires", Some(token), Some(body)).await
    }

    pub async fn subscribe(&self, token: &str, study: &str) -> Reply {
        let body = json!({"data": {"type": "subscriptions", "attributes": {"study_id": study}}});
        self.call(Method::POST, "/api/v1/subscriptions", Some(token), Some(body)).await
    }

    pub async fn submit(&self, token: &str, attributes: Value) -> Reply {
        let body = json!({"data": {"type": "answersheets", "attributes": attributes}});
        self.call(Method::POST, "/api/v1/answersheets", Some(token), Some(body)).await
    }

    pub async fn stats(&self) -> Reply {
        let r = self.get("/api/v1/stats", Some(ADMIN)).await;
        assert_eq!(r.status, 200);
        r
    }
}

pub fn sheet(csid: &str, qid: &str, lang: &str, answers: Value) -> Value {
    json!({
        "client_submission_id": csid,
        "questionnaire_id": qid,
        "language": lang,
        "answers": answers,
        "device": {"os": "android", "os_version": "11", "model": "Pixel 4a"},
    })
}

pub fn mini_baseline_answers() -> Value {
    json!({"mood": 2, "sleep_h": 7, "alone": 0, "birth": "1980-02-29"})
}
