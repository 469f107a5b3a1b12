//! Client side of questionnaire seeding.
//!
//! The whole document goes to the service in one `PUT`; the service decides
//! per questionnaire whether to create, keep or version it, and answers
//! with one result per questionnaire id.

use std::time::Duration;

use ema_core::model::{QuestionnaireDocument, SeedResult};
use reqwest::blocking::Client;
use reqwest::StatusCode;
use serde::Deserialize;
use serde_json::json;
use thiserror::Error;

pub const MEDIA_TYPE: &str = "application/vnd.api+json";

#[derive(Debug, Error)]
pub enum SeedError {
    #[error("not authorized to seed: {0}")]
    Auth(String),
    #[error("conflicting seed in progress: {0}; re-run the seed, it is safe to repeat")]
    Conflict(String),
    #[error("document rejected: {}", .0.join("; "))]
    Rejected(Vec<String>),
    #[error("cannot reach {url}: {message}; check the address and that the service is running, then retry")]
    Network { url: String, message: String },
    #[error("service error {status}: {detail}; retry later")]
    Server { status: u16, detail: String },
    #[error("unexpected response: {0}")]
    Protocol(String),
}

impl SeedError {
    pub fn code(&self) -> &'static str {
        match self {
            Self::Auth(_) => "E_AUTH",
            Self::Conflict(_) => "E_CONFLICT",
            Self::Rejected(_) => "E_VALIDATION",
            Self::Network { .. } => "E_NETWORK",
            Self::Server { .. } => "E_SERVER",
            Self::Protocol(_) => "E_PROTOCOL",
        }
    }

    /// Whether the failure lies in transport rather than in the request.
    pub fn is_transport(&self) -> bool {
        matches!(self, Self::Network { .. } | Self::Server { .. } | Self::Protocol(_))
    }
}

#[derive(Deserialize)]
struct ErrorObject {
    #[serde(default)]
    code: String,
    #[serde(default)]
    detail: String,
}

#[derive(Deserialize)]
struct ErrorDocument {
    errors: Vec<ErrorObject>,
}

#[derive(Deserialize)]
struct ResourceObject {
    id: String,
    attributes: SeedAttributes,
}

#[derive(Deserialize)]
struct SeedAttributes {
    action: ema_core::model::SeedAction,
    new_version: u32,
}

#[derive(Deserialize)]
struct ResultDocument {
    data: Vec<ResourceObject>,
}

pub fn seed(api: &str, token: &str, doc: &QuestionnaireDocument) -> Result<Vec<SeedResult>, SeedError> {
    let url = format!("{}/api/v1/questionnaires", api.trim_end_matches('/'));
    let network = |e: reqwest::Error| SeedError::Network { url: url.clone(), message: e.to_string() };
    let client = Client::builder().timeout(Duration::from_secs(60)).build().map_err(network)?;
    let body = json!({ "data": { "type": "questionnaire-documents", "attributes": doc } });
    let resp = client
        .put(&url)
        .bearer_auth(token)
        .header(reqwest::header::CONTENT_TYPE, MEDIA_TYPE)
        .header(reqwest::header::ACCEPT, MEDIA_TYPE)
        .body(body.to_string())
        .send()
        .map_err(network)?;
    let status = resp.status();
    let text = resp.text().map_err(network)?;

    if status.is_success() {
        let parsed: ResultDocument =
            serde_json::from_str(&text).map_err(|e| SeedError::Protocol(format!("{e} in `{text}`")))?;
        return Ok(parsed
            .data
            .into_iter()
            .map(|r| SeedResult { action: r.attributes.action, questionnaire_id: r.id, new_version: r.attributes.new_version })
            .collect());
    }

    let details: Vec<String> = serde_json::from_str::<ErrorDocument>(&text)
        .map(|d| d.errors.into_iter().map(|e| format!("{} {}", e.code, e.detail).trim().to_string()).collect())
        .unwrap_or_else(|_| vec![text.clone()]);
    let joined = details.join("; ");
    Err(match status {
        StatusCode::UNAUTHORIZED | StatusCode::FORBIDDEN => SeedError::Auth(joined),
        StatusCode::CONFLICT => SeedError::Conflict(joined),
        s if s.is_client_error() => SeedError::Rejected(details),
        s => SeedError::Server { status: s.as_u16(), detail: joined },
    })
}
