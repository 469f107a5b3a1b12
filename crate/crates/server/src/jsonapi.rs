//! JSON:API documents, error objects and request extractors that reject
//! with JSON:API errors instead of axum's plain-text rejections.

use axum::body::Bytes;
use axum::extract::{FromRequest, FromRequestParts, Path, Query, Request};
use axum::http::header::CONTENT_TYPE;
use axum::http::request::Parts;
use axum::http::{HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use ema_core::validate::{Issue, Location};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::store::StoreError;

pub const MEDIA_TYPE: &str = "application/vnd.api+json";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorSource {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pointer: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parameter: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorObject {
    pub status: String,
    pub code: String,
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source: Option<ErrorSource>,
}

/// A failed request: one HTTP status and one or more error objects.
#[derive(Debug, Clone, PartialEq)]
pub struct ApiError {
    pub status: StatusCode,
    pub errors: Vec<ErrorObject>,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &str, detail: impl Into<String>) -> Self {
        let object = ErrorObject { status: status.as_u16().to_string(), code: code.into(), detail: detail.into(), source: None };
        Self { status, errors: vec![object] }
    }

    pub fn pointer(mut self, pointer: impl Into<String>) -> Self {
        if let Some(e) = self.errors.last_mut() {
            e.source = Some(ErrorSource { pointer: Some(pointer.into()), parameter: None });
        }
        self
    }

    pub fn parameter(mut self, name: &str) -> Self {
        if let Some(e) = self.errors.last_mut() {
            e.source = Some(ErrorSource { pointer: None, parameter: Some(name.into()) });
        }
        self
    }

    pub fn bad_request(detail: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "E_BAD_REQUEST", detail)
    }

    pub fn unauthorized(detail: impl Into<String>) -> Self {
        Self::new(StatusCode::UNAUTHORIZED, "E_AUTH", detail)
    }

    pub fn forbidden(detail: impl Into<String>) -> Self {
        Self::new(StatusCode::FORBIDDEN, "E_FORBIDDEN", detail)
    }

    pub fn not_found(detail: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, "E_NOT_FOUND", detail)
    }

    pub fn unprocessable(code: &str, detail: impl Into<String>) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, code, detail)
    }

    pub fn internal(detail: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "E_INTERNAL", detail)
    }

    /// One 422 error object per issue. Variable issues point into
    /// `{base}/{variable}`, everything else at `base`.
    pub fn from_issues(issues: &[Issue], base: &str) -> Self {
        let status = StatusCode::UNPROCESSABLE_ENTITY;
        let errors = issues
            .iter()
            .map(|i| {
                let pointer = match &i.location {
                    Location::Variable { variable } => format!("{base}/{variable}"),
                    _ => base.to_string(),
                };
                ErrorObject {
                    status: status.as_u16().to_string(),
                    code: i.code.clone(),
                    detail: i.to_string(),
                    source: Some(ErrorSource { pointer: Some(pointer), parameter: None }),
                }
            })
            .collect();
        Self { status, errors }
    }

    pub fn code(&self) -> &str {
        self.errors.first().map_or("", |e| e.code.as_str())
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        tracing::error!(error = %e, "store failure");
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, e.code(), e.to_string())
    }
}

fn with_media_type(status: StatusCode, body: &Value) -> Response {
    let mut resp = (status, body.to_string()).into_response();
    resp.headers_mut().insert(CONTENT_TYPE, HeaderValue::from_static(MEDIA_TYPE));
    resp
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        with_media_type(self.status, &json!({ "errors": self.errors, "jsonapi": { "version": "1.1" } }))
    }
}

/// A successful top-level document.
#[derive(Debug, Clone)]
pub struct Document {
    pub status: StatusCode,
    pub data: Value,
    pub included: Vec<Value>,
    pub meta: Option<Value>,
}

impl Document {
    pub fn ok(data: Value) -> Self {
        Self { status: StatusCode::OK, data, included: Vec::new(), meta: None }
    }

    pub fn status(mut self, status: StatusCode) -> Self {
        self.status = status;
        self
    }

    pub fn include(mut self, resource: Value) -> Self {
        self.included.push(resource);
        self
    }

    pub fn meta(mut self, meta: Value) -> Self {
        self.meta = Some(meta);
        self
    }

    pub fn to_value(&self) -> Value {
        let mut top = Map::new();
        top.insert("data".into(), self.data.clone());
        if !self.included.is_empty() {
            top.insert("included".into(), Value::Array(self.included.clone()));
        }
        if let Some(m) = &self.meta {
            top.insert("meta".into(), m.clone());
        }
        top.insert("jsonapi".into(), json!({ "version": "1.1" }));
        Value::Object(top)
    }
}

impl IntoResponse for Document {
    fn into_response(self) -> Response {
        with_media_type(self.status, &self.to_value())
    }
}

pub fn resource(kind: &str, id: &str, attributes: Value) -> Value {
    json!({ "type": kind, "id": id, "attributes": attributes })
}

pub fn identifier(kind: &str, id: &str) -> Value {
    json!({ "type": kind, "id": id })
}

/// Adds a `relationships` member to a resource object.
pub fn relate(mut resource: Value, name: &str, data: Value) -> Value {
    if let Some(obj) = resource.as_object_mut() {
        let rels = obj.entry("relationships").or_insert_with(|| json!({}));
        rels[name] = json!({ "data": data });
    }
    resource
}

/// Request body in a JSON:API document. Accepts the JSON:API media type or
/// plain `application/json`.
pub struct Body<T>(pub T);

fn acceptable_content_type(value: Option<&HeaderValue>) -> bool {
    let Some(v) = value.and_then(|v| v.to_str().ok()) else {
        return false;
    };
    let essence = v.split(';').next().unwrap_or("").trim().to_ascii_lowercase();
    essence == MEDIA_TYPE || essence == "application/json"
}

fn parse_body<T: DeserializeOwned>(content_type: Option<&HeaderValue>, bytes: &[u8]) -> Result<T, ApiError> {
    if !acceptable_content_type(content_type) {
        return Err(ApiError::new(
            StatusCode::UNSUPPORTED_MEDIA_TYPE,
            "E_MEDIA_TYPE",
            format!("request bodies must be sent as {MEDIA_TYPE}"),
        ));
    }
    serde_json::from_slice(bytes).map_err(|e| ApiError::bad_request(format!("malformed document: {e}")))
}

impl<S: Send + Sync, T: DeserializeOwned> FromRequest<S> for Body<T> {
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &S) -> Result<Self, Self::Rejection> {
        let content_type = req.headers().get(CONTENT_TYPE).cloned();
        let bytes = Bytes::from_request(req, state).await.map_err(|e| ApiError::bad_request(e.body_text()))?;
        parse_body(content_type.as_ref(), &bytes).map(Body)
    }
}

/// Like [`Body`], but an empty body is allowed.
pub struct MaybeBody<T>(pub Option<T>);

impl<S: Send + Sync, T: DeserializeOwned> FromRequest<S> for MaybeBody<T> {
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &S) -> Result<Self, Self::Rejection> {
        let content_type = req.headers().get(CONTENT_TYPE).cloned();
        let bytes = Bytes::from_request(req, state).await.map_err(|e| ApiError::bad_request(e.body_text()))?;
        if bytes.iter().all(u8::is_ascii_whitespace) {
            return Ok(MaybeBody(None));
        }
        parse_body(content_type.as_ref(), &bytes).map(|v| MaybeBody(Some(v)))
    }
}

/// Query parameters with JSON:API rejections.
pub struct Params<T>(pub T);

impl<S: Send + Sync, T: DeserializeOwned> FromRequestParts<S> for Params<T> {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &S) -> Result<Self, Self::Rejection> {
        Query::<T>::from_request_parts(parts, state)
            .await
            .map(|Query(v)| Params(v))
            .map_err(|e| ApiError::bad_request(e.body_text()))
    }
}

/// Path parameters with JSON:API rejections.
pub struct PathParams<T>(pub T);

impl<S: Send + Sync, T: DeserializeOwned + Send> FromRequestParts<S> for PathParams<T> {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &S) -> Result<Self, Self::Rejection> {
        Path::<T>::from_request_parts(parts, state)
            .await
            .map(|Path(v)| PathParams(v))
            .map_err(|e| ApiError::not_found(e.body_text()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn issues_point_at_variables() {
        let issues = vec![
            Issue::new("E_REQUIRED", Location::Variable { variable: "mood".into() }, "`mood` is required"),
            Issue::new("E_X", Location::Questionnaire, "whole"),
        ];
        let e = ApiError::from_issues(&issues, "/data/attributes/answers");
        assert_eq!(e.status, StatusCode::UNPROCESSABLE_ENTITY);
        let pointers: Vec<_> = e.errors.iter().map(|o| o.source.clone().unwrap().pointer.unwrap()).collect();
        assert_eq!(pointers, ["/data/attributes/answers/mood", "/data/attributes/answers"]);
        assert_eq!(e.errors[0].status, "422");
    }

    #[test]
    fn document_omits_empty_members() {
        let v = Document::ok(json!([])).to_value();
        assert!(v.get("included").is_none() && v.get("meta").is_none());
        assert!(v.get("errors").is_none());
    }

    #[test]
    fn relationships_accumulate() {
        let r = relate(resource("studies", "mood", json!({})), "a", identifier("x", "1"));
        let r = relate(r, "b", json!([]));
        assert_eq!(r["relationships"]["a"]["data"]["id"], "1");
        assert_eq!(r["relationships"]["b"]["data"], json!([]));
    }

    #[test]
    fn content_types() {
        let ok = |s: &'static str| acceptable_content_type(Some(&HeaderValue::from_static(s)));
        assert!(ok("application/vnd.api+json"));
        assert!(ok("application/json; charset=utf-8"));
        assert!(!ok("text/plain"));
        assert!(!acceptable_content_type(None));
    }
}
