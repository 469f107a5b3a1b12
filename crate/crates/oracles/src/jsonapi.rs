//! A response validator for JSON:API top-level documents, written against
//! the JSON:API 1.1 rules without reference to the server's own types.

use serde_json::{Map, Value};

pub const MEDIA_TYPE: &str = "application/vnd.api+json";

fn check_identifier(v: &Value, at: &str) -> Result<(), String> {
    let obj = v.as_object().ok_or(format!("{at}: resource identifier is not an object"))?;
    for member in ["type", "id"] {
        match obj.get(member) {
            Some(Value::String(s)) if !s.is_empty() => {}
            _ => return Err(format!("{at}: missing or empty `{member}`")),
        }
    }
    Ok(())
}

fn check_resource(v: &Value, at: &str) -> Result<(), String> {
    check_identifier(v, at)?;
    let obj = v.as_object().expect("checked above");
    for key in obj.keys() {
        if !matches!(key.as_str(), "type" | "id" | "attributes" | "relationships" | "links" | "meta") {
            return Err(format!("{at}: unexpected member `{key}`"));
        }
    }
    if let Some(attrs) = obj.get("attributes") {
        let attrs = attrs.as_object().ok_or(format!("{at}: attributes is not an object"))?;
        for reserved in ["type", "id", "relationships", "links"] {
            if attrs.contains_key(reserved) {
                return Err(format!("{at}: attributes contain reserved `{reserved}`"));
            }
        }
    }
    if let Some(rels) = obj.get("relationships") {
        let rels = rels.as_object().ok_or(format!("{at}: relationships is not an object"))?;
        for (name, rel) in rels {
            let rel = rel.as_object().ok_or(format!("{at}/relationships/{name}: not an object"))?;
            let data = rel.get("data").ok_or(format!("{at}/relationships/{name}: no data"))?;
            match data {
                Value::Null => {}
                Value::Array(items) => {
                    for (i, item) in items.iter().enumerate() {
                        check_identifier(item, &format!("{at}/relationships/{name}/data/{i}"))?;
                    }
                }
                other => check_identifier(other, &format!("{at}/relationships/{name}/data"))?,
            }
        }
    }
    Ok(())
}

fn check_primary(data: &Value) -> Result<(), String> {
    match data {
        Value::Null => Ok(()),
        Value::Array(items) => items.iter().enumerate().try_for_each(|(i, r)| check_resource(r, &format!("/data/{i}"))),
        other => check_resource(other, "/data"),
    }
}

fn check_errors(status: u16, errors: &Value) -> Result<(), String> {
    let errors = errors.as_array().ok_or("errors is not an array")?;
    if errors.is_empty() {
        return Err("errors is empty".into());
    }
    for (i, e) in errors.iter().enumerate() {
        let e: &Map<String, Value> = e.as_object().ok_or(format!("/errors/{i} is not an object"))?;
        match e.get("status") {
            Some(Value::String(s)) if s.parse::<u16>().ok() == Some(status) => {}
            other => return Err(format!("/errors/{i}: status {other:?} does not match HTTP {status}")),
        }
        if !e.get("code").is_some_and(Value::is_string) {
            return Err(format!("/errors/{i}: no code"));
        }
        if let Some(source) = e.get("source") {
            let pointer = source.get("pointer");
            if pointer.is_some_and(|p| !p.as_str().is_some_and(|p| p.is_empty() || p.starts_with('/'))) {
                return Err(format!("/errors/{i}: pointer is not a JSON pointer"));
            }
        }
    }
    Ok(())
}

/// Checks one response. `content_type` is the raw header value.
pub fn validate(status: u16, content_type: Option<&str>, body: &Value) -> Result<(), String> {
    if content_type != Some(MEDIA_TYPE) {
        return Err(format!("content type {content_type:?}"));
    }
    let top = body.as_object().ok_or("top level is not an object")?;
    match (top.get("data"), top.get("errors")) {
        (Some(_), Some(_)) => return Err("both data and errors".into()),
        (None, None) => return Err("neither data nor errors".into()),
        (Some(data), None) => {
            if status >= 400 {
                return Err(format!("data with HTTP {status}"));
            }
            check_primary(data)?;
        }
        (None, Some(errors)) => {
            if status < 400 {
                return Err(format!("errors with HTTP {status}"));
            }
            check_errors(status, errors)?;
        }
    }
    if let Some(included) = top.get("included") {
        if top.get("data").is_none() {
            return Err("included without data".into());
        }
        let items = included.as_array().ok_or("included is not an array")?;
        for (i, r) in items.iter().enumerate() {
            check_resource(r, &format!("/included/{i}"))?;
        }
    }
    for key in top.keys() {
        if !matches!(key.as_str(), "data" | "errors" | "meta" | "jsonapi" | "links" | "included") {
            return Err(format!("unexpected top-level member `{key}`"));
        }
    }
    Ok(())
}
