//! Bearer tokens. Only SHA-256 digests of tokens are stored.

use axum::extract::FromRequestParts;
use axum::http::header::AUTHORIZATION;
use axum::http::request::Parts;
use sha2::{Digest, Sha256};
use uuid::Uuid;

use crate::jsonapi::ApiError;
use crate::state::AppState;
use crate::store::Role;

pub fn hash_token(token: &str) -> String {
    hex::encode(Sha256::digest(token.as_bytes()))
}

pub fn new_token() -> String {
    format!("{}{}", Uuid::new_v4().simple(), Uuid::new_v4().simple())
}

/// The authenticated caller.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Principal {
    pub user_id: String,
    pub role: Role,
    pub studies: Vec<String>,
}

pub const ADMIN_ID: &str = "admin";

impl Principal {
    pub fn is_admin(&self) -> bool {
        self.role == Role::Admin
    }

    pub fn may_seed(&self, study_id: &str) -> bool {
        match self.role {
            Role::Admin => true,
            Role::Collaborator => self.studies.iter().any(|s| s == study_id),
            Role::Participant => false,
        }
    }
}

fn bearer(parts: &Parts) -> Result<Option<&str>, ApiError> {
    let Some(value) = parts.headers.get(AUTHORIZATION) else {
        return Ok(None);
    };
    let value = value.to_str().map_err(|_| ApiError::unauthorized("malformed Authorization header"))?;
    match value.split_once(' ') {
        Some((scheme, token)) if scheme.eq_ignore_ascii_case("bearer") && !token.trim().is_empty() => Ok(Some(token.trim())),
        _ => Err(ApiError::unauthorized("expected `Authorization: Bearer <token>`")),
    }
}

/// Resolves a token. The first successful use of a participant token marks
/// the user verified.
fn resolve(state: &AppState, token: &str) -> Result<Principal, ApiError> {
    let hash = hash_token(token);
    if state.admin_token_hash().is_some_and(|h| h == hash) {
        return Ok(Principal { user_id: ADMIN_ID.into(), role: Role::Admin, studies: Vec::new() });
    }
    let store = state.store();
    let user = store.user_by_token_hash(&hash)?.ok_or_else(|| ApiError::unauthorized("unknown token"))?;
    if !user.verified {
        store.mark_verified(&user.id)?;
    }
    Ok(Principal { user_id: user.id, role: user.role, studies: user.studies })
}

impl FromRequestParts<AppState> for Principal {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &AppState) -> Result<Self, Self::Rejection> {
        let token = bearer(parts)?.ok_or_else(|| ApiError::unauthorized("this endpoint requires a bearer token"))?;
        resolve(state, token)
    }
}

/// A caller that may be anonymous. A present but invalid token is still
/// rejected.
pub struct MaybePrincipal(pub Option<Principal>);

impl FromRequestParts<AppState> for MaybePrincipal {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &AppState) -> Result<Self, Self::Rejection> {
        match bearer(parts)? {
            Some(token) => resolve(state, token).map(|p| MaybePrincipal(Some(p))),
            None => Ok(MaybePrincipal(None)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_is_sha256_hex() {
        assert_eq!(hash_token("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    #[test]
    fn tokens_are_long_and_distinct() {
        let (a, b) = (new_token(), new_token());
        assert_eq!(a.len(), 64);
        assert_ne!(a, b);
    }

    #[test]
    fn seeding_rights() {
        let collab = Principal { user_id: "c".into(), role: Role::Collaborator, studies: vec!["mood".into()] };
        assert!(collab.may_seed("mood") && !collab.may_seed("work"));
        let p = Principal { user_id: "p".into(), role: Role::Participant, studies: vec!["mood".into()] };
        assert!(!p.may_seed("mood"));
    }
}
