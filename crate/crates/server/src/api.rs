//! Request handlers and the router.

use std::collections::BTreeSet;

use axum::extract::State;
use axum::http::{Method, StatusCode};
use axum::routing::{get, post, put, MethodRouter};
use axum::Router;
use ema_core::feedback::{compile_all, evaluate, Evaluation, RuleError};
use ema_core::model::{Answers, Questionnaire, QuestionnaireDocument, QuestionnaireKind, SeedAction, SeedResult, Study};
use ema_core::schedule::{activate, ScheduleError};
use ema_core::sensing::{coarsen_location, UsageReport};
use ema_core::time::{format_rfc3339, parse_rfc3339, EpochMillis};
use ema_core::validate::{validate_answers, validate_document};
use serde::Deserialize;
use serde_json::{json, Value};
use uuid::Uuid;

use crate::auth::{hash_token, new_token, MaybePrincipal, Principal};
use crate::jsonapi::{identifier, relate, resource, ApiError, Body, Document, MaybeBody, Params, PathParams};
use crate::state::AppState;
use crate::stats::compute_summary;
use crate::store::{Answersheet, Device, HistoryAction, Role, Store, Subscription, User};

type ApiResult = Result<Document, ApiError>;

/// `{"data": {...}}` request document.
#[derive(Debug, Deserialize)]
struct Doc<T> {
    data: ResourceIn<T>,
}

#[derive(Debug, Deserialize)]
struct ResourceIn<T> {
    #[serde(rename = "type")]
    kind: String,
    attributes: Option<T>,
    #[serde(default)]
    relationships: Value,
}

impl<T> ResourceIn<T> {
    fn require_attributes(self) -> Result<T, ApiError> {
        self.attributes
            .ok_or_else(|| ApiError::unprocessable("E_VALIDATION", "resource has no attributes").pointer("/data"))
    }
}

impl<T> Doc<T> {
    fn expect_type(self, kind: &str) -> Result<ResourceIn<T>, ApiError> {
        if self.data.kind != kind {
            return Err(ApiError::new(
                StatusCode::CONFLICT,
                "E_CONFLICT",
                format!("expected resource type `{kind}`, got `{}`", self.data.kind),
            )
            .pointer("/data/type"));
        }
        Ok(self.data)
    }
}

fn new_id() -> String {
    Uuid::new_v4().to_string()
}

// resources

fn study_resource(study: &Study) -> Value {
    let attributes = json!({
        "names": study.names,
        "description": study.description,
        "languages": study.languages,
        "schedule_spec": study.schedule_spec,
    });
    let refs: Vec<Value> = study.questionnaire_refs.iter().map(|q| identifier("questionnaires", q)).collect();
    relate(resource("studies", &study.study_id, attributes), "questionnaires", Value::Array(refs))
}

fn questionnaire_resource(q: &Questionnaire) -> Value {
    let mut attributes = serde_json::to_value(q).expect("questionnaires serialize");
    if let Some(obj) = attributes.as_object_mut() {
        obj.remove("id");
    }
    relate(resource("questionnaires", &q.id, attributes), "study", identifier("studies", &q.study_id))
}

fn answersheet_resource(a: &Answersheet) -> Value {
    let attributes = json!({
        "client_submission_id": a.client_submission_id,
        "questionnaire_id": a.questionnaire_id,
        "version": a.version,
        "kind": a.kind,
        "language": a.language,
        "answers": a.answers,
        "sensing": a.sensing,
        "location": a.location,
        "device": a.device,
        "submitted_at": format_rfc3339(a.submitted_at),
        "client_created_at": a.client_created_at.map(format_rfc3339),
        "rule_set_version": a.rule_set_version,
    });
    let r = resource("answersheets", &a.id, attributes);
    let r = relate(r, "questionnaire", identifier("questionnaires", &a.questionnaire_id));
    let r = relate(r, "study", identifier("studies", &a.study_id));
    relate(r, "evaluation", identifier("evaluations", &a.id))
}

fn evaluation_resource(a: &Answersheet, lang: &str, evaluation: &Evaluation) -> Value {
    let attributes = json!({
        "language": lang,
        "rule_set_version": a.rule_set_version,
        "fired": evaluation.fired,
    });
    relate(resource("evaluations", &a.id, attributes), "answersheet", identifier("answersheets", &a.id))
}

fn subscription_resource(s: &Subscription) -> Value {
    let attributes = json!({ "study_id": s.study_id, "subscribed_at": format_rfc3339(s.subscribed_at) });
    let r = resource("subscriptions", &s.id, attributes);
    let r = relate(r, "user", identifier("users", &s.user_id));
    relate(r, "study", identifier("studies", &s.study_id))
}

// design-time reads

async fn health() -> Document {
    Document::ok(resource("health", "ema", json!({ "status": "ok" })))
}

async fn list_studies(State(state): State<AppState>, _: MaybePrincipal) -> ApiResult {
    let studies = state.store().studies()?;
    Ok(Document::ok(Value::Array(studies.iter().map(study_resource).collect())))
}

fn require_study(store: &Store, id: &str) -> Result<Study, ApiError> {
    store.study(id)?.ok_or_else(|| ApiError::not_found(format!("no study `{id}`")))
}

async fn get_study(State(state): State<AppState>, _: MaybePrincipal, PathParams(id): PathParams<String>) -> ApiResult {
    Ok(Document::ok(study_resource(&require_study(&state.store(), &id)?)))
}

#[derive(Debug, Default, Deserialize)]
struct LangQuery {
    lang: Option<String>,
    version: Option<u32>,
}

/// The requested language, or the study's primary language.
fn pick_language(study: &Study, lang: Option<&str>) -> Result<String, ApiError> {
    match lang {
        Some(l) if study.languages.iter().any(|s| s == l) => Ok(l.to_string()),
        Some(l) => Err(ApiError::new(
            StatusCode::BAD_REQUEST,
            "E_BAD_LANG",
            format!("study `{}` is not offered in `{l}`; available: {}", study.study_id, study.languages.join(", ")),
        )
        .parameter("lang")),
        None => study
            .languages
            .first()
            .cloned()
            .ok_or_else(|| ApiError::internal(format!("study `{}` has no languages", study.study_id))),
    }
}

async fn study_questionnaires(
    State(state): State<AppState>,
    _: MaybePrincipal,
    PathParams(id): PathParams<String>,
    Params(query): Params<LangQuery>,
) -> ApiResult {
    let store = state.store();
    let study = require_study(&store, &id)?;
    let lang = pick_language(&study, query.lang.as_deref())?;
    let mut data = Vec::new();
    for qid in &study.questionnaire_refs {
        let Some(v) = store.latest_version(qid)? else { continue };
        if let Some(q) = store.questionnaire(qid, v, &lang)? {
            data.push(questionnaire_resource(&q));
        }
    }
    Ok(Document::ok(Value::Array(data)))
}

async fn get_questionnaire(
    State(state): State<AppState>,
    _: MaybePrincipal,
    PathParams(id): PathParams<String>,
    Params(query): Params<LangQuery>,
) -> ApiResult {
    let store = state.store();
    let missing = || ApiError::not_found(format!("no questionnaire `{id}`"));
    let latest = store.latest_version(&id)?.ok_or_else(missing)?;
    let version = query.version.unwrap_or(latest);
    let variants = store.variants(&id, version)?;
    let any = variants
        .values()
        .next()
        .ok_or_else(|| ApiError::not_found(format!("questionnaire `{id}` has no version {version}")).parameter("version"))?;
    let study = require_study(&store, &any.study_id)?;
    let lang = pick_language(&study, query.lang.as_deref())?;
    let q = variants
        .get(&lang)
        .ok_or_else(|| ApiError::not_found(format!("`{id}` v{version} has no `{lang}` variant")).parameter("lang"))?;
    Ok(Document::ok(questionnaire_resource(q)))
}

// users

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct UserAttributes {
    role: Option<Role>,
    #[serde(default)]
    studies: Vec<String>,
}

/// Anonymous login, or creation of a collaborator by an administrator.
async fn create_user(
    State(state): State<AppState>,
    MaybePrincipal(caller): MaybePrincipal,
    MaybeBody(body): MaybeBody<Doc<UserAttributes>>,
) -> ApiResult {
    let attrs = match body {
        Some(doc) => doc.expect_type("users")?.attributes.unwrap_or_default(),
        None => UserAttributes::default(),
    };
    let role = attrs.role.unwrap_or(Role::Participant);
    if role != Role::Participant && !caller.as_ref().is_some_and(Principal::is_admin) {
        return Err(ApiError::forbidden(format!("only administrators may create {role} accounts")).pointer("/data/attributes/role"));
    }
    let now = state.now();
    let token = new_token();
    let user = User {
        id: new_id(),
        role,
        studies: if role == Role::Collaborator { attrs.studies } else { Vec::new() },
        verified: false,
        created_at: now,
    };
    state.store().atomically(|s| -> Result<(), ApiError> {
        s.insert_user(&user, &hash_token(&token))?;
        s.append_history(&user.id, HistoryAction::Login, now, role.as_str())?;
        Ok(())
    })?;
    let mut attributes = json!({ "token": token, "created_at": format_rfc3339(now) });
    if role != Role::Participant {
        attributes["role"] = json!(role);
        attributes["studies"] = json!(user.studies);
    }
    Ok(Document::ok(resource("users", &user.id, attributes)).status(StatusCode::CREATED))
}

// subscriptions

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SubscriptionAttributes {
    study_id: Option<String>,
}

async fn subscribe(
    State(state): State<AppState>,
    principal: Principal,
    Body(doc): Body<Doc<SubscriptionAttributes>>,
) -> ApiResult {
    let data = doc.expect_type("subscriptions")?;
    let study_id = data
        .attributes
        .and_then(|a| a.study_id)
        .or_else(|| data.relationships["study"]["data"]["id"].as_str().map(str::to_string))
        .ok_or_else(|| ApiError::unprocessable("E_VALIDATION", "study_id is required").pointer("/data/attributes/study_id"))?;
    let now = state.now();
    let (sub, created) = state.store().atomically(|s| -> Result<_, ApiError> {
        if s.study(&study_id)?.is_none() {
            return Err(ApiError::not_found(format!("no study `{study_id}`")).pointer("/data/attributes/study_id"));
        }
        if let Some(existing) = s.subscription(&principal.user_id, &study_id)? {
            return Ok((existing, false));
        }
        let sub = Subscription { id: new_id(), user_id: principal.user_id.clone(), study_id: study_id.clone(), subscribed_at: now };
        s.insert_subscription(&sub)?;
        s.append_history(&principal.user_id, HistoryAction::Subscribe, now, &study_id)?;
        Ok((sub, true))
    })?;
    let status = if created { StatusCode::CREATED } else { StatusCode::OK };
    Ok(Document::ok(subscription_resource(&sub)).status(status))
}

// answersheets

#[derive(Debug, Deserialize)]
struct RawLocation {
    lat: f64,
    lon: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SubmitAttributes {
    client_submission_id: String,
    questionnaire_id: String,
    version: Option<u32>,
    language: Option<String>,
    answers: Answers,
    #[serde(default)]
    sensing: Option<UsageReport>,
    #[serde(default)]
    location: Option<RawLocation>,
    device: Device,
    #[serde(default)]
    client_created_at: Option<String>,
}

const ATTR: &str = "/data/attributes";

/// Feedback for a stored answersheet from the rule set it was submitted
/// against. Rules that mention variables outside the questionnaire are
/// skipped.
fn evaluate_sheet(store: &Store, sheet: &Answersheet, lang: &str) -> Result<Evaluation, ApiError> {
    let Some(version) = sheet.rule_set_version else {
        return Ok(Evaluation { answersheet_id: Some(sheet.id.clone()), fired: Vec::new() });
    };
    let specs = store
        .rules(&sheet.study_id, version)?
        .ok_or_else(|| ApiError::internal(format!("rule set {version} of `{}` is missing", sheet.study_id)))?;
    let rules = compile_all(&specs).map_err(|e| ApiError::internal(format!("stored rule does not compile: {e}")))?;
    let q = store
        .questionnaire(&sheet.questionnaire_id, sheet.version, &sheet.language)?
        .ok_or_else(|| ApiError::internal(format!("questionnaire `{}` v{} is missing", sheet.questionnaire_id, sheet.version)))?;
    let variables: BTreeSet<&str> = q.questions().map(|q| q.variable.as_str()).collect();
    let applicable: Vec<_> =
        rules.into_iter().filter(|r| r.condition.variables().iter().all(|v| variables.contains(v))).collect();
    let mut evaluation = evaluate(&applicable, &sheet.answers, lang).map_err(|e| match e {
        RuleError::LangMissing { .. } => ApiError::unprocessable(e.code(), e.to_string()),
        other => ApiError::internal(other.to_string()),
    })?;
    evaluation.answersheet_id = Some(sheet.id.clone());
    Ok(evaluation)
}

fn sheet_document(store: &Store, sheet: &Answersheet, status: StatusCode) -> ApiResult {
    let evaluation = evaluate_sheet(store, sheet, &sheet.language)?;
    Ok(Document::ok(answersheet_resource(sheet))
        .include(evaluation_resource(sheet, &sheet.language, &evaluation))
        .status(status))
}

fn build_answersheet(
    store: &Store,
    user_id: &str,
    attrs: SubmitAttributes,
    now: EpochMillis,
    tracked: Option<&BTreeSet<String>>,
) -> Result<(Answersheet, Subscription), ApiError> {
    let qid = attrs.questionnaire_id;
    let unknown = || {
        ApiError::unprocessable("E_UNKNOWN_QUESTIONNAIRE", format!("no questionnaire `{qid}`"))
            .pointer(format!("{ATTR}/questionnaire_id"))
    };
    let latest = store.latest_version(&qid)?.ok_or_else(unknown)?;
    let version = attrs.version.unwrap_or(latest);
    let variants = store.variants(&qid, version)?;
    let any = variants.values().next().ok_or_else(|| {
        ApiError::unprocessable("E_UNKNOWN_VERSION", format!("`{qid}` has no version {version}"))
            .pointer(format!("{ATTR}/version"))
    })?;
    let study = require_study(store, &any.study_id)?;
    let language = match attrs.language {
        Some(l) => l,
        None => study.languages.first().cloned().unwrap_or_default(),
    };
    let q = variants.get(&language).ok_or_else(|| {
        ApiError::unprocessable("E_BAD_LANG", format!("`{qid}` v{version} is not available in `{language}`"))
            .pointer(format!("{ATTR}/language"))
    })?;

    let issues = validate_answers(q, &attrs.answers);
    if !issues.is_empty() {
        return Err(ApiError::from_issues(&issues, &format!("{ATTR}/answers")));
    }
    if let Some(report) = &attrs.sensing {
        let mut problems = report.problems();
        if let Some(tracked) = tracked {
            problems.extend(
                report
                    .apps
                    .iter()
                    .chain(&report.top5_apps)
                    .filter(|a| !tracked.contains(&a.package_name))
                    .map(|a| format!("`{}` is not a tracked package", a.package_name)),
            );
        }
        if !problems.is_empty() {
            return Err(ApiError::unprocessable("E_SENSING", problems.join("; ")).pointer(format!("{ATTR}/sensing")));
        }
    }
    let location = attrs
        .location
        .map(|l| coarsen_location(l.lat, l.lon))
        .transpose()
        .map_err(|e| ApiError::unprocessable(e.code(), e.to_string()).pointer(format!("{ATTR}/location")))?;
    let client_created_at = attrs
        .client_created_at
        .as_deref()
        .map(parse_rfc3339)
        .transpose()
        .map_err(|e| ApiError::unprocessable("E_BAD_TIME", e.to_string()).pointer(format!("{ATTR}/client_created_at")))?;
    let subscription = store.subscription(user_id, &study.study_id)?.ok_or_else(|| {
        ApiError::unprocessable("E_NO_SUBSCRIPTION", format!("not subscribed to study `{}`", study.study_id))
            .pointer(format!("{ATTR}/questionnaire_id"))
    })?;
    let rule_set_version = store.latest_rules(&study.study_id)?.map(|(v, _)| v);
    let sheet = Answersheet {
        id: new_id(),
        client_submission_id: attrs.client_submission_id,
        user_id: user_id.to_string(),
        study_id: study.study_id.clone(),
        questionnaire_id: qid.clone(),
        version,
        kind: q.kind,
        language,
        answers: attrs.answers,
        sensing: attrs.sensing,
        location,
        device: attrs.device,
        submitted_at: now,
        client_created_at,
        rule_set_version,
    };
    Ok((sheet, subscription))
}

/// Stores an answersheet exactly once per client submission id. A replay by
/// the same user returns the original with status 200.
async fn submit(State(state): State<AppState>, principal: Principal, Body(doc): Body<Doc<SubmitAttributes>>) -> ApiResult {
    let attrs = doc.expect_type("answersheets")?.require_attributes()?;
    for (field, value) in [("client_submission_id", &attrs.client_submission_id), ("questionnaire_id", &attrs.questionnaire_id)] {
        if value.trim().is_empty() {
            return Err(ApiError::unprocessable("E_VALIDATION", format!("{field} is required")).pointer(format!("{ATTR}/{field}")));
        }
    }
    let now = state.now();
    let offset = state.offset();
    state.store().atomically(|s| {
        if let Some(existing) = s.answersheet_by_submission(&attrs.client_submission_id)? {
            if existing.user_id != principal.user_id {
                return Err(ApiError::forbidden("client_submission_id was used by another user")
                    .pointer(format!("{ATTR}/client_submission_id")));
            }
            return sheet_document(s, &existing, StatusCode::OK);
        }
        let (sheet, subscription) = build_answersheet(s, &principal.user_id, attrs, now, state.tracked_packages())?;
        s.insert_answersheet(&sheet)?;
        match sheet.kind {
            QuestionnaireKind::Baseline => {
                if s.plan(&subscription.id)?.is_none() {
                    let study = require_study(s, &sheet.study_id)?;
                    s.save_plan(&activate(&subscription.id, now, study.schedule_spec, offset))?;
                }
            }
            QuestionnaireKind::Followup => {
                if let Some(mut plan) = s.plan(&subscription.id)? {
                    match plan.record_fillout(sheet.client_created_at.unwrap_or(now)) {
                        Ok(()) => s.save_plan(&plan)?,
                        // a fill-out from before the baseline answers no tick
                        Err(ScheduleError::BeforeActivation { .. }) => {}
                        Err(e) => return Err(ApiError::internal(e.to_string())),
                    }
                }
            }
        }
        s.append_history(&principal.user_id, HistoryAction::Submit, now, &sheet.questionnaire_id)?;
        sheet_document(s, &sheet, StatusCode::CREATED)
    })
}

#[derive(Debug, Default, Deserialize)]
struct EvalQuery {
    lang: Option<String>,
}

async fn get_evaluation(
    State(state): State<AppState>,
    principal: Principal,
    PathParams(id): PathParams<String>,
    Params(query): Params<EvalQuery>,
) -> ApiResult {
    let store = state.store();
    let sheet = store
        .answersheet(&id)?
        .filter(|a| a.user_id == principal.user_id || principal.is_admin())
        .ok_or_else(|| ApiError::not_found(format!("no answersheet `{id}`")))?;
    let lang = match query.lang {
        Some(l) => pick_language(&require_study(&store, &sheet.study_id)?, Some(&l))?,
        None => sheet.language.clone(),
    };
    let evaluation = evaluate_sheet(&store, &sheet, &lang)?;
    Ok(Document::ok(evaluation_resource(&sheet, &lang, &evaluation)))
}

// notifications

#[derive(Debug, Default, Deserialize)]
struct NowQuery {
    now: Option<String>,
}

/// Follow-up notifications due for a user. Reading them changes nothing.
async fn notifications(
    State(state): State<AppState>,
    principal: Principal,
    PathParams(user_id): PathParams<String>,
    Params(query): Params<NowQuery>,
) -> ApiResult {
    if principal.user_id != user_id && !principal.is_admin() {
        return Err(ApiError::forbidden("notifications of other users are not visible"));
    }
    let now = match query.now.as_deref() {
        Some(t) => parse_rfc3339(t).map_err(|e| ApiError::bad_request(e.to_string()).parameter("now"))?,
        None => state.now(),
    };
    let store = state.store();
    if store.user(&user_id)?.is_none() {
        return Err(ApiError::not_found(format!("no user `{user_id}`")));
    }
    let mut data = Vec::new();
    for sub in store.subscriptions_of(&user_id)? {
        let Some(plan) = store.plan(&sub.id)? else { continue };
        let due = plan.due_notifications(now);
        if due.is_empty() {
            continue;
        }
        let study = require_study(&store, &sub.study_id)?;
        let mut followup = None;
        for qid in &study.questionnaire_refs {
            let Some(v) = store.latest_version(qid)? else { continue };
            if store.variants(qid, v)?.values().any(|q| q.kind == QuestionnaireKind::Followup) {
                followup = Some(qid.clone());
                break;
            }
        }
        for tick in due {
            let attributes = json!({
                "study_id": sub.study_id,
                "questionnaire_id": followup,
                "due_at": format_rfc3339(tick),
            });
            let r = resource("notifications", &format!("{}:{tick}", sub.id), attributes);
            data.push(relate(r, "subscription", identifier("subscriptions", &sub.id)));
        }
    }
    Ok(Document::ok(Value::Array(data)))
}

// seeding

/// Per questionnaire id: unchanged when every language variant has the same
/// content as the latest stored version, otherwise a new version. The rule
/// set is versioned the same way.
fn seed_document(store: &mut Store, doc: &QuestionnaireDocument) -> Result<(Vec<SeedResult>, Option<u32>), ApiError> {
    store.atomically(|s| {
        s.put_study(&doc.study())?;
        let mut results = Vec::new();
        for qid in doc.questionnaire_ids() {
            let incoming = doc.variants(qid);
            let latest = s.latest_version(qid)?;
            let (action, version) = match latest {
                None => (SeedAction::Created, 1),
                Some(v) => {
                    let stored = s.variants(qid, v)?;
                    let same = stored.len() == incoming.len()
                        && incoming
                            .iter()
                            .all(|(lang, q)| stored.get(lang).is_some_and(|old| old.content_bytes() == q.content_bytes()));
                    if same {
                        (SeedAction::Unchanged, v)
                    } else {
                        (SeedAction::Versioned, v + 1)
                    }
                }
            };
            if action != SeedAction::Unchanged {
                for q in incoming.values() {
                    let mut q = (*q).clone();
                    q.version = version;
                    s.insert_questionnaire(&q)?;
                }
            }
            results.push(SeedResult { action, questionnaire_id: qid.to_string(), new_version: version });
        }
        let study_id = &doc.meta.study_id;
        let rule_version = match s.latest_rules(study_id)? {
            Some((v, rules)) if rules == doc.feedback => Some(v),
            Some((v, _)) => {
                s.insert_rules(study_id, v + 1, &doc.feedback)?;
                Some(v + 1)
            }
            None if doc.feedback.is_empty() => None,
            None => {
                s.insert_rules(study_id, 1, &doc.feedback)?;
                Some(1)
            }
        };
        Ok((results, rule_version))
    })
}

async fn seed(
    State(state): State<AppState>,
    principal: Principal,
    Body(doc): Body<Doc<QuestionnaireDocument>>,
) -> ApiResult {
    let data = doc.expect_type("questionnaire-documents")?;
    let document = data.require_attributes()?;
    if !principal.may_seed(&document.meta.study_id) {
        return Err(ApiError::forbidden(format!("{} may not seed study `{}`", principal.role, document.meta.study_id)));
    }
    let report = validate_document(&document);
    if !report.is_valid() {
        return Err(ApiError::from_issues(&report.errors, ATTR));
    }
    let (results, rule_version) = seed_document(&mut state.store(), &document)?;
    let data = results
        .iter()
        .map(|r| {
            let attributes = json!({ "action": r.action, "new_version": r.new_version });
            resource("seed-results", &r.questionnaire_id, attributes)
        })
        .collect();
    Ok(Document::ok(Value::Array(data)).meta(json!({ "rule_set_version": rule_version })))
}

// statistics

async fn stats(State(state): State<AppState>, principal: Principal) -> ApiResult {
    if !principal.is_admin() {
        return Err(ApiError::forbidden("statistics are restricted to administrators"));
    }
    let summary = compute_summary(&state.store())?;
    let mut data = vec![resource("stats", "all", json!(summary.global))];
    data.extend(summary.studies.iter().map(|(id, s)| resource("stats", id, json!(s))));
    let meta = json!({ "users_total": summary.users_total, "history_entries": summary.history_entries });
    Ok(Document::ok(Value::Array(data)).meta(meta))
}

// fallbacks

async fn not_found() -> ApiError {
    ApiError::not_found("no such endpoint")
}

async fn method_not_allowed(method: Method) -> ApiError {
    ApiError::new(StatusCode::METHOD_NOT_ALLOWED, "E_METHOD", format!("{method} is not supported here"))
}

/// Studies and questionnaires are read-only through the participant API.
async fn read_only(method: Method) -> ApiError {
    if method == Method::GET || method == Method::HEAD {
        return method_not_allowed(method).await;
    }
    ApiError::forbidden("design-time resources are read-only")
}

fn design_time(route: MethodRouter<AppState>) -> MethodRouter<AppState> {
    route.fallback(read_only)
}

fn run_time(route: MethodRouter<AppState>) -> MethodRouter<AppState> {
    route.fallback(method_not_allowed)
}

pub fn router(state: AppState) -> Router {
    let api = Router::new()
        .route("/health", run_time(get(health)))
        .route("/users", run_time(post(create_user)))
        .route("/users/{id}/notifications", run_time(get(notifications)))
        .route("/studies", design_time(get(list_studies)))
        .route("/studies/{id}", design_time(get(get_study)))
        .route("/studies/{id}/questionnaires", design_time(get(study_questionnaires)))
        .route("/questionnaires", design_time(put(seed)))
        .route("/questionnaires/{id}", design_time(get(get_questionnaire)))
        .route("/subscriptions", run_time(post(subscribe)))
        .route("/answersheets", run_time(post(submit)))
        .route("/answersheets/{id}/evaluation", run_time(get(get_evaluation)))
        .route("/stats", run_time(get(stats)));
    Router::new().nest("/api/v1", api).fallback(not_found).with_state(state)
}
