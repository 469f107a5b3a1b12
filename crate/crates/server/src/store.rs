//! SQLite persistence. Documents are stored as JSON columns next to the
//! keys the service queries by.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use ema_core::feedback::RuleSpec;
use ema_core::model::{Answers, Questionnaire, QuestionnaireKind, Study};
use ema_core::schedule::NotificationPlan;
use ema_core::sensing::{GridLocation, UsageReport};
use ema_core::time::EpochMillis;
use rusqlite::{params, Connection, OptionalExtension, Row};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("database: {0}")]
    Sql(#[from] rusqlite::Error),
    #[error("corrupt row in {table}: {message}")]
    Corrupt { table: &'static str, message: String },
}

impl StoreError {
    pub fn code(&self) -> &'static str {
        "E_STORE"
    }

    pub fn is_constraint(&self) -> bool {
        matches!(self, Self::Sql(rusqlite::Error::SqliteFailure(e, _)) if e.code == rusqlite::ErrorCode::ConstraintViolation)
    }
}

pub type StoreResult<T> = Result<T, StoreError>;

const SCHEMA: &str = "
CREATE TABLE IF NOT EXISTS users (
    id TEXT PRIMARY KEY,
    token_hash TEXT NOT NULL UNIQUE,
    role TEXT NOT NULL,
    studies TEXT NOT NULL,
    verified INTEGER NOT NULL DEFAULT 0,
    created_at INTEGER NOT NULL
);
CREATE TABLE IF NOT EXISTS user_histories (
    seq INTEGER PRIMARY KEY AUTOINCREMENT,
    user_id TEXT NOT NULL REFERENCES users(id),
    action TEXT NOT NULL,
    at INTEGER NOT NULL,
    detail TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS studies (
    id TEXT PRIMARY KEY,
    body TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS questionnaires (
    id TEXT NOT NULL,
    version INTEGER NOT NULL,
    language TEXT NOT NULL,
    study_id TEXT NOT NULL REFERENCES studies(id),
    kind TEXT NOT NULL,
    body TEXT NOT NULL,
    PRIMARY KEY (id, version, language)
);
CREATE TABLE IF NOT EXISTS rule_sets (
    study_id TEXT NOT NULL REFERENCES studies(id),
    version INTEGER NOT NULL,
    rules TEXT NOT NULL,
    PRIMARY KEY (study_id, version)
);
CREATE TABLE IF NOT EXISTS subscriptions (
    id TEXT PRIMARY KEY,
    user_id TEXT NOT NULL REFERENCES users(id),
    study_id TEXT NOT NULL REFERENCES studies(id),
    subscribed_at INTEGER NOT NULL,
    UNIQUE (user_id, study_id)
);
CREATE TABLE IF NOT EXISTS plans (
    subscription_id TEXT PRIMARY KEY REFERENCES subscriptions(id),
    body TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS answersheets (
    seq INTEGER PRIMARY KEY AUTOINCREMENT,
    id TEXT NOT NULL UNIQUE,
    client_submission_id TEXT NOT NULL UNIQUE,
    user_id TEXT NOT NULL REFERENCES users(id),
    study_id TEXT NOT NULL,
    questionnaire_id TEXT NOT NULL,
    version INTEGER NOT NULL,
    kind TEXT NOT NULL,
    language TEXT NOT NULL,
    answers TEXT NOT NULL,
    sensing TEXT,
    location TEXT,
    device TEXT NOT NULL,
    os TEXT NOT NULL,
    submitted_at INTEGER NOT NULL,
    client_created_at INTEGER,
    rule_set_version INTEGER
);
CREATE INDEX IF NOT EXISTS answersheets_user ON answersheets(user_id);
CREATE INDEX IF NOT EXISTS history_user ON user_histories(user_id);
";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Participant,
    Collaborator,
    Admin,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Participant => "participant",
            Self::Collaborator => "collaborator",
            Self::Admin => "admin",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Role {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "participant" => Ok(Self::Participant),
            "collaborator" => Ok(Self::Collaborator),
            "admin" => Ok(Self::Admin),
            other => Err(format!("unknown role `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HistoryAction {
    Login,
    Subscribe,
    Submit,
    Consent,
}

impl HistoryAction {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Login => "login",
            Self::Subscribe => "subscribe",
            Self::Submit => "submit",
            Self::Consent => "consent",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct User {
    pub id: String,
    pub role: Role,
    /// Studies a collaborator may seed.
    pub studies: Vec<String>,
    pub verified: bool,
    pub created_at: EpochMillis,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HistoryEntry {
    pub user_id: String,
    pub action: String,
    pub at: EpochMillis,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subscription {
    pub id: String,
    pub user_id: String,
    pub study_id: String,
    pub subscribed_at: EpochMillis,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Os {
    Android,
    Ios,
    Web,
    Other,
}

impl Os {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Android => "android",
            Self::Ios => "ios",
            Self::Web => "web",
            Self::Other => "other",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Device {
    pub os: Os,
    #[serde(default)]
    pub os_version: String,
    #[serde(default)]
    pub model: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Answersheet {
    pub id: String,
    pub client_submission_id: String,
    pub user_id: String,
    pub study_id: String,
    pub questionnaire_id: String,
    pub version: u32,
    pub kind: QuestionnaireKind,
    pub language: String,
    pub answers: Answers,
    pub sensing: Option<UsageReport>,
    pub location: Option<GridLocation>,
    pub device: Device,
    pub submitted_at: EpochMillis,
    pub client_created_at: Option<EpochMillis>,
    pub rule_set_version: Option<u32>,
}

/// The columns statistics need, without the JSON payload columns other
/// than answers.
#[derive(Debug, Clone)]
pub struct SheetSummary {
    pub user_id: String,
    pub study_id: String,
    pub kind: QuestionnaireKind,
    pub os: Os,
    pub answers: Answers,
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("stored types serialize")
}

fn from_json<T: for<'de> Deserialize<'de>>(table: &'static str, s: &str) -> StoreResult<T> {
    serde_json::from_str(s).map_err(|e| StoreError::Corrupt { table, message: e.to_string() })
}

fn parse_kind(table: &'static str, s: &str) -> StoreResult<QuestionnaireKind> {
    match s {
        "baseline" => Ok(QuestionnaireKind::Baseline),
        "followup" => Ok(QuestionnaireKind::Followup),
        other => Err(StoreError::Corrupt { table, message: format!("kind `{other}`") }),
    }
}

fn parse_os(s: &str) -> StoreResult<Os> {
    from_json("answersheets", &format!("\"{s}\""))
}

pub struct Store {
    conn: Connection,
}

impl Store {
    pub fn open(path: &Path) -> StoreResult<Self> {
        let conn = Connection::open(path)?;
        conn.pragma_update(None, "journal_mode", "WAL")?;
        conn.pragma_update(None, "synchronous", "NORMAL")?;
        Self::init(conn)
    }

    pub fn in_memory() -> StoreResult<Self> {
        Self::init(Connection::open_in_memory()?)
    }

    fn init(conn: Connection) -> StoreResult<Self> {
        conn.pragma_update(None, "foreign_keys", "ON")?;
        conn.execute_batch(SCHEMA)?;
        Ok(Self { conn })
    }

    /// Runs `f` inside one transaction, rolling back on error.
    pub fn atomically<T, E: From<StoreError>>(&mut self, f: impl FnOnce(&mut Self) -> Result<T, E>) -> Result<T, E> {
        if !self.conn.is_autocommit() {
            // left open by a panic in an earlier transaction
            self.conn.execute_batch("ROLLBACK").map_err(StoreError::from)?;
        }
        self.conn.execute_batch("BEGIN IMMEDIATE").map_err(StoreError::from)?;
        match f(self) {
            Ok(v) => {
                self.conn.execute_batch("COMMIT").map_err(StoreError::from)?;
                Ok(v)
            }
            Err(e) => {
                // the original error matters more than a failed rollback
                let _ = self.conn.execute_batch("ROLLBACK");
                Err(e)
            }
        }
    }

    // users

    pub fn insert_user(&self, user: &User, token_hash: &str) -> StoreResult<()> {
        self.conn.execute(
            "INSERT INTO users (id, token_hash, role, studies, verified, created_at) VALUES (?1, ?2, ?3, ?4, ?5, ?6)",
            params![user.id, token_hash, user.role.as_str(), to_json(&user.studies), user.verified, user.created_at],
        )?;
        Ok(())
    }

    fn user_from_row(row: &Row<'_>) -> rusqlite::Result<(String, String, String, bool, i64)> {
        Ok((row.get(0)?, row.get(1)?, row.get(2)?, row.get(3)?, row.get(4)?))
    }

    fn build_user((id, role, studies, verified, created_at): (String, String, String, bool, i64)) -> StoreResult<User> {
        let role = role.parse().map_err(|message| StoreError::Corrupt { table: "users", message })?;
        Ok(User { id, role, studies: from_json("users", &studies)?, verified, created_at })
    }

    pub fn user_by_token_hash(&self, hash: &str) -> StoreResult<Option<User>> {
        let row = self
            .conn
            .query_row(
                "SELECT id, role, studies, verified, created_at FROM users WHERE token_hash = ?1",
                [hash],
                Self::user_from_row,
            )
            .optional()?;
        row.map(Self::build_user).transpose()
    }

    pub fn user(&self, id: &str) -> StoreResult<Option<User>> {
        let row = self
            .conn
            .query_row("SELECT id, role, studies, verified, created_at FROM users WHERE id = ?1", [id], Self::user_from_row)
            .optional()?;
        row.map(Self::build_user).transpose()
    }

    pub fn mark_verified(&self, id: &str) -> StoreResult<()> {
        self.conn.execute("UPDATE users SET verified = 1 WHERE id = ?1", [id])?;
        Ok(())
    }

    pub fn append_history(&self, user_id: &str, action: HistoryAction, at: EpochMillis, detail: &str) -> StoreResult<()> {
        // keep timestamps non-decreasing per user even if the clock steps back
        let last: Option<i64> =
            self.conn.query_row("SELECT MAX(at) FROM user_histories WHERE user_id = ?1", [user_id], |r| r.get(0))?;
        let at = last.map_or(at, |l| l.max(at));
        self.conn.execute(
            "INSERT INTO user_histories (user_id, action, at, detail) VALUES (?1, ?2, ?3, ?4)",
            params![user_id, action.as_str(), at, detail],
        )?;
        Ok(())
    }

    pub fn history(&self, user_id: &str) -> StoreResult<Vec<HistoryEntry>> {
        let mut stmt =
            self.conn.prepare("SELECT user_id, action, at, detail FROM user_histories WHERE user_id = ?1 ORDER BY seq")?;
        let rows = stmt.query_map([user_id], |r| {
            Ok(HistoryEntry { user_id: r.get(0)?, action: r.get(1)?, at: r.get(2)?, detail: r.get(3)? })
        })?;
        Ok(rows.collect::<Result<_, _>>()?)
    }

    /// `(users, verified participants, history entries)`.
    pub fn user_counts(&self) -> StoreResult<(u64, u64, u64)> {
        let users = self.conn.query_row("SELECT COUNT(*) FROM users", [], |r| r.get(0))?;
        let verified =
            self.conn.query_row("SELECT COUNT(*) FROM users WHERE verified = 1 AND role = 'participant'", [], |r| r.get(0))?;
        let history = self.conn.query_row("SELECT COUNT(*) FROM user_histories", [], |r| r.get(0))?;
        Ok((users, verified, history))
    }

    // studies and content

    pub fn put_study(&self, study: &Study) -> StoreResult<()> {
        self.conn.execute(
            "INSERT INTO studies (id, body) VALUES (?1, ?2) ON CONFLICT(id) DO UPDATE SET body = excluded.body",
            params![study.study_id, to_json(study)],
        )?;
        Ok(())
    }

    pub fn study(&self, id: &str) -> StoreResult<Option<Study>> {
        let body: Option<String> =
            self.conn.query_row("SELECT body FROM studies WHERE id = ?1", [id], |r| r.get(0)).optional()?;
        body.map(|b| from_json("studies", &b)).transpose()
    }

    pub fn studies(&self) -> StoreResult<Vec<Study>> {
        let mut stmt = self.conn.prepare("SELECT body FROM studies ORDER BY id")?;
        let bodies = stmt.query_map([], |r| r.get::<_, String>(0))?.collect::<Result<Vec<_>, _>>()?;
        bodies.iter().map(|b| from_json("studies", b)).collect()
    }

    pub fn latest_version(&self, questionnaire_id: &str) -> StoreResult<Option<u32>> {
        Ok(self.conn.query_row("SELECT MAX(version) FROM questionnaires WHERE id = ?1", [questionnaire_id], |r| r.get(0))?)
    }

    /// All language variants of one questionnaire version.
    pub fn variants(&self, questionnaire_id: &str, version: u32) -> StoreResult<BTreeMap<String, Questionnaire>> {
        let mut stmt = self.conn.prepare("SELECT language, body FROM questionnaires WHERE id = ?1 AND version = ?2")?;
        let rows = stmt
            .query_map(params![questionnaire_id, version], |r| Ok((r.get::<_, String>(0)?, r.get::<_, String>(1)?)))?
            .collect::<Result<Vec<_>, _>>()?;
        rows.into_iter().map(|(lang, body)| Ok((lang, from_json("questionnaires", &body)?))).collect()
    }

    pub fn questionnaire(&self, questionnaire_id: &str, version: u32, language: &str) -> StoreResult<Option<Questionnaire>> {
        let body: Option<String> = self
            .conn
            .query_row(
                "SELECT body FROM questionnaires WHERE id = ?1 AND version = ?2 AND language = ?3",
                params![questionnaire_id, version, language],
                |r| r.get(0),
            )
            .optional()?;
        body.map(|b| from_json("questionnaires", &b)).transpose()
    }

    pub fn insert_questionnaire(&self, q: &Questionnaire) -> StoreResult<()> {
        self.conn.execute(
            "INSERT INTO questionnaires (id, version, language, study_id, kind, body) VALUES (?1, ?2, ?3, ?4, ?5, ?6)",
            params![q.id, q.version, q.language, q.study_id, q.kind.as_str(), to_json(q)],
        )?;
        Ok(())
    }

    pub fn latest_rules(&self, study_id: &str) -> StoreResult<Option<(u32, Vec<RuleSpec>)>> {
        let row: Option<(u32, String)> = self
            .conn
            .query_row(
                "SELECT version, rules FROM rule_sets WHERE study_id = ?1 ORDER BY version DESC LIMIT 1",
                [study_id],
                |r| Ok((r.get(0)?, r.get(1)?)),
            )
            .optional()?;
        row.map(|(v, rules)| Ok((v, from_json("rule_sets", &rules)?))).transpose()
    }

    pub fn rules(&self, study_id: &str, version: u32) -> StoreResult<Option<Vec<RuleSpec>>> {
        let rules: Option<String> = self
            .conn
            .query_row(
                "SELECT rules FROM rule_sets WHERE study_id = ?1 AND version = ?2",
                params![study_id, version],
                |r| r.get(0),
            )
            .optional()?;
        rules.map(|r| from_json("rule_sets", &r)).transpose()
    }

    pub fn insert_rules(&self, study_id: &str, version: u32, rules: &[RuleSpec]) -> StoreResult<()> {
        self.conn.execute(
            "INSERT INTO rule_sets (study_id, version, rules) VALUES (?1, ?2, ?3)",
            params![study_id, version, to_json(&rules)],
        )?;
        Ok(())
    }

    // subscriptions and plans

    fn subscription_from_row(r: &Row<'_>) -> rusqlite::Result<Subscription> {
        Ok(Subscription { id: r.get(0)?, user_id: r.get(1)?, study_id: r.get(2)?, subscribed_at: r.get(3)? })
    }

    pub fn subscription(&self, user_id: &str, study_id: &str) -> StoreResult<Option<Subscription>> {
        Ok(self
            .conn
            .query_row(
                "SELECT id, user_id, study_id, subscribed_at FROM subscriptions WHERE user_id = ?1 AND study_id = ?2",
                params![user_id, study_id],
                Self::subscription_from_row,
            )
            .optional()?)
    }

    pub fn subscriptions_of(&self, user_id: &str) -> StoreResult<Vec<Subscription>> {
        let mut stmt = self.conn.prepare(
            "SELECT id, user_id, study_id, subscribed_at FROM subscriptions WHERE user_id = ?1 ORDER BY study_id",
        )?;
        let rows = stmt.query_map([user_id], Self::subscription_from_row)?;
        Ok(rows.collect::<Result<_, _>>()?)
    }

    /// `(study_id, user_id)` of every subscription held by a verified user.
    pub fn verified_subscribers(&self) -> StoreResult<Vec<(String, String)>> {
        let mut stmt = self.conn.prepare(
            "SELECT s.study_id, s.user_id FROM subscriptions s JOIN users u ON u.id = s.user_id WHERE u.verified = 1",
        )?;
        let rows = stmt.query_map([], |r| Ok((r.get(0)?, r.get(1)?)))?;
        Ok(rows.collect::<Result<_, _>>()?)
    }

    pub fn insert_subscription(&self, s: &Subscription) -> StoreResult<()> {
        self.conn.execute(
            "INSERT INTO subscriptions (id, user_id, study_id, subscribed_at) VALUES (?1, ?2, ?3, ?4)",
            params![s.id, s.user_id, s.study_id, s.subscribed_at],
        )?;
        Ok(())
    }

    pub fn plan(&self, subscription_id: &str) -> StoreResult<Option<NotificationPlan>> {
        let body: Option<String> = self
            .conn
            .query_row("SELECT body FROM plans WHERE subscription_id = ?1", [subscription_id], |r| r.get(0))
            .optional()?;
        body.map(|b| from_json("plans", &b)).transpose()
    }

    pub fn save_plan(&self, plan: &NotificationPlan) -> StoreResult<()> {
        self.conn.execute(
            "INSERT INTO plans (subscription_id, body) VALUES (?1, ?2)
             ON CONFLICT(subscription_id) DO UPDATE SET body = excluded.body",
            params![plan.subscription_id, to_json(plan)],
        )?;
        Ok(())
    }

    // answersheets

    const SHEET_COLUMNS: &'static str = "id, client_submission_id, user_id, study_id, questionnaire_id, version, kind, \
         language, answers, sensing, location, device, submitted_at, client_created_at, rule_set_version";

    fn sheet_from_row(r: &Row<'_>) -> rusqlite::Result<RawSheet> {
        Ok(RawSheet {
            id: r.get(0)?,
            client_submission_id: r.get(1)?,
            user_id: r.get(2)?,
            study_id: r.get(3)?,
            questionnaire_id: r.get(4)?,
            version: r.get(5)?,
            kind: r.get(6)?,
            language: r.get(7)?,
            answers: r.get(8)?,
            sensing: r.get(9)?,
            location: r.get(10)?,
            device: r.get(11)?,
            submitted_at: r.get(12)?,
            client_created_at: r.get(13)?,
            rule_set_version: r.get(14)?,
        })
    }

    fn query_sheet(&self, column: &str, value: &str) -> StoreResult<Option<Answersheet>> {
        let sql = format!("SELECT {} FROM answersheets WHERE {column} = ?1", Self::SHEET_COLUMNS);
        let raw = self.conn.query_row(&sql, [value], Self::sheet_from_row).optional()?;
        raw.map(RawSheet::decode).transpose()
    }

    pub fn answersheet(&self, id: &str) -> StoreResult<Option<Answersheet>> {
        self.query_sheet("id", id)
    }

    pub fn answersheet_by_submission(&self, client_submission_id: &str) -> StoreResult<Option<Answersheet>> {
        self.query_sheet("client_submission_id", client_submission_id)
    }

    pub fn insert_answersheet(&self, a: &Answersheet) -> StoreResult<()> {
        self.conn.execute(
            "INSERT INTO answersheets (id, client_submission_id, user_id, study_id, questionnaire_id, version, kind,
                 language, answers, sensing, location, device, os, submitted_at, client_created_at, rule_set_version)
             VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7, ?8, ?9, ?10, ?11, ?12, ?13, ?14, ?15, ?16)",
            params![
                a.id,
                a.client_submission_id,
                a.user_id,
                a.study_id,
                a.questionnaire_id,
                a.version,
                a.kind.as_str(),
                a.language,
                to_json(&a.answers),
                a.sensing.as_ref().map(to_json),
                a.location.as_ref().map(to_json),
                to_json(&a.device),
                a.device.os.as_str(),
                a.submitted_at,
                a.client_created_at,
                a.rule_set_version,
            ],
        )?;
        Ok(())
    }

    pub fn answersheet_count(&self) -> StoreResult<u64> {
        Ok(self.conn.query_row("SELECT COUNT(*) FROM answersheets", [], |r| r.get(0))?)
    }

    /// Every answersheet in submission order, reduced to what statistics use.
    pub fn sheet_summaries(&self) -> StoreResult<Vec<SheetSummary>> {
        let mut stmt = self.conn.prepare("SELECT user_id, study_id, kind, os, answers FROM answersheets ORDER BY seq")?;
        let rows = stmt
            .query_map([], |r| {
                Ok((
                    r.get::<_, String>(0)?,
                    r.get::<_, String>(1)?,
                    r.get::<_, String>(2)?,
                    r.get::<_, String>(3)?,
                    r.get::<_, String>(4)?,
                ))
            })?
            .collect::<Result<Vec<_>, _>>()?;
        rows.into_iter()
            .map(|(user_id, study_id, kind, os, answers)| {
                Ok(SheetSummary {
                    user_id,
                    study_id,
                    kind: parse_kind("answersheets", &kind)?,
                    os: parse_os(&os)?,
                    answers: from_json("answersheets", &answers)?,
                })
            })
            .collect()
    }
}

struct RawSheet {
    id: String,
    client_submission_id: String,
    user_id: String,
    study_id: String,
    questionnaire_id: String,
    version: u32,
    kind: String,
    language: String,
    answers: String,
    sensing: Option<String>,
    location: Option<String>,
    device: String,
    submitted_at: i64,
    client_created_at: Option<i64>,
    rule_set_version: Option<u32>,
}

impl RawSheet {
    fn decode(self) -> StoreResult<Answersheet> {
        const T: &str = "answersheets";
        Ok(Answersheet {
            id: self.id,
            client_submission_id: self.client_submission_id,
            user_id: self.user_id,
            study_id: self.study_id,
            questionnaire_id: self.questionnaire_id,
            version: self.version,
            kind: parse_kind(T, &self.kind)?,
            language: self.language,
            answers: from_json(T, &self.answers)?,
            sensing: self.sensing.map(|s| from_json(T, &s)).transpose()?,
            location: self.location.map(|s| from_json(T, &s)).transpose()?,
            device: from_json(T, &self.device)?,
            submitted_at: self.submitted_at,
            client_created_at: self.client_created_at,
            rule_set_version: self.rule_set_version,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn user(id: &str) -> User {
        User { id: id.into(), role: Role::Participant, studies: vec![], verified: false, created_at: 5 }
    }

    #[test]
    fn users_round_trip_by_token() {
        let s = Store::in_memory().unwrap();
        s.insert_user(&user("u1"), "h1").unwrap();
        assert_eq!(s.user_by_token_hash("h1").unwrap(), Some(user("u1")));
        assert_eq!(s.user_by_token_hash("h2").unwrap(), None);
        s.mark_verified("u1").unwrap();
        assert!(s.user("u1").unwrap().unwrap().verified);
        assert_eq!(s.user_counts().unwrap(), (1, 1, 0));
    }

    #[test]
    fn history_timestamps_never_decrease() {
        let s = Store::in_memory().unwrap();
        s.insert_user(&user("u1"), "h1").unwrap();
        s.append_history("u1", HistoryAction::Login, 100, "").unwrap();
        s.append_history("u1", HistoryAction::Subscribe, 50, "mood").unwrap();
        let at: Vec<i64> = s.history("u1").unwrap().iter().map(|h| h.at).collect();
        assert_eq!(at, vec![100, 100]);
    }

    #[test]
    fn failed_transaction_rolls_back() {
        let mut s = Store::in_memory().unwrap();
        let r: Result<(), StoreError> = s.atomically(|s| {
            s.insert_user(&user("u1"), "h1")?;
            s.insert_user(&user("u2"), "h1")
        });
        assert!(r.unwrap_err().is_constraint());
        assert_eq!(s.user("u1").unwrap(), None);
    }
}
