//! Domain types shared by the pipeline, the service and the clients.
//!
//! The serde representation of these types is the canonical questionnaire
//! JSON exchanged between the content pipeline and the API. Field names are
//! part of that contract.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::feedback::RuleSpec;
use crate::time::TimeOfDay;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuestionnaireKind {
    Baseline,
    Followup,
}

impl QuestionnaireKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Baseline => "baseline",
            Self::Followup => "followup",
        }
    }
}

impl fmt::Display for QuestionnaireKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuestionType {
    SingleChoice,
    MultiChoice,
    Slider,
    TextInput,
    Date,
    Yesno,
}

impl QuestionType {
    pub const ALL: [QuestionType; 6] = [
        Self::SingleChoice,
        Self::MultiChoice,
        Self::Slider,
        Self::TextInput,
        Self::Date,
        Self::Yesno,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::SingleChoice => "single_choice",
            Self::MultiChoice => "multi_choice",
            Self::Slider => "slider",
            Self::TextInput => "text_input",
            Self::Date => "date",
            Self::Yesno => "yesno",
        }
    }

    pub fn is_choice(self) -> bool {
        matches!(self, Self::SingleChoice | Self::MultiChoice)
    }
}

impl fmt::Display for QuestionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for QuestionType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| s.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ResponseOption {
    pub code: i64,
    pub text: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SliderRange {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl SliderRange {
    /// Whether `value` lies on the slider grid.
    pub fn admits(&self, value: f64) -> bool {
        if !(self.min..=self.max).contains(&value) || self.step <= 0.0 {
            return false;
        }
        let steps = (value - self.min) / self.step;
        (steps - steps.round()).abs() < 1e-9
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Question {
    pub variable: String,
    #[serde(rename = "questiontype")]
    pub question_type: QuestionType,
    pub optional: bool,
    pub label: String,
    #[serde(default)]
    pub options: Vec<ResponseOption>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slider: Option<SliderRange>,
}

impl Question {
    /// Structure of the question with all translated text removed.
    pub fn structure(&self) -> QuestionStructure {
        QuestionStructure {
            question_type: self.question_type,
            optional: self.optional,
            codes: self.options.iter().map(|o| o.code).collect(),
            slider: self.slider.map(|s| [s.min.to_bits(), s.max.to_bits(), s.step.to_bits()]),
        }
    }
}

/// The language-independent part of a question.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuestionStructure {
    pub question_type: QuestionType,
    pub optional: bool,
    pub codes: Vec<i64>,
    pub slider: Option<[u64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum QuestionnaireElement {
    Page,
    Headline { text: String },
    Text { text: String },
    Media { uri: String },
    Question(Question),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ElementKind {
    Page,
    Text,
    Question,
    Headline,
    Media,
}

impl ElementKind {
    pub const ALL: [ElementKind; 5] = [Self::Page, Self::Text, Self::Question, Self::Headline, Self::Media];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Page => "page",
            Self::Text => "text",
            Self::Question => "question",
            Self::Headline => "headline",
            Self::Media => "media",
        }
    }
}

impl fmt::Display for ElementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl QuestionnaireElement {
    pub fn kind(&self) -> ElementKind {
        match self {
            Self::Page => ElementKind::Page,
            Self::Headline { .. } => ElementKind::Headline,
            Self::Text { .. } => ElementKind::Text,
            Self::Media { .. } => ElementKind::Media,
            Self::Question(_) => ElementKind::Question,
        }
    }

    pub fn as_question(&self) -> Option<&Question> {
        match self {
            Self::Question(q) => Some(q),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Questionnaire {
    pub id: String,
    #[serde(rename = "study")]
    pub study_id: String,
    pub kind: QuestionnaireKind,
    pub language: String,
    pub version: u32,
    pub elements: Vec<QuestionnaireElement>,
}

impl Questionnaire {
    pub fn questions(&self) -> impl Iterator<Item = &Question> {
        self.elements.iter().filter_map(QuestionnaireElement::as_question)
    }

    pub fn question(&self, variable: &str) -> Option<&Question> {
        self.questions().find(|q| q.variable == variable)
    }

    /// Canonical JSON of the content, ignoring the version number.
    ///
    /// Two variants with equal content bytes are considered unchanged when
    /// seeding.
    pub fn content_bytes(&self) -> Vec<u8> {
        let mut copy = self.clone();
        copy.version = 0;
        canonical_json(&copy).into_bytes()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleSpec {
    pub interval_hours: u32,
    pub window_start: TimeOfDay,
    pub window_end: TimeOfDay,
    pub max_pending: u32,
}

impl ScheduleSpec {
    pub fn weekly() -> Self {
        Self {
            interval_hours: 7 * 24,
            window_start: TimeOfDay::from_hm(8, 0).expect("valid"),
            window_end: TimeOfDay::from_hm(20, 0).expect("valid"),
            max_pending: 1,
        }
    }

    pub fn interval_ms(&self) -> i64 {
        i64::from(self.interval_hours) * crate::time::HOUR_MS
    }

    /// Violated invariants as `(code, message)` pairs.
    pub fn problems(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        if self.interval_hours < 24 {
            out.push(("E_SCHEDULE_INTERVAL", format!("interval of {}h is shorter than one day", self.interval_hours)));
        }
        if self.window_start >= self.window_end {
            out.push((
                "E_SCHEDULE_WINDOW",
                format!("window {}-{} is empty", self.window_start, self.window_end),
            ));
        }
        if self.max_pending == 0 {
            out.push(("E_SCHEDULE_PENDING", "max_pending must be positive".to_string()));
        }
        out
    }
}

impl Default for ScheduleSpec {
    fn default() -> Self {
        Self::weekly()
    }
}

/// Study-level metadata extracted from the workbook.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyMeta {
    pub study_id: String,
    pub languages: Vec<String>,
    pub names: BTreeMap<String, String>,
    pub descriptions: BTreeMap<String, String>,
    pub schedule: ScheduleSpec,
}

/// A study as served by the API.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Study {
    pub study_id: String,
    pub names: BTreeMap<String, String>,
    pub description: BTreeMap<String, String>,
    pub languages: Vec<String>,
    pub schedule_spec: ScheduleSpec,
    /// Questionnaire ids, baseline first.
    pub questionnaire_refs: Vec<String>,
}

/// The compiled artifact of one study: metadata, every questionnaire in
/// every language, and the feedback rules.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionnaireDocument {
    pub meta: StudyMeta,
    pub questionnaires: Vec<Questionnaire>,
    #[serde(default)]
    pub feedback: Vec<RuleSpec>,
}

impl QuestionnaireDocument {
    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }

    /// Pretty-printed JSON with object keys sorted and a trailing newline.
    pub fn to_canonical_json(&self) -> String {
        let mut s = canonical_json(self);
        s.push('\n');
        s
    }

    /// Distinct questionnaire ids in document order.
    pub fn questionnaire_ids(&self) -> Vec<&str> {
        let mut ids: Vec<&str> = Vec::new();
        for q in &self.questionnaires {
            if !ids.contains(&q.id.as_str()) {
                ids.push(&q.id);
            }
        }
        ids
    }

    pub fn variants(&self, id: &str) -> BTreeMap<String, &Questionnaire> {
        self.questionnaires
            .iter()
            .filter(|q| q.id == id)
            .map(|q| (q.language.clone(), q))
            .collect()
    }

    /// One variant per logical questionnaire, in the study's first language
    /// where available. Element counts are taken over this view so that a
    /// workbook row counts once regardless of translations.
    pub fn unique_questionnaires(&self) -> Vec<&Questionnaire> {
        let primary = self.meta.languages.first();
        self.questionnaire_ids()
            .into_iter()
            .filter_map(|id| {
                let variants: Vec<&Questionnaire> = self.questionnaires.iter().filter(|q| q.id == id).collect();
                variants
                    .iter()
                    .find(|q| Some(&q.language) == primary)
                    .or_else(|| variants.first())
                    .copied()
            })
            .collect()
    }

    pub fn study(&self) -> Study {
        let mut refs: Vec<(QuestionnaireKind, String)> = Vec::new();
        for q in &self.questionnaires {
            if !refs.iter().any(|(_, id)| id == &q.id) {
                refs.push((q.kind, q.id.clone()));
            }
        }
        refs.sort_by_key(|(kind, _)| *kind);
        Study {
            study_id: self.meta.study_id.clone(),
            names: self.meta.names.clone(),
            description: self.meta.descriptions.clone(),
            languages: self.meta.languages.clone(),
            schedule_spec: self.meta.schedule.clone(),
            questionnaire_refs: refs.into_iter().map(|(_, id)| id).collect(),
        }
    }
}

/// Serializes through `serde_json::Value`, whose maps are ordered, so that
/// object keys come out sorted.
pub fn canonical_json<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("domain types serialize to JSON");
    serde_json::to_string_pretty(&v).expect("values serialize")
}

/// A single submitted answer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AnswerValue {
    Code(i64),
    Codes(Vec<i64>),
    Text(String),
}

impl AnswerValue {
    /// Value used by feedback rules. Multi-choice answers contribute the sum
    /// of their selected codes; free text has no numeric value.
    pub fn numeric(&self) -> Option<i64> {
        match self {
            Self::Code(c) => Some(*c),
            Self::Codes(cs) => i64::try_from(cs.iter().map(|c| i128::from(*c)).sum::<i128>()).ok(),
            Self::Text(_) => None,
        }
    }
}

pub type Answers = BTreeMap<String, AnswerValue>;

pub fn is_valid_variable(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some('a'..='z'))
        && chars.all(|c| matches!(c, 'a'..='z' | '0'..='9' | '_'))
}

/// What seeding did with one questionnaire.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeedAction {
    Created,
    Unchanged,
    Versioned,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedResult {
    pub action: SeedAction,
    pub questionnaire_id: String,
    pub new_version: u32,
}
