//! Structural validation of questionnaires, documents and answers.
//!
//! Problems are reported as data: every check returns a
//! [`ValidationReport`] (or a list of [`Issue`]s) and never fails.

use std::borrow::Borrow;
use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::feedback::{bind, RuleSpec};
use crate::model::{
    is_valid_variable, AnswerValue, Answers, ElementKind, Question, QuestionType, Questionnaire,
    QuestionnaireDocument, QuestionnaireElement, QuestionnaireKind,
};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Location {
    Questionnaire,
    Element {
        index: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        variable: Option<String>,
    },
    Variable { variable: String },
    Row { sheet: String, line: usize },
    File { path: String },
    Meta { key: String },
    Feedback { key: String },
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Questionnaire => f.write_str("questionnaire"),
            Location::Element { index, variable: Some(v) } => write!(f, "element #{index} ({v})"),
            Location::Element { index, variable: None } => write!(f, "element #{index}"),
            Location::Variable { variable } => write!(f, "variable {variable}"),
            Location::Row { sheet, line } => write!(f, "{sheet}.csv line {line}"),
            Location::File { path } => write!(f, "{path}"),
            Location::Meta { key } => write!(f, "study.csv key {key}"),
            Location::Feedback { key } => write!(f, "feedback {key}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Issue {
    pub code: String,
    /// Questionnaire variant the issue belongs to, as `id/lang`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scope: Option<String>,
    pub location: Location,
    pub message: String,
}

impl Issue {
    pub fn new(code: &str, location: Location, message: impl Into<String>) -> Self {
        Self { code: code.to_string(), scope: None, location, message: message.into() }
    }

    pub fn scoped(mut self, scope: impl Into<String>) -> Self {
        self.scope = Some(scope.into());
        self
    }
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.scope {
            Some(s) => write!(f, "{} [{s}] {}: {}", self.code, self.location, self.message),
            None => write!(f, "{} {}: {}", self.code, self.location, self.message),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub errors: Vec<Issue>,
    pub warnings: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.errors.is_empty()
    }

    pub fn merge(&mut self, other: ValidationReport) {
        self.errors.extend(other.errors);
        self.warnings.extend(other.warnings);
    }

    fn scoped(mut self, scope: &str) -> Self {
        for issue in self.errors.iter_mut().chain(self.warnings.iter_mut()) {
            issue.scope.get_or_insert_with(|| scope.to_string());
        }
        self
    }
}

fn element_location(index: usize, q: Option<&Question>) -> Location {
    Location::Element { index, variable: q.map(|q| q.variable.clone()) }
}

/// Checks a single questionnaire variant against the element invariants.
///
/// Questionnaire-level errors come first, then element errors in element
/// order.
pub fn validate_questionnaire(q: &Questionnaire) -> ValidationReport {
    let mut report = ValidationReport::default();
    if q.elements.is_empty() {
        report.errors.push(Issue::new("E_EMPTY", Location::Questionnaire, "questionnaire has no elements"));
    }
    if q.version == 0 {
        report.errors.push(Issue::new("E_VERSION", Location::Questionnaire, "versions start at 1"));
    }

    let mut seen = HashSet::new();
    for (index, element) in q.elements.iter().enumerate() {
        match element {
            QuestionnaireElement::Question(question) => {
                let loc = element_location(index, Some(question));
                let mut err = |code: &str, msg: String| report.errors.push(Issue::new(code, loc.clone(), msg));
                if !is_valid_variable(&question.variable) {
                    err("E_VARIABLE_NAME", format!("variable `{}` does not match [a-z][a-z0-9_]*", question.variable));
                }
                if !seen.insert(question.variable.as_str()) {
                    err("E_DUP_VARIABLE", format!("variable `{}` is defined more than once", question.variable));
                }
                let qt = question.question_type;
                let n = question.options.len();
                if qt.is_choice() && n < 2 {
                    err("E_TOO_FEW_OPTIONS", format!("{qt} question needs at least 2 options, has {n}"));
                }
                if qt == QuestionType::Yesno && n != 0 && n != 2 {
                    err("E_YESNO_OPTIONS", format!("yesno question has {n} options, expected 0 or 2"));
                }
                if matches!(qt, QuestionType::Slider | QuestionType::TextInput | QuestionType::Date) && n > 0 {
                    err("E_UNEXPECTED_OPTIONS", format!("{qt} question cannot have response options"));
                }
                let mut codes = HashSet::new();
                if let Some(dup) = question.options.iter().find(|o| !codes.insert(o.code)) {
                    err("E_DUP_CODE", format!("option code {} is used more than once", dup.code));
                }
                match (qt, question.slider) {
                    (QuestionType::Slider, None) => err("E_SLIDER_MISSING", "slider question has no range".into()),
                    (QuestionType::Slider, Some(r)) => {
                        let finite = r.min.is_finite() && r.max.is_finite() && r.step.is_finite();
                        if !finite || r.min >= r.max || r.step <= 0.0 {
                            err(
                                "E_SLIDER_RANGE",
                                format!("slider range min={} max={} step={} is invalid", r.min, r.max, r.step),
                            );
                        }
                    }
                    (_, Some(_)) => err("E_UNEXPECTED_SLIDER", format!("{qt} question cannot have a slider range")),
                    (_, None) => {}
                }
                if question.label.is_empty() {
                    report.warnings.push(Issue::new("W_EMPTY_LABEL", loc, "question has no label"));
                }
            }
            QuestionnaireElement::Headline { text } | QuestionnaireElement::Text { text } if text.is_empty() => {
                report.warnings.push(Issue::new("W_EMPTY_TEXT", element_location(index, None), "element has no text"));
            }
            _ => {}
        }
    }
    report
}

/// Number of elements of each kind across `qs`; every kind is present.
pub fn element_counts<'a, I>(qs: I) -> BTreeMap<ElementKind, usize>
where
    I: IntoIterator<Item = &'a Questionnaire>,
{
    let mut counts: BTreeMap<ElementKind, usize> = ElementKind::ALL.iter().map(|k| (*k, 0)).collect();
    for q in qs {
        for e in &q.elements {
            *counts.entry(e.kind()).or_default() += 1;
        }
    }
    counts
}

/// Compares the language variants of one questionnaire.
///
/// Reports each `(code, variable)` once, ordered by variable then code.
pub fn check_cross_language<Q: Borrow<Questionnaire>>(variants: &BTreeMap<String, Q>) -> ValidationReport {
    let mut report = ValidationReport::default();
    let langs: Vec<(&String, &Questionnaire)> = variants.iter().map(|(l, q)| (l, q.borrow())).collect();

    if let Some((_, first)) = langs.first() {
        for (lang, q) in &langs[1..] {
            if q.id != first.id || q.version != first.version || q.kind != first.kind {
                report.errors.push(Issue::new(
                    "E_VARIANT_MISMATCH",
                    Location::Questionnaire,
                    format!(
                        "variant `{lang}` is {}/v{}/{} but `{}` is {}/v{}/{}",
                        q.id, q.version, q.kind, first.language, first.id, first.version, first.kind
                    ),
                ));
            }
        }
    }

    let by_lang: Vec<(&String, BTreeMap<&str, &Question>)> = langs
        .iter()
        .map(|(l, q)| {
            let mut m = BTreeMap::new();
            for question in q.questions() {
                m.entry(question.variable.as_str()).or_insert(question);
            }
            (*l, m)
        })
        .collect();

    let mut found: BTreeMap<(String, &'static str), String> = BTreeMap::new();
    for (i, (lang_a, a)) in by_lang.iter().enumerate() {
        for (lang_b, b) in &by_lang[i + 1..] {
            for var in a.keys().chain(b.keys()) {
                let (qa, qb) = match (a.get(var), b.get(var)) {
                    (Some(qa), Some(qb)) => (qa, qb),
                    (Some(_), None) => {
                        found
                            .entry((var.to_string(), "E_MISSING_VARIABLE"))
                            .or_insert_with(|| format!("`{var}` exists in `{lang_a}` but not in `{lang_b}`"));
                        continue;
                    }
                    (None, _) => {
                        found
                            .entry((var.to_string(), "E_MISSING_VARIABLE"))
                            .or_insert_with(|| format!("`{var}` exists in `{lang_b}` but not in `{lang_a}`"));
                        continue;
                    }
                };
                let mut diff = |code: &'static str, msg: String| {
                    found.entry((var.to_string(), code)).or_insert(msg);
                };
                if qa.question_type != qb.question_type {
                    diff(
                        "E_QUESTION_TYPE",
                        format!("`{var}` is {} in `{lang_a}` but {} in `{lang_b}`", qa.question_type, qb.question_type),
                    );
                }
                if qa.optional != qb.optional {
                    diff("E_OPTIONAL", format!("`{var}` optionality differs between `{lang_a}` and `{lang_b}`"));
                }
                if qa.options.len() != qb.options.len() {
                    diff(
                        "E_OPTION_COUNT",
                        format!(
                            "`{var}` has {} options in `{lang_a}` but {} in `{lang_b}`",
                            qa.options.len(),
                            qb.options.len()
                        ),
                    );
                } else if qa.options.iter().map(|o| o.code).ne(qb.options.iter().map(|o| o.code)) {
                    diff("E_OPTION_CODES", format!("`{var}` option codes differ between `{lang_a}` and `{lang_b}`"));
                }
                if qa.structure().slider != qb.structure().slider {
                    diff("E_SLIDER_MISMATCH", format!("`{var}` slider range differs between `{lang_a}` and `{lang_b}`"));
                }
            }
        }
    }
    report.errors.extend(
        found
            .into_iter()
            .map(|((variable, code), msg)| Issue::new(code, Location::Variable { variable }, msg)),
    );
    report
}

/// Full consistency check of a compiled study document.
pub fn validate_document(doc: &QuestionnaireDocument) -> ValidationReport {
    let mut report = ValidationReport::default();
    let meta = &doc.meta;
    let meta_err = |key: &str, code: &str, msg: String| Issue::new(code, Location::Meta { key: key.to_string() }, msg);

    if meta.study_id.is_empty() {
        report.errors.push(meta_err("study_id", "E_META", "study_id is empty".into()));
    }
    if meta.languages.is_empty() {
        report.errors.push(meta_err("languages", "E_NO_LANGUAGES", "study declares no languages".into()));
    }
    let languages: BTreeSet<&String> = meta.languages.iter().collect();
    if languages.len() != meta.languages.len() {
        report.errors.push(meta_err("languages", "E_DUP_LANGUAGE", "a language is declared twice".into()));
    }
    for (field, map) in [("name", &meta.names), ("description", &meta.descriptions)] {
        for lang in &languages {
            if !map.contains_key(*lang) {
                report.errors.push(meta_err(
                    &format!("{field}_{lang}"),
                    "E_LANG_GAP",
                    format!("{field} has no `{lang}` translation"),
                ));
            }
        }
        for lang in map.keys().filter(|l| !languages.contains(l)) {
            report.errors.push(meta_err(
                &format!("{field}_{lang}"),
                "E_TRANSLATION_EXTRA",
                format!("{field} is translated into undeclared language `{lang}`"),
            ));
        }
    }
    for (code, msg) in meta.schedule.problems() {
        report.errors.push(meta_err("schedule", code, msg));
    }

    for q in &doc.questionnaires {
        let scope = format!("{}/{}", q.id, q.language);
        if q.study_id != meta.study_id {
            report.errors.push(
                Issue::new("E_STUDY_MISMATCH", Location::Questionnaire, format!("belongs to study `{}`", q.study_id))
                    .scoped(&scope),
            );
        }
        if !languages.contains(&q.language) {
            report.errors.push(
                Issue::new("E_BAD_LANGUAGE", Location::Questionnaire, format!("language `{}` is not declared", q.language))
                    .scoped(&scope),
            );
        }
        report.merge(validate_questionnaire(q).scoped(&scope));
    }

    let mut baselines = 0;
    let mut definitions: BTreeMap<(&str, &str), (&str, &Question)> = BTreeMap::new();
    for id in doc.questionnaire_ids() {
        let variants = doc.variants(id);
        let mut seen_langs = HashSet::new();
        for q in doc.questionnaires.iter().filter(|q| q.id == id) {
            if !seen_langs.insert(q.language.as_str()) {
                report.errors.push(
                    Issue::new("E_DUP_VARIANT", Location::Questionnaire, format!("language `{}` appears twice", q.language))
                        .scoped(format!("{id}/{}", q.language)),
                );
            }
        }
        for lang in languages.iter().filter(|l| !variants.contains_key(l.as_str())) {
            report.errors.push(
                Issue::new("E_LANG_GAP", Location::Questionnaire, format!("no `{lang}` variant"))
                    .scoped(id.to_string()),
            );
        }
        if variants.values().next().map(|q| q.kind) == Some(QuestionnaireKind::Baseline) {
            baselines += 1;
        }
        report.merge(check_cross_language(&variants).scoped(id));

        for q in variants.values() {
            for question in q.questions() {
                match definitions.get(&(question.variable.as_str(), q.language.as_str())) {
                    Some((other, existing)) if *other != id && *existing != question => {
                        report.errors.push(
                            Issue::new(
                                "E_DUP_VARIABLE",
                                Location::Variable { variable: question.variable.clone() },
                                format!("`{}` is defined differently in `{other}`", question.variable),
                            )
                            .scoped(format!("{id}/{}", q.language)),
                        );
                    }
                    Some(_) => {}
                    None => {
                        definitions.insert((&question.variable, &q.language), (id, question));
                    }
                }
            }
        }
    }
    if baselines != 1 {
        report.errors.push(Issue::new(
            "E_BASELINE_COUNT",
            Location::Questionnaire,
            format!("study has {baselines} baseline questionnaires, expected exactly 1"),
        ));
    }

    let variables: BTreeSet<String> = definitions.keys().map(|(v, _)| v.to_string()).collect();
    report.merge(validate_rules(&doc.feedback, &variables, &meta.languages));
    report
}

/// Checks feedback rule specs: unique keys, parsable and bound conditions,
/// texts for every language.
pub fn validate_rules(rules: &[RuleSpec], variables: &BTreeSet<String>, languages: &[String]) -> ValidationReport {
    let mut report = ValidationReport::default();
    let mut keys = HashSet::new();
    for spec in rules {
        let loc = || Location::Feedback { key: spec.key.clone() };
        if spec.key.is_empty() {
            report.errors.push(Issue::new("E_FEEDBACK_KEY", loc(), "feedback key is empty"));
        }
        if !keys.insert(spec.key.as_str()) {
            report.errors.push(Issue::new("E_DUP_KEY", loc(), format!("key `{}` is used twice", spec.key)));
        }
        match spec.compile() {
            Ok(rule) => {
                if let Err(e) = bind(&rule.condition, variables) {
                    report.errors.push(Issue::new(e.code(), loc(), e.to_string()));
                }
            }
            Err(e) => report.errors.push(Issue::new(e.code(), loc(), e.to_string())),
        }
        for lang in languages.iter().filter(|l| !spec.texts.contains_key(*l)) {
            report.errors.push(Issue::new("E_LANG_GAP", loc(), format!("no `{lang}` text")));
        }
    }
    report
}

/// Checks a submitted answer map against a questionnaire version.
///
/// Question issues come in element order, followed by unknown variables in
/// lexical order.
pub fn validate_answers(q: &Questionnaire, answers: &Answers) -> Vec<Issue> {
    let mut issues = Vec::new();
    for question in q.questions() {
        let loc = || Location::Variable { variable: question.variable.clone() };
        let Some(answer) = answers.get(&question.variable) else {
            if !question.optional {
                issues.push(Issue::new("E_REQUIRED", loc(), format!("`{}` is required", question.variable)));
            }
            continue;
        };
        if let Some((code, msg)) = check_answer(question, answer) {
            issues.push(Issue::new(code, loc(), msg));
        }
    }
    for var in answers.keys().filter(|v| q.question(v).is_none()) {
        issues.push(Issue::new(
            "E_UNKNOWN_VARIABLE",
            Location::Variable { variable: var.clone() },
            format!("`{var}` is not a question of {} v{}", q.id, q.version),
        ));
    }
    issues
}

fn check_answer(question: &Question, answer: &AnswerValue) -> Option<(&'static str, String)> {
    let codes: Vec<i64> = question.options.iter().map(|o| o.code).collect();
    let wrong_type = || Some(("E_ANSWER_TYPE", format!("unexpected answer shape for {} question", question.question_type)));
    let illegal = |v: &dyn fmt::Display| Some(("E_ILLEGAL_CODE", format!("{v} is not a legal answer code")));
    match (question.question_type, answer) {
        (QuestionType::SingleChoice, AnswerValue::Code(c)) => (!codes.contains(c)).then(|| illegal(c)).flatten(),
        (QuestionType::MultiChoice, AnswerValue::Codes(cs)) => {
            let mut seen = HashSet::new();
            cs.iter().find(|c| !codes.contains(c) || !seen.insert(**c)).and_then(|c| illegal(c))
        }
        (QuestionType::Yesno, AnswerValue::Code(c)) => {
            let legal = if codes.is_empty() { *c == 0 || *c == 1 } else { codes.contains(c) };
            (!legal).then(|| illegal(c)).flatten()
        }
        (QuestionType::Slider, AnswerValue::Code(c)) => {
            let ok = question.slider.is_some_and(|r| r.admits(*c as f64));
            (!ok).then(|| illegal(c)).flatten()
        }
        (QuestionType::TextInput, AnswerValue::Text(_)) => None,
        (QuestionType::Date, AnswerValue::Text(s)) => chrono::NaiveDate::parse_from_str(s, "%Y-%m-%d")
            .is_err()
            .then(|| ("E_ANSWER_TYPE", format!("`{s}` is not a YYYY-MM-DD date"))),
        _ => wrong_type(),
    }
}
