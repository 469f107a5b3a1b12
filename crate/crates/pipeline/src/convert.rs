//! Workbook to canonical questionnaire document.

use std::collections::{BTreeMap, BTreeSet};

use ema_core::feedback::RuleSpec;
use ema_core::model::{
    Question, QuestionType, Questionnaire, QuestionnaireDocument, QuestionnaireElement, QuestionnaireKind,
    ResponseOption, ScheduleSpec, SliderRange, StudyMeta,
};
use ema_core::time::TimeOfDay;
use ema_core::validate::{validate_document, Issue, Location};

use crate::workbook::{ElementRow, Workbook};

#[derive(Debug, Clone, PartialEq)]
pub struct Conversion {
    pub document: QuestionnaireDocument,
    pub warnings: Vec<Issue>,
}

pub fn questionnaire_id(study_id: &str, kind: QuestionnaireKind) -> String {
    format!("{study_id}-{kind}")
}

fn split_list(s: &str) -> Vec<String> {
    if s.trim().is_empty() {
        return Vec::new();
    }
    s.split(';').map(|p| p.trim().to_string()).collect()
}

fn meta_issue(key: &str, code: &str, msg: String) -> Issue {
    Issue::new(code, Location::Meta { key: key.into() }, msg)
}

fn parse_meta(rows: &[(String, String)], errors: &mut Vec<Issue>, warnings: &mut Vec<Issue>) -> StudyMeta {
    let mut map: BTreeMap<&str, &str> = BTreeMap::new();
    for (k, v) in rows {
        if map.insert(k, v).is_some() {
            errors.push(meta_issue(k, "E_META", format!("key `{k}` appears twice")));
        }
    }
    let study_id = map.get("study_id").map(|s| s.to_string()).unwrap_or_default();
    if study_id.is_empty() {
        errors.push(meta_issue("study_id", "E_META", "study_id is missing".into()));
    } else if !study_id.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
        errors.push(meta_issue("study_id", "E_META", format!("study_id `{study_id}` must be [A-Za-z0-9_-]")));
    }
    let languages: Vec<String> = map.get("languages").map(|s| split_list(s)).unwrap_or_default();

    let mut schedule = ScheduleSpec::weekly();
    let number = |key: &str, errors: &mut Vec<Issue>| -> Option<u32> {
        let v = map.get(key)?;
        match v.parse::<u32>() {
            Ok(n) => Some(n),
            Err(_) => {
                errors.push(meta_issue(key, "E_META", format!("`{v}` is not a non-negative integer")));
                None
            }
        }
    };
    match (number("interval_hours", errors), number("interval_days", errors)) {
        (Some(h), None) => schedule.interval_hours = h,
        (None, Some(d)) => schedule.interval_hours = d.saturating_mul(24),
        (Some(_), Some(_)) => {
            errors.push(meta_issue("interval_days", "E_META", "give interval_hours or interval_days, not both".into()))
        }
        (None, None) => {}
    }
    if let Some(n) = number("max_pending", errors) {
        schedule.max_pending = n;
    }
    for (key, slot) in [("window_start", &mut schedule.window_start), ("window_end", &mut schedule.window_end)] {
        if let Some(v) = map.get(key) {
            match v.parse::<TimeOfDay>() {
                Ok(t) => *slot = t,
                Err(_) => errors.push(meta_issue(key, "E_META", format!("`{v}` is not an HH:MM time"))),
            }
        }
    }

    let mut names = BTreeMap::new();
    let mut descriptions = BTreeMap::new();
    const KNOWN: [&str; 7] =
        ["study_id", "languages", "interval_hours", "interval_days", "window_start", "window_end", "max_pending"];
    for (k, v) in &map {
        if let Some(lang) = k.strip_prefix("name_") {
            names.insert(lang.to_string(), v.to_string());
        } else if let Some(lang) = k.strip_prefix("description_") {
            descriptions.insert(lang.to_string(), v.to_string());
        } else if !KNOWN.contains(k) {
            warnings.push(meta_issue(k, "W_UNKNOWN_KEY", format!("key `{k}` is ignored")));
        }
    }
    StudyMeta { study_id, languages, names, descriptions, schedule }
}

fn row_issue(sheet: &str, row: &ElementRow, code: &str, msg: String) -> Issue {
    Issue::new(code, Location::Row { sheet: sheet.into(), line: row.line }, msg)
}

fn parse_flag(s: &str) -> Option<bool> {
    match s.to_ascii_lowercase().as_str() {
        "" | "0" | "false" | "no" | "n" => Some(false),
        "1" | "true" | "yes" | "y" | "x" => Some(true),
        _ => None,
    }
}

/// A row turned into one element per language.
type Built = BTreeMap<String, QuestionnaireElement>;

fn build_question(sheet: &str, row: &ElementRow, languages: &[String], errors: &mut Vec<Issue>) -> Option<Built> {
    let start = errors.len();
    let question_type = match row.question_type.to_ascii_lowercase().parse::<QuestionType>() {
        Ok(t) => Some(t),
        Err(_) => {
            errors.push(row_issue(sheet, row, "E_BAD_QUESTION_TYPE", format!("unknown question type `{}`", row.question_type)));
            None
        }
    };
    let optional = parse_flag(&row.optional).unwrap_or_else(|| {
        errors.push(row_issue(sheet, row, "E_BAD_FLAG", format!("optional must be 0/1, got `{}`", row.optional)));
        false
    });
    let raw_codes = split_list(&row.codes);

    let mut slider = None;
    let mut codes = Vec::new();
    if question_type == Some(QuestionType::Slider) {
        let nums: Vec<Option<f64>> = raw_codes.iter().map(|c| c.parse::<f64>().ok()).collect();
        match nums.as_slice() {
            [Some(min), Some(max), Some(step)] => slider = Some(SliderRange { min: *min, max: *max, step: *step }),
            _ => errors.push(row_issue(sheet, row, "E_BAD_CODE", format!("slider codes must be `min;max;step`, got `{}`", row.codes))),
        }
        for lang in languages {
            if !split_list(row.options.get(lang).map_or("", String::as_str)).is_empty() {
                errors.push(
                    row_issue(sheet, row, "E_CODE_MISMATCH", "slider questions take no option texts".into()).scoped(lang),
                );
            }
        }
    } else {
        for c in &raw_codes {
            match c.parse::<i64>() {
                Ok(n) => codes.push(n),
                Err(_) => errors.push(row_issue(sheet, row, "E_BAD_CODE", format!("`{c}` is not an integer code"))),
            }
        }
        for lang in languages {
            let n = split_list(row.options.get(lang).map_or("", String::as_str)).len();
            if n != raw_codes.len() {
                errors.push(
                    row_issue(sheet, row, "E_CODE_MISMATCH", format!("{} codes but {n} `{lang}` options", raw_codes.len()))
                        .scoped(lang),
                );
            }
        }
    }
    if errors.len() > start {
        return None;
    }
    let question_type = question_type?;
    Some(
        languages
            .iter()
            .map(|lang| {
                let texts = split_list(row.options.get(lang).map_or("", String::as_str));
                let options = codes.iter().zip(texts).map(|(&code, text)| ResponseOption { code, text }).collect();
                let q = Question {
                    variable: row.variable.clone(),
                    question_type,
                    optional,
                    label: row.labels.get(lang).cloned().unwrap_or_default(),
                    options,
                    slider,
                };
                (lang.clone(), QuestionnaireElement::Question(q))
            })
            .collect(),
    )
}

fn build_row(
    sheet: &str,
    row: &ElementRow,
    languages: &[String],
    baseline: &BTreeMap<String, Built>,
    failed_baseline: &BTreeSet<String>,
    errors: &mut Vec<Issue>,
) -> Option<Built> {
    let per_lang = |f: &dyn Fn(&str) -> QuestionnaireElement| -> Built {
        languages.iter().map(|l| (l.clone(), f(l))).collect()
    };
    let label = |lang: &str| row.labels.get(lang).cloned().unwrap_or_default();
    let kind = row.elem_type.to_ascii_lowercase();

    if !row.reference.is_empty() {
        if sheet != "followup" {
            errors.push(row_issue(sheet, row, "E_DANGLING_REF", "ref is only allowed in the followup sheet".into()));
            return None;
        }
        if kind != "question" {
            errors.push(row_issue(sheet, row, "E_ELEM_TYPE", format!("ref rows must be questions, not `{}`", row.elem_type)));
            return None;
        }
        let has_content = !row.question_type.is_empty()
            || !row.optional.is_empty()
            || !row.codes.is_empty()
            || row.labels.values().chain(row.options.values()).any(|t| !t.is_empty())
            || (!row.variable.is_empty() && row.variable != row.reference);
        if has_content {
            errors.push(row_issue(sheet, row, "E_REF_CONTENT", "a ref row must not carry its own content".into()));
            return None;
        }
        return match baseline.get(&row.reference) {
            Some(built) => Some(built.clone()),
            // the target row already failed and was reported
            None if failed_baseline.contains(&row.reference) => None,
            None => {
                errors.push(row_issue(
                    sheet,
                    row,
                    "E_DANGLING_REF",
                    format!("ref `{}` names no baseline question", row.reference),
                ));
                None
            }
        };
    }

    match kind.as_str() {
        "page" | "pagebreak" => Some(per_lang(&|_| QuestionnaireElement::Page)),
        "headline" => Some(per_lang(&|l| QuestionnaireElement::Headline { text: label(l) })),
        "text" | "textfield" => Some(per_lang(&|l| QuestionnaireElement::Text { text: label(l) })),
        "media" => Some(per_lang(&|l| QuestionnaireElement::Media { uri: label(l) })),
        "question" => build_question(sheet, row, languages, errors),
        _ => {
            errors.push(row_issue(sheet, row, "E_ELEM_TYPE", format!("unknown element type `{}`", row.elem_type)));
            None
        }
    }
}

/// Converts a cleaned workbook. On failure every error found is returned,
/// including those of the final document validation.
pub fn convert(w: &Workbook) -> Result<Conversion, Vec<Issue>> {
    let mut errors = Vec::new();
    let mut warnings = w.warnings.clone();
    let meta = parse_meta(&w.meta_rows, &mut errors, &mut warnings);
    let languages = meta.languages.clone();

    for (sheet, cols) in &w.sheet_languages {
        let file = format!("{sheet}.csv");
        for lang in languages.iter().filter(|l| !cols.contains(l)) {
            errors.push(Issue::new("E_LANG_GAP", Location::File { path: file.clone() }, format!("no `{lang}` columns")));
        }
    }
    for lang in &languages {
        if !w.feedback_rows.is_empty() && !w.feedback_languages.contains(lang) {
            errors.push(Issue::new("E_LANG_GAP", Location::File { path: "feedback.csv".into() }, format!("no `text_{lang}` column")));
        }
    }

    let mut questionnaires = Vec::new();
    let mut baseline_questions: BTreeMap<String, Built> = BTreeMap::new();
    let mut failed_baseline: BTreeSet<String> = BTreeSet::new();
    for (sheet, kind) in [("baseline", QuestionnaireKind::Baseline), ("followup", QuestionnaireKind::Followup)] {
        let Some(rows) = w.sheets.get(sheet) else { continue };
        // rows are built only for languages that have columns; gaps are reported above
        let present: Vec<String> =
            languages.iter().filter(|l| w.sheet_languages[sheet].contains(l)).cloned().collect();
        let mut per_lang: BTreeMap<String, Vec<QuestionnaireElement>> =
            languages.iter().map(|l| (l.clone(), Vec::new())).collect();
        for row in rows {
            let before = errors.len();
            let built = build_row(sheet, row, &present, &baseline_questions, &failed_baseline, &mut errors);
            if kind == QuestionnaireKind::Baseline && errors.len() > before {
                failed_baseline.insert(row.variable.clone());
            }
            let Some(built) = built else { continue };
            if kind == QuestionnaireKind::Baseline && row.elem_type.eq_ignore_ascii_case("question") {
                baseline_questions.insert(row.variable.clone(), built.clone());
            }
            for (lang, element) in built {
                per_lang.get_mut(&lang).expect("declared language").push(element);
            }
        }
        let id = questionnaire_id(&meta.study_id, kind);
        for lang in &languages {
            questionnaires.push(Questionnaire {
                id: id.clone(),
                study_id: meta.study_id.clone(),
                kind,
                language: lang.clone(),
                version: 1,
                elements: per_lang.remove(lang).unwrap_or_default(),
            });
        }
    }

    let feedback = w
        .feedback_rows
        .iter()
        .map(|r| RuleSpec { key: r.key.clone(), rule: r.rule.clone(), texts: r.texts.clone() })
        .collect();
    let document = QuestionnaireDocument { meta, questionnaires, feedback };

    if errors.is_empty() {
        let report = validate_document(&document);
        errors.extend(report.errors);
        warnings.extend(report.warnings);
    }
    if errors.is_empty() {
        Ok(Conversion { document, warnings })
    } else {
        Err(errors)
    }
}
