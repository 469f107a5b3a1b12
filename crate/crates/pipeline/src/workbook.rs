//! The on-disk workbook: a directory of CSV files.
//!
//! ```text
//! study.csv     key,value
//! baseline.csv  elem_type,question_type,optional,variable,ref,codes,label_<lang>,options_<lang>,...
//! followup.csv  same columns (optional file)
//! feedback.csv  key,rule,text_<lang>,... (optional file)
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::Path;

use ema_core::validate::{Issue, Location};

use crate::table::{parse_table, write_record, Table};
use crate::PipelineError;

pub const STUDY_FILE: &str = "study.csv";
pub const SHEETS: [&str; 2] = ["baseline", "followup"];
pub const FEEDBACK_FILE: &str = "feedback.csv";

const ELEMENT_COLUMNS: [&str; 6] = ["elem_type", "question_type", "optional", "variable", "ref", "codes"];

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ElementRow {
    pub line: usize,
    pub elem_type: String,
    pub question_type: String,
    pub optional: String,
    pub variable: String,
    /// The `ref` column: a baseline variable whose content is copied.
    pub reference: String,
    pub codes: String,
    pub labels: BTreeMap<String, String>,
    pub options: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FeedbackRow {
    pub line: usize,
    pub key: String,
    pub rule: String,
    pub texts: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Workbook {
    pub meta_rows: Vec<(String, String)>,
    /// Sheet name to rows, in file order. `baseline` is always present.
    pub sheets: BTreeMap<String, Vec<ElementRow>>,
    /// Languages with `label_`/`options_` columns, per sheet, in header order.
    pub sheet_languages: BTreeMap<String, Vec<String>>,
    pub feedback_rows: Vec<FeedbackRow>,
    pub feedback_languages: Vec<String>,
    pub warnings: Vec<Issue>,
}

impl Workbook {
    /// Number of element rows across all sheets.
    pub fn element_rows(&self) -> usize {
        self.sheets.values().map(Vec::len).sum()
    }
}

fn read(dir: &Path, name: &str, required: bool, errors: &mut Vec<Issue>) -> Result<Option<String>, PipelineError> {
    let path = dir.join(name);
    match fs::read(&path) {
        Ok(bytes) => match String::from_utf8(bytes) {
            Ok(s) => Ok(Some(s)),
            Err(e) => {
                errors.push(Issue::new(
                    "E_BAD_CSV",
                    Location::File { path: name.into() },
                    format!("not valid UTF-8 (byte {})", e.utf8_error().valid_up_to()),
                ));
                Ok(None)
            }
        },
        Err(e) if e.kind() == io::ErrorKind::NotFound => {
            if required {
                errors.push(Issue::new("E_MISSING_FILE", Location::File { path: name.into() }, format!("{name} is missing")));
            }
            Ok(None)
        }
        Err(source) => Err(PipelineError::Io { path, source }),
    }
}

fn table(name: &str, text: &str, errors: &mut Vec<Issue>) -> Option<Table> {
    let sheet = name.trim_end_matches(".csv");
    match parse_table(text) {
        Ok(t) => Some(t),
        Err(e) => {
            errors.push(Issue::new("E_BAD_CSV", Location::Row { sheet: sheet.into(), line: e.line }, e.message));
            None
        }
    }
}

fn header_error(file: &str, msg: String) -> Issue {
    Issue::new("E_BAD_HEADER", Location::File { path: file.into() }, msg)
}

/// Maps header names to column indices; reports duplicates and missing
/// required columns.
fn columns<'a>(file: &str, header: &'a [String], required: &[&str], errors: &mut Vec<Issue>) -> BTreeMap<&'a str, usize> {
    let mut map = BTreeMap::new();
    for (i, h) in header.iter().enumerate() {
        if map.insert(h.trim(), i).is_some() {
            errors.push(header_error(file, format!("column `{}` appears twice", h.trim())));
        }
    }
    for r in required {
        if !map.contains_key(r) {
            errors.push(header_error(file, format!("required column `{r}` is missing")));
        }
    }
    map
}

fn parse_sheet(
    name: &str,
    t: &Table,
    errors: &mut Vec<Issue>,
    warnings: &mut Vec<Issue>,
) -> (Vec<ElementRow>, Vec<String>) {
    let file = format!("{name}.csv");
    let cols = columns(&file, &t.header, &["elem_type"], errors);
    let mut languages = Vec::new();
    for h in &t.header {
        let h = h.trim();
        if let Some(lang) = h.strip_prefix("label_").or_else(|| h.strip_prefix("options_")) {
            if !lang.is_empty() && !languages.iter().any(|l| l == lang) {
                languages.push(lang.to_string());
            }
        } else if !ELEMENT_COLUMNS.contains(&h) {
            warnings.push(Issue::new("W_UNKNOWN_COLUMN", Location::File { path: file.clone() }, format!("column `{h}` is ignored")));
        }
    }
    for lang in &languages {
        for (have, need) in [("label_", "options_"), ("options_", "label_")] {
            if cols.contains_key(format!("{have}{lang}").as_str()) && !cols.contains_key(format!("{need}{lang}").as_str()) {
                errors.push(header_error(&file, format!("`{have}{lang}` has no matching `{need}{lang}` column")));
            }
        }
    }
    let get = |fields: &[String], col: &str| cols.get(col).map(|&i| fields[i].clone()).unwrap_or_default();
    let rows = t
        .rows
        .iter()
        .map(|r| {
            let per_lang = |prefix: &str| {
                languages
                    .iter()
                    .filter_map(|l| cols.get(format!("{prefix}{l}").as_str()).map(|&i| (l.clone(), r.fields[i].clone())))
                    .collect()
            };
            ElementRow {
                line: r.line,
                elem_type: get(&r.fields, "elem_type"),
                question_type: get(&r.fields, "question_type"),
                optional: get(&r.fields, "optional"),
                variable: get(&r.fields, "variable"),
                reference: get(&r.fields, "ref"),
                codes: get(&r.fields, "codes"),
                labels: per_lang("label_"),
                options: per_lang("options_"),
            }
        })
        .collect();
    (rows, languages)
}

/// Reads a workbook directory. All problems found are reported together.
pub fn parse_workbook(dir: &Path) -> Result<Workbook, PipelineError> {
    let mut errors = Vec::new();
    let mut w = Workbook::default();

    if let Some(text) = read(dir, STUDY_FILE, true, &mut errors)? {
        if let Some(t) = table(STUDY_FILE, &text, &mut errors) {
            let cols = columns(STUDY_FILE, &t.header, &["key", "value"], &mut errors);
            if let (Some(&k), Some(&v)) = (cols.get("key"), cols.get("value")) {
                w.meta_rows = t.rows.iter().map(|r| (r.fields[k].clone(), r.fields[v].clone())).collect();
            }
        }
    }

    for (i, sheet) in SHEETS.iter().enumerate() {
        let file = format!("{sheet}.csv");
        if let Some(text) = read(dir, &file, i == 0, &mut errors)? {
            if let Some(t) = table(&file, &text, &mut errors) {
                let (rows, langs) = parse_sheet(sheet, &t, &mut errors, &mut w.warnings);
                w.sheets.insert(sheet.to_string(), rows);
                w.sheet_languages.insert(sheet.to_string(), langs);
            }
        }
    }

    if let Some(text) = read(dir, FEEDBACK_FILE, false, &mut errors)? {
        if let Some(t) = table(FEEDBACK_FILE, &text, &mut errors) {
            let cols = columns(FEEDBACK_FILE, &t.header, &["key", "rule"], &mut errors);
            for h in &t.header {
                match h.trim().strip_prefix("text_") {
                    Some(lang) if !lang.is_empty() => w.feedback_languages.push(lang.to_string()),
                    _ if ["key", "rule"].contains(&h.trim()) => {}
                    _ => w.warnings.push(Issue::new(
                        "W_UNKNOWN_COLUMN",
                        Location::File { path: FEEDBACK_FILE.into() },
                        format!("column `{}` is ignored", h.trim()),
                    )),
                }
            }
            if let (Some(&k), Some(&r)) = (cols.get("key"), cols.get("rule")) {
                w.feedback_rows = t
                    .rows
                    .iter()
                    .map(|row| FeedbackRow {
                        line: row.line,
                        key: row.fields[k].clone(),
                        rule: row.fields[r].clone(),
                        texts: w
                            .feedback_languages
                            .iter()
                            .map(|l| (l.clone(), row.fields[cols[format!("text_{l}").as_str()]].clone()))
                            .collect(),
                    })
                    .collect();
            }
        }
    }

    if errors.is_empty() {
        Ok(w)
    } else {
        Err(PipelineError::Invalid(errors))
    }
}

/// Writes the workbook back as CSV files with canonical column order.
pub fn write_workbook(w: &Workbook, dir: &Path) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    let mut study = String::new();
    write_record(&mut study, &["key".into(), "value".into()]);
    for (k, v) in &w.meta_rows {
        write_record(&mut study, &[k.clone(), v.clone()]);
    }
    fs::write(dir.join(STUDY_FILE), study)?;

    for (sheet, rows) in &w.sheets {
        let langs = w.sheet_languages.get(sheet).cloned().unwrap_or_default();
        let mut header: Vec<String> = ELEMENT_COLUMNS.iter().map(|c| c.to_string()).collect();
        for l in &langs {
            header.push(format!("label_{l}"));
            header.push(format!("options_{l}"));
        }
        let mut out = String::new();
        write_record(&mut out, &header);
        for r in rows {
            let mut fields = vec![
                r.elem_type.clone(),
                r.question_type.clone(),
                r.optional.clone(),
                r.variable.clone(),
                r.reference.clone(),
                r.codes.clone(),
            ];
            for l in &langs {
                fields.push(r.labels.get(l).cloned().unwrap_or_default());
                fields.push(r.options.get(l).cloned().unwrap_or_default());
            }
            write_record(&mut out, &fields);
        }
        fs::write(dir.join(format!("{sheet}.csv")), out)?;
    }

    if !w.feedback_rows.is_empty() || !w.feedback_languages.is_empty() {
        let mut header = vec!["key".to_string(), "rule".to_string()];
        header.extend(w.feedback_languages.iter().map(|l| format!("text_{l}")));
        let mut out = String::new();
        write_record(&mut out, &header);
        for r in &w.feedback_rows {
            let mut fields = vec![r.key.clone(), r.rule.clone()];
            fields.extend(w.feedback_languages.iter().map(|l| r.texts.get(l).cloned().unwrap_or_default()));
            write_record(&mut out, &fields);
        }
        fs::write(dir.join(FEEDBACK_FILE), out)?;
    }
    Ok(())
}
