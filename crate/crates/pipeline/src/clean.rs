use crate::workbook::Workbook;

/// Trims and collapses every whitespace run (line breaks included) to a
/// single space.
pub fn clean_text(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Normalizes every text field: labels, option texts, meta values and
/// feedback texts. Identifiers, codes and rules are trimmed only.
pub fn clean_strings(mut w: Workbook) -> Workbook {
    for (k, v) in &mut w.meta_rows {
        *k = k.trim().to_string();
        *v = clean_text(v);
    }
    for row in w.sheets.values_mut().flatten() {
        for field in [&mut row.elem_type, &mut row.question_type, &mut row.optional, &mut row.variable, &mut row.reference, &mut row.codes] {
            *field = field.trim().to_string();
        }
        for text in row.labels.values_mut().chain(row.options.values_mut()) {
            *text = clean_text(text);
        }
    }
    for row in &mut w.feedback_rows {
        row.key = row.key.trim().to_string();
        row.rule = row.rule.trim().to_string();
        for text in row.texts.values_mut() {
            *text = clean_text(text);
        }
    }
    w
}
