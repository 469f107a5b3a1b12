//! The hand-written reader against the `csv` crate.

use std::fs;
use std::path::Path;

use ema_pipeline::table::{parse_records, parse_table, write_table, Record, Table};
use ema_pipeline::{clean_strings, clean_text, parse_workbook, write_workbook};
use proptest::prelude::*;

fn with_csv_crate(text: &str) -> Vec<Vec<String>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(text.as_bytes());
    reader
        .records()
        .map(|r| r.unwrap().iter().map(str::to_string).collect())
        .filter(|r: &Vec<String>| !(r.len() == 1 && r[0].is_empty()))
        .collect()
}

#[test]
fn fixture_files_agree_with_csv_crate() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let mut files = Vec::new();
    for dir in [root.join("mini")].into_iter().chain(ema_pipeline::workbook_dirs(&root.join("paperlike")).unwrap()) {
        for entry in fs::read_dir(dir).unwrap() {
            files.push(entry.unwrap().path());
        }
    }
    assert!(files.len() > 20);
    for f in files {
        let text = fs::read_to_string(&f).unwrap();
        let ours: Vec<Vec<String>> = parse_records(&text).unwrap().into_iter().map(|r| r.fields).collect();
        assert_eq!(ours, with_csv_crate(&text), "{}", f.display());
    }
}

#[test]
fn workbook_round_trips_through_csv_files() {
    let mini = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/mini");
    let w = parse_workbook(&mini).unwrap();
    let out = tempfile::tempdir().unwrap();
    write_workbook(&w, out.path()).unwrap();
    let back = parse_workbook(out.path()).unwrap();
    let strip = |mut w: ema_pipeline::Workbook| {
        w.sheets.values_mut().flatten().for_each(|r| r.line = 0);
        w.feedback_rows.iter_mut().for_each(|r| r.line = 0);
        w
    };
    assert_eq!(strip(back), strip(w.clone()));
    let embedded = &w.sheets["baseline"][1].labels["en"];
    assert_eq!(embedded, "Thank you for taking part.\nAnswers are anonymous.");
    assert_eq!(clean_strings(w).sheets["baseline"][1].labels["en"], "Thank you for taking part. Answers are anonymous.");
}

fn field() -> impl Strategy<Value = String> {
    proptest::string::string_regex("[a-zA-Zäö ,\"\r\n;]{0,12}").unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn written_tables_read_back_identically(rows in prop::collection::vec(prop::collection::vec(field(), 3), 0..8)) {
        let table = Table {
            header: vec!["a".into(), "b".into(), "c".into()],
            rows: rows.iter().map(|r| Record { line: 0, fields: r.clone() }).collect(),
        };
        let text = write_table(&table);
        let back = parse_table(&text).unwrap();
        prop_assert_eq!(back.rows.iter().map(|r| r.fields.clone()).collect::<Vec<_>>(), rows);
        prop_assert_eq!(parse_records(&text).unwrap().into_iter().map(|r| r.fields).collect::<Vec<_>>(), with_csv_crate(&text));
    }

    #[test]
    fn reader_never_panics(text in "[a,\"\r\n ]{0,30}") {
        let _ = parse_records(&text);
    }

    #[test]
    fn clean_text_is_idempotent(s in "[ \t\r\na-zA-Z.?äß]{0,40}") {
        let once = clean_text(&s);
        prop_assert_eq!(clean_text(&once), once.clone());
        prop_assert!(!once.starts_with(' ') && !once.ends_with(' ') && !once.contains("  "));
        prop_assert!(!once.contains(['\n', '\r', '\t']));
    }
}
