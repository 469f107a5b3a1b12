//! Deterministic generator for the five-study `paperlike` workbook corpus.
//!
//! Per-kind element totals over the ten questionnaires are 117 pages,
//! 159 text blocks, 976 questions, 24 headlines and no media; the studies
//! carry 54 feedback rules between them.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;

pub const STUDIES: [&str; 5] = ["family", "mood", "physical", "stress", "work"];
pub const PAGES: [usize; 10] = [12, 12, 12, 12, 12, 12, 12, 11, 11, 11];
pub const TEXTS: [usize; 10] = [16, 16, 16, 16, 16, 16, 16, 16, 16, 15];
pub const QUESTIONS: [usize; 10] = [98, 98, 98, 98, 98, 98, 97, 97, 97, 97];
pub const HEADLINES: [usize; 10] = [3, 3, 3, 3, 2, 2, 2, 2, 2, 2];
pub const RULES: [usize; 5] = [11, 11, 11, 11, 10];
/// Follow-up questions that reference a baseline question.
pub const REFS_PER_FOLLOWUP: usize = 6;

fn quote(field: &str) -> String {
    if field.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

fn line(fields: &[String]) -> String {
    let mut s = fields.iter().map(|f| quote(f)).collect::<Vec<_>>().join(",");
    s.push('\n');
    s
}

/// Sloppy spacing of the kind spreadsheet exports produce.
fn messy(rng: &mut impl Rng, s: String) -> String {
    match rng.random_range(0..12) {
        0 => format!("{s} "),
        1 => format!("  {s}"),
        2 => s.replacen(' ', "  ", 1),
        3 => s.replacen(' ', "\n", 1),
        _ => s,
    }
}

struct QuestionShape {
    qtype: &'static str,
    codes: Vec<String>,
    options_en: Vec<&'static str>,
    options_de: Vec<&'static str>,
}

fn shape(rng: &mut impl Rng) -> QuestionShape {
    let likert = |n: usize| QuestionShape {
        qtype: "single_choice",
        codes: (0..n).map(|c| c.to_string()).collect(),
        options_en: ["never", "rarely", "sometimes", "often", "always"][..n].to_vec(),
        options_de: ["nie", "selten", "manchmal", "oft", "immer"][..n].to_vec(),
    };
    match rng.random_range(0..20) {
        0..=9 => likert(4),
        10..=12 => likert(5),
        13 | 14 => QuestionShape {
            qtype: "yesno",
            codes: vec!["1".into(), "0".into()],
            options_en: vec!["yes", "no"],
            options_de: vec!["ja", "nein"],
        },
        15 => QuestionShape {
            qtype: "multi_choice",
            codes: vec!["1".into(), "2".into(), "4".into(), "8".into()],
            options_en: vec!["home", "work", "outdoors", "elsewhere"],
            options_de: vec!["zu Hause", "Arbeit", "draußen", "anderswo"],
        },
        16 | 17 => QuestionShape {
            qtype: "slider",
            codes: vec!["0".into(), "10".into(), "1".into()],
            options_en: vec![],
            options_de: vec![],
        },
        18 => QuestionShape { qtype: "text_input", codes: vec![], options_en: vec![], options_de: vec![] },
        _ => QuestionShape { qtype: "date", codes: vec![], options_en: vec![], options_de: vec![] },
    }
}

const HEADER: &str = "elem_type,question_type,optional,variable,ref,codes,label_de,options_de,label_en,options_en\n";

fn sheet(rng: &mut impl Rng, study: &str, j: usize, baseline_vars: &[String]) -> (String, Vec<String>) {
    let followup = j % 2 == 1;
    let mut kinds: Vec<&str> = Vec::new();
    kinds.extend(std::iter::repeat_n("page", PAGES[j]));
    kinds.extend(std::iter::repeat_n("text", TEXTS[j] - 1));
    kinds.extend(std::iter::repeat_n("question", QUESTIONS[j]));
    kinds.extend(std::iter::repeat_n("headline", HEADLINES[j] - 1));
    kinds.shuffle(rng);
    // every questionnaire opens with a headline and an introduction
    kinds.insert(0, "text");
    kinds.insert(0, "headline");

    let mut out = String::from(HEADER);
    let mut vars = Vec::new();
    let mut q = 0;
    for (n, kind) in kinds.iter().enumerate() {
        let fields: Vec<String> = match *kind {
            "page" => vec!["page".into(), "".into(), "".into(), "".into(), "".into(), "".into(), "".into(), "".into(), "".into(), "".into()],
            "headline" | "text" => {
                let de = messy(rng, format!("Abschnitt {n} der Studie {study}"));
                let en = messy(rng, format!("Section {n} of the {study} study"));
                vec![kind.to_string(), "".into(), "".into(), "".into(), "".into(), "".into(), de, "".into(), en, "".into()]
            }
            _ => {
                q += 1;
                if followup && q <= REFS_PER_FOLLOWUP {
                    let target = baseline_vars[q * 7].clone();
                    vars.push(target.clone());
                    vec!["question".into(), "".into(), "".into(), "".into(), target, "".into(), "".into(), "".into(), "".into(), "".into()]
                } else if !followup && q == 1 {
                    vars.push("age".into());
                    vec![
                        "question".into(),
                        "slider".into(),
                        "0".into(),
                        "age".into(),
                        "".into(),
                        "12;120;1".into(),
                        "Wie alt sind Sie?".into(),
                        "".into(),
                        "How old are you?".into(),
                        "".into(),
                    ]
                } else {
                    let var = format!("{}{q:03}", if followup { 'f' } else { 'b' });
                    vars.push(var.clone());
                    let s = shape(rng);
                    let optional = if rng.random_bool(0.15) { "1" } else { "0" };
                    let de = messy(rng, format!("Frage {q}: Wie ging es Ihnen ({study})?"));
                    let en = messy(rng, format!("Question {q}: How have you been ({study})?"));
                    vec![
                        "question".into(),
                        s.qtype.into(),
                        optional.into(),
                        var,
                        "".into(),
                        s.codes.join(";"),
                        de,
                        s.options_de.join(";"),
                        en,
                        s.options_en.join(";"),
                    ]
                }
            }
        };
        out.push_str(&line(&fields));
    }
    (out, vars)
}

fn rules(rng: &mut impl Rng, n: usize, baseline_vars: &[String]) -> String {
    let mut out = String::from("key,rule,text_de,text_en\n");
    for i in 0..n {
        let a = rng.random_range(10..80);
        let rule = match i % 5 {
            0 => format!("sum(b{:03}..b{:03}) >= {}", a, a + 4, rng.random_range(6..12)),
            1 => format!("{} >= 2 and {} >= 2", baseline_vars[a], baseline_vars[a + 1]),
            2 => format!("not answered({}) or {} > 2", baseline_vars[a], baseline_vars[a + 2]),
            3 => format!("age >= {} and sum({}, {}) < 3", rng.random_range(18..60), baseline_vars[a], baseline_vars[a + 3]),
            _ => format!("({} == 0 or {} == 0) and not {} == 3", baseline_vars[a], baseline_vars[a + 1], baseline_vars[a + 2]),
        };
        out.push_str(&line(&[
            format!("r{:02}", i + 1),
            rule,
            format!("Rückmeldung {} zu Ihren Antworten.", i + 1),
            format!("Feedback {} on your answers.", i + 1),
        ]));
    }
    out
}

/// Relative path (`<study>/<file>.csv`) to file content.
pub fn paperlike_corpus() -> BTreeMap<String, String> {
    let mut rng = crate::rng(0x9a9e_711c);
    let mut files = BTreeMap::new();
    for (s, study) in STUDIES.iter().enumerate() {
        let study_csv = [
            "key,value\n".to_string(),
            format!("study_id,{study}\n"),
            "languages,de;en\n".into(),
            format!("name_de,Studie {study}\n"),
            format!("name_en,{study} study\n"),
            format!("description_de,\"Wöchentliche Fragen, Thema {study}.\"\n"),
            format!("description_en,\"Weekly questions, topic {study}.\"\n"),
            "interval_days,7\nwindow_start,08:00\nwindow_end,20:00\nmax_pending,1\n".into(),
        ]
        .concat();
        files.insert(format!("{study}/study.csv"), study_csv);
        let (baseline, baseline_vars) = sheet(&mut rng, study, 2 * s, &[]);
        let (followup, _) = sheet(&mut rng, study, 2 * s + 1, &baseline_vars);
        files.insert(format!("{study}/baseline.csv"), baseline);
        files.insert(format!("{study}/followup.csv"), followup);
        files.insert(format!("{study}/feedback.csv"), rules(&mut rng, RULES[s], &baseline_vars));
    }
    files
}
