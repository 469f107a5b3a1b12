//! Random questionnaires, targeted corruptions with the error code each one
//! must produce, and hand-rolled reference checks.

use std::collections::BTreeMap;

use ema_core::model::{
    ElementKind, Question, QuestionType, Questionnaire, QuestionnaireElement, QuestionnaireKind, ResponseOption,
    SliderRange,
};
use rand::seq::IndexedRandom;
use rand::Rng;

fn random_options(rng: &mut impl Rng, n: usize, lang: &str) -> Vec<ResponseOption> {
    let base = rng.random_range(-1..3);
    (0..n as i64).map(|i| ResponseOption { code: base + i, text: format!("{lang} option {i}") }).collect()
}

pub fn random_question(rng: &mut impl Rng, variable: String, lang: &str) -> Question {
    let question_type = *QuestionType::ALL.choose(rng).expect("non-empty");
    let options = match question_type {
        QuestionType::SingleChoice | QuestionType::MultiChoice => {
            let n = rng.random_range(2..7);
            random_options(rng, n, lang)
        }
        QuestionType::Yesno if rng.random_bool(0.5) => vec![
            ResponseOption { code: 1, text: format!("{lang} yes") },
            ResponseOption { code: 0, text: format!("{lang} no") },
        ],
        _ => Vec::new(),
    };
    let slider = (question_type == QuestionType::Slider).then(|| {
        let min = f64::from(rng.random_range(-5..5));
        SliderRange { min, max: min + f64::from(rng.random_range(1..100)), step: 1.0 }
    });
    Question {
        variable,
        question_type,
        optional: rng.random_bool(0.3),
        label: format!("{lang} label"),
        options,
        slider,
    }
}

/// A questionnaire satisfying every element invariant.
pub fn random_valid(rng: &mut impl Rng, lang: &str) -> Questionnaire {
    let n = rng.random_range(1..30);
    let mut next_var = 0;
    let elements = (0..n)
        .map(|_| match rng.random_range(0..10) {
            0 => QuestionnaireElement::Page,
            1 => QuestionnaireElement::Headline { text: format!("{lang} headline") },
            2 => QuestionnaireElement::Text { text: format!("{lang} text") },
            3 => QuestionnaireElement::Media { uri: "media/figure.png".into() },
            _ => {
                next_var += 1;
                QuestionnaireElement::Question(random_question(rng, format!("v{next_var}"), lang))
            }
        })
        .collect();
    Questionnaire {
        id: "study-baseline".into(),
        study_id: "study".into(),
        kind: QuestionnaireKind::Baseline,
        language: lang.into(),
        version: rng.random_range(1..5),
        elements,
    }
}

/// Applies one corruption and returns the error code it must trigger.
pub fn corrupt(rng: &mut impl Rng, q: &mut Questionnaire) -> &'static str {
    let question_idx: Vec<usize> =
        q.elements.iter().enumerate().filter(|(_, e)| e.as_question().is_some()).map(|(i, _)| i).collect();
    let pick = if question_idx.is_empty() { rng.random_range(0..2) } else { rng.random_range(0..9) };
    if pick == 0 {
        q.elements.clear();
        return "E_EMPTY";
    }
    if pick == 1 {
        q.version = 0;
        return "E_VERSION";
    }
    let i = *question_idx.choose(rng).expect("non-empty");
    let dup_source = q.elements[question_idx[0]].clone();
    let QuestionnaireElement::Question(question) = &mut q.elements[i] else { unreachable!() };
    match pick {
        2 => {
            question.variable = ["1abc", "Ab", "a-b", "", "a b"].choose(rng).expect("non-empty").to_string();
            "E_VARIABLE_NAME"
        }
        3 => {
            q.elements.push(dup_source);
            "E_DUP_VARIABLE"
        }
        4 => {
            question.question_type = if rng.random_bool(0.5) { QuestionType::SingleChoice } else { QuestionType::MultiChoice };
            question.slider = None;
            question.options.truncate(rng.random_range(0..2));
            "E_TOO_FEW_OPTIONS"
        }
        5 => {
            question.question_type = QuestionType::Yesno;
            question.slider = None;
            let n = *[1usize, 3, 4].choose(rng).expect("non-empty");
            question.options = (0..n as i64).map(|c| ResponseOption { code: c, text: "x".into() }).collect();
            "E_YESNO_OPTIONS"
        }
        6 => {
            question.question_type = *[QuestionType::TextInput, QuestionType::Date].choose(rng).expect("non-empty");
            question.slider = None;
            question.options = vec![ResponseOption { code: 1, text: "x".into() }];
            "E_UNEXPECTED_OPTIONS"
        }
        7 => {
            question.question_type = QuestionType::SingleChoice;
            question.slider = None;
            question.options = vec![
                ResponseOption { code: 4, text: "a".into() },
                ResponseOption { code: 4, text: "b".into() },
            ];
            "E_DUP_CODE"
        }
        _ => {
            question.question_type = QuestionType::Slider;
            question.options.clear();
            match rng.random_range(0..3) {
                0 => {
                    question.slider = None;
                    "E_SLIDER_MISSING"
                }
                1 => {
                    question.slider = Some(SliderRange { min: 5.0, max: 5.0, step: 1.0 });
                    "E_SLIDER_RANGE"
                }
                _ => {
                    question.slider = Some(SliderRange { min: 0.0, max: 10.0, step: 0.0 });
                    "E_SLIDER_RANGE"
                }
            }
        }
    }
}

/// Translates a questionnaire: same structure, different text.
pub fn translate(q: &Questionnaire, lang: &str) -> Questionnaire {
    let mut out = q.clone();
    out.language = lang.into();
    for e in &mut out.elements {
        match e {
            QuestionnaireElement::Headline { text } | QuestionnaireElement::Text { text } => *text = format!("[{lang}] {text}"),
            QuestionnaireElement::Question(question) => {
                question.label = format!("[{lang}] {}", question.label);
                for o in &mut question.options {
                    o.text = format!("[{lang}] {}", o.text);
                }
            }
            _ => {}
        }
    }
    out
}

/// Applies one structural perturbation to a translated variant and returns
/// the expected cross-language code, or `None` if the variant has no
/// question to perturb.
pub fn perturb_structure(rng: &mut impl Rng, q: &mut Questionnaire) -> Option<&'static str> {
    let idx: Vec<usize> = q.elements.iter().enumerate().filter(|(_, e)| e.as_question().is_some()).map(|(i, _)| i).collect();
    let i = *idx.choose(rng)?;
    let QuestionnaireElement::Question(question) = &mut q.elements[i] else { unreachable!() };
    Some(match rng.random_range(0..5) {
        0 => {
            q.elements.remove(i);
            "E_MISSING_VARIABLE"
        }
        1 => {
            question.question_type = if question.question_type == QuestionType::Date { QuestionType::TextInput } else { QuestionType::Date };
            "E_QUESTION_TYPE"
        }
        2 => {
            question.optional = !question.optional;
            "E_OPTIONAL"
        }
        3 if !question.options.is_empty() => {
            question.options.pop();
            "E_OPTION_COUNT"
        }
        3 | 4 if !question.options.is_empty() => {
            question.options[0].code += 100;
            "E_OPTION_CODES"
        }
        _ => {
            question.optional = !question.optional;
            "E_OPTIONAL"
        }
    })
}

/// Pairwise structural differences by variable, computed directly.
pub fn reference_structure_diff(a: &Questionnaire, b: &Questionnaire) -> Vec<&'static str> {
    let index = |q: &Questionnaire| -> BTreeMap<String, Question> {
        q.elements.iter().filter_map(|e| e.as_question()).map(|x| (x.variable.clone(), x.clone())).collect()
    };
    let (ia, ib) = (index(a), index(b));
    let mut out = Vec::new();
    for v in ia.keys().chain(ib.keys()) {
        match (ia.get(v), ib.get(v)) {
            (Some(x), Some(y)) => {
                if x.question_type != y.question_type {
                    out.push("E_QUESTION_TYPE");
                }
                if x.optional != y.optional {
                    out.push("E_OPTIONAL");
                }
                if x.options.len() != y.options.len() {
                    out.push("E_OPTION_COUNT");
                } else if x.options.iter().zip(&y.options).any(|(o, p)| o.code != p.code) {
                    out.push("E_OPTION_CODES");
                }
                if x.slider != y.slider {
                    out.push("E_SLIDER_MISMATCH");
                }
            }
            _ => out.push("E_MISSING_VARIABLE"),
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// Element tally by explicit matching, one counter per kind.
pub fn reference_tally(qs: &[Questionnaire]) -> BTreeMap<ElementKind, usize> {
    let (mut page, mut text, mut question, mut headline, mut media) = (0, 0, 0, 0, 0);
    for q in qs {
        for e in &q.elements {
            match e {
                QuestionnaireElement::Page => page += 1,
                QuestionnaireElement::Text { .. } => text += 1,
                QuestionnaireElement::Question(_) => question += 1,
                QuestionnaireElement::Headline { .. } => headline += 1,
                QuestionnaireElement::Media { .. } => media += 1,
            }
        }
    }
    BTreeMap::from([
        (ElementKind::Page, page),
        (ElementKind::Text, text),
        (ElementKind::Question, question),
        (ElementKind::Headline, headline),
        (ElementKind::Media, media),
    ])
}
