//! Random rule sets and a direct tree-walking reference interpreter.

use std::collections::BTreeMap;

use ema_core::feedback::{CompareOp, Condition, FeedbackRule, Term};
use ema_core::model::{AnswerValue, Answers};
use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

pub const VARIABLES: [&str; 8] = ["s1", "s2", "s3", "s4", "mood", "sleep_h", "q10", "q11"];
pub const LANGUAGES: [&str; 2] = ["en", "de"];

fn random_int(rng: &mut impl Rng) -> i64 {
    match rng.random_range(0..20) {
        0 => i64::MAX,
        1 => i64::MIN,
        2 => rng.random_range(-1000..1000),
        _ => rng.random_range(-3..15),
    }
}

fn random_var(rng: &mut impl Rng) -> String {
    VARIABLES.choose(rng).expect("non-empty").to_string()
}

pub fn random_term(rng: &mut impl Rng) -> Term {
    match rng.random_range(0..3) {
        0 => Term::Int(random_int(rng)),
        1 => Term::Var(random_var(rng)),
        _ => Term::Sum((0..rng.random_range(1..5)).map(|_| random_var(rng)).collect()),
    }
}

pub fn random_condition(rng: &mut impl Rng, depth: u32) -> Condition {
    let leaf = depth == 0 || rng.random_bool(0.35);
    if leaf {
        return if rng.random_bool(0.8) {
            Condition::Compare {
                op: *CompareOp::ALL.choose(rng).expect("non-empty"),
                lhs: random_term(rng),
                rhs: random_term(rng),
            }
        } else {
            Condition::Answered(random_var(rng))
        };
    }
    match rng.random_range(0..3) {
        0 => Condition::And((0..rng.random_range(2..4)).map(|_| random_condition(rng, depth - 1)).collect()),
        1 => Condition::Or((0..rng.random_range(2..4)).map(|_| random_condition(rng, depth - 1)).collect()),
        _ => Condition::Not(Box::new(random_condition(rng, depth - 1))),
    }
}

pub fn random_answers(rng: &mut impl Rng) -> Answers {
    let mut answers = Answers::new();
    for v in VARIABLES {
        if !rng.random_bool(0.75) {
            continue;
        }
        let value = match rng.random_range(0..12) {
            0 => AnswerValue::Text("free text".into()),
            1 => AnswerValue::Codes((0..rng.random_range(0..3)).map(|_| rng.random_range(0..5)).collect()),
            2 => AnswerValue::Code(random_int(rng)),
            _ => AnswerValue::Code(rng.random_range(0..6)),
        };
        answers.insert(v.to_string(), value);
    }
    answers
}

pub fn random_rules(rng: &mut impl Rng) -> Vec<FeedbackRule> {
    let n = rng.random_range(0..6);
    (0..n)
        .map(|i| {
            let mut texts = BTreeMap::new();
            for lang in LANGUAGES {
                // occasionally leave a translation out to exercise the error path
                if rng.random_range(0..40) != 0 {
                    texts.insert(lang.to_string(), format!("feedback {i} ({lang})"));
                }
            }
            FeedbackRule { key: format!("k{i}"), condition: random_condition(rng, 3), texts }
        })
        .collect()
}

/// Numeric value of one answer, by the documented rules: codes as-is,
/// multi-choice as the sum of codes, text as missing.
fn reference_value(answers: &Answers, var: &str) -> Option<i128> {
    match answers.get(var)? {
        AnswerValue::Code(c) => Some(*c as i128),
        AnswerValue::Codes(cs) => {
            let mut total: i128 = 0;
            for c in cs {
                total += *c as i128;
            }
            // i64 overflow of the selection sum counts as no value
            if total > i64::MAX as i128 || total < i64::MIN as i128 {
                None
            } else {
                Some(total)
            }
        }
        AnswerValue::Text(_) => None,
    }
}

fn reference_term(term: &Term, answers: &Answers) -> Option<i128> {
    match term {
        Term::Int(n) => Some(*n as i128),
        Term::Var(v) => reference_value(answers, v),
        Term::Sum(vs) => {
            let mut total: i128 = 0;
            for v in vs {
                total += reference_value(answers, v)?;
            }
            Some(total)
        }
    }
}

pub fn reference_holds(cond: &Condition, answers: &Answers) -> bool {
    match cond {
        Condition::Compare { op, lhs, rhs } => {
            let (Some(l), Some(r)) = (reference_term(lhs, answers), reference_term(rhs, answers)) else {
                return false;
            };
            match op.symbol() {
                "<" => l < r,
                "<=" => l <= r,
                "==" => l == r,
                "!=" => l != r,
                ">=" => l >= r,
                ">" => l > r,
                other => unreachable!("operator {other}"),
            }
        }
        Condition::And(cs) => {
            let mut all = true;
            for c in cs {
                all &= reference_holds(c, answers);
            }
            all
        }
        Condition::Or(cs) => {
            let mut any = false;
            for c in cs {
                any |= reference_holds(c, answers);
            }
            any
        }
        Condition::Not(c) => !reference_holds(c, answers),
        Condition::Answered(v) => answers.keys().any(|k| k == v),
    }
}

/// Expected outcome: fired `(key, text)` pairs, or the key of the first
/// fired rule lacking a translation.
pub fn reference_evaluate(rules: &[FeedbackRule], answers: &Answers, lang: &str) -> Result<Vec<(String, String)>, String> {
    let mut fired = Vec::new();
    for rule in rules {
        if reference_holds(&rule.condition, answers) {
            match rule.texts.get(lang) {
                Some(t) => fired.push((rule.key.clone(), t.clone())),
                None => return Err(rule.key.clone()),
            }
        }
    }
    Ok(fired)
}

/// One entry of the shared feedback test-vector corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestVector {
    pub rules: Vec<ema_core::feedback::RuleSpec>,
    pub answers: Answers,
    pub lang: String,
    /// Fired `(key, text)` pairs, or `None` when evaluation fails with
    /// `E_LANG_MISSING`.
    pub fired: Option<Vec<ema_core::feedback::FiredFeedback>>,
}

pub fn generate_vectors(seed: u64, n: usize) -> Vec<TestVector> {
    let mut rng = crate::rng(seed);
    (0..n)
        .map(|_| {
            let rules = random_rules(&mut rng);
            let answers = random_answers(&mut rng);
            let lang = LANGUAGES.choose(&mut rng).expect("non-empty").to_string();
            let fired = reference_evaluate(&rules, &answers, &lang).ok().map(|f| {
                f.into_iter().map(|(key, text)| ema_core::feedback::FiredFeedback { key, text }).collect()
            });
            TestVector { rules: rules.iter().map(FeedbackRule::to_spec).collect(), answers, lang, fired }
        })
        .collect()
}
