use serde::{Deserialize, Serialize};

use super::ast::{Condition, Term};
use super::{FeedbackRule, RuleError};
use crate::model::Answers;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiredFeedback {
    pub key: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Evaluation {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub answersheet_id: Option<String>,
    pub fired: Vec<FiredFeedback>,
}

// i128 so that sums of up to MAX_RANGE_LEN i64 values cannot overflow.
fn term_value(term: &Term, answers: &Answers) -> Option<i128> {
    match term {
        Term::Int(n) => Some(i128::from(*n)),
        Term::Var(v) => answers.get(v)?.numeric().map(i128::from),
        Term::Sum(vs) => vs
            .iter()
            .map(|v| answers.get(v)?.numeric().map(i128::from))
            .sum::<Option<i128>>(),
    }
}

pub fn evaluate_condition(condition: &Condition, answers: &Answers) -> bool {
    match condition {
        Condition::Compare { op, lhs, rhs } => match (term_value(lhs, answers), term_value(rhs, answers)) {
            (Some(l), Some(r)) => op.apply(l, r),
            _ => false,
        },
        Condition::And(cs) => cs.iter().all(|c| evaluate_condition(c, answers)),
        Condition::Or(cs) => cs.iter().any(|c| evaluate_condition(c, answers)),
        Condition::Not(c) => !evaluate_condition(c, answers),
        Condition::Answered(v) => answers.contains_key(v),
    }
}

/// Fires every rule whose condition holds, in declaration order, with the
/// feedback text in `lang`.
pub fn evaluate(rules: &[FeedbackRule], answers: &Answers, lang: &str) -> Result<Evaluation, RuleError> {
    let mut fired = Vec::new();
    for rule in rules {
        if !evaluate_condition(&rule.condition, answers) {
            continue;
        }
        let text = rule
            .texts
            .get(lang)
            .ok_or_else(|| RuleError::LangMissing { key: rule.key.clone(), language: lang.to_string() })?;
        fired.push(FiredFeedback { key: rule.key.clone(), text: text.clone() });
    }
    Ok(Evaluation { answersheet_id: None, fired })
}
