//! Feedback rules: key-rule pairs evaluated against submitted answers to
//! produce immediate, translated feedback texts.
//!
//! Rules are written in a small condition language (see [`parser`]). A
//! comparison involving an unanswered variable is false, so partially
//! filled answersheets never trigger score-threshold feedback.

mod ast;
mod eval;
pub mod parser;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use ast::{CompareOp, Condition, Term};
pub use eval::{evaluate, evaluate_condition, Evaluation, FiredFeedback};
pub use parser::parse_rule;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RuleError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("rule references unknown variable `{variable}`")]
    UnknownVariable { variable: String },
    #[error("feedback `{key}` has no text for language `{language}`")]
    LangMissing { key: String, language: String },
}

impl RuleError {
    pub fn code(&self) -> &'static str {
        match self {
            Self::Syntax { .. } => "E_SYNTAX",
            Self::UnknownVariable { .. } => "E_UNKNOWN_VAR",
            Self::LangMissing { .. } => "E_LANG_MISSING",
        }
    }
}

/// A compiled key-rule pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeedbackRule {
    pub key: String,
    pub condition: Condition,
    pub texts: BTreeMap<String, String>,
}

/// Exchange form of a rule: the condition travels as source text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleSpec {
    pub key: String,
    pub rule: String,
    pub texts: BTreeMap<String, String>,
}

impl RuleSpec {
    pub fn compile(&self) -> Result<FeedbackRule, RuleError> {
        Ok(FeedbackRule { key: self.key.clone(), condition: parse_rule(&self.rule)?, texts: self.texts.clone() })
    }
}

impl FeedbackRule {
    pub fn to_spec(&self) -> RuleSpec {
        RuleSpec { key: self.key.clone(), rule: self.condition.to_string(), texts: self.texts.clone() }
    }
}

pub fn compile_all(specs: &[RuleSpec]) -> Result<Vec<FeedbackRule>, RuleError> {
    specs.iter().map(RuleSpec::compile).collect()
}

/// Checks that every variable the condition mentions is known.
pub fn bind(condition: &Condition, known: &BTreeSet<String>) -> Result<(), RuleError> {
    match condition.variables().into_iter().find(|v| !known.contains(*v)) {
        Some(v) => Err(RuleError::UnknownVariable { variable: v.to_string() }),
        None => Ok(()),
    }
}
