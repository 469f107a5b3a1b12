//! Core building blocks of the EMA study platform.
//!
//! Everything in this crate is pure: values are immutable after
//! construction and every operation is a function of its inputs, so the
//! types can be shared freely between the service, the content pipeline
//! and test harnesses.

pub mod feedback;
pub mod model;
pub mod schedule;
pub mod sensing;
pub mod time;
pub mod validate;

pub use model::{
    AnswerValue, Answers, ElementKind, Questionnaire, QuestionnaireDocument, QuestionnaireElement,
    QuestionnaireKind, QuestionType, ResponseOption, ScheduleSpec, SliderRange, StudyMeta,
};
pub use validate::{check_cross_language, element_counts, validate_questionnaire, Issue, Location, ValidationReport};
