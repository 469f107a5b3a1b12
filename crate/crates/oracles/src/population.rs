//! A synthetic participant population with exact published totals, and a
//! generator of valid answers for any questionnaire.
//!
//! Totals are fixed by construction; only their distribution over users and
//! studies is random.

use std::collections::BTreeSet;

use ema_core::model::{AnswerValue, Answers, Question, QuestionType, Questionnaire};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::corpus::STUDIES;

pub const VERIFIED_USERS: usize = 7_290;
pub const ACTIVE_USERS: usize = 2_802;
pub const SUBSCRIPTIONS: usize = 4_495;
pub const REPEATED_BASELINES: usize = 52;
pub const FOLLOWUP_USERS: usize = 1_476;
pub const FOLLOWUP_SHEETS: usize = 12_694;
pub const ANSWERSHEETS: usize = SUBSCRIPTIONS + REPEATED_BASELINES + FOLLOWUP_SHEETS;
/// Users who log in but never use their token.
pub const UNVERIFIED_USERS: usize = 411;
pub const ANDROID_SHARE: f64 = 0.8;
pub const AGE_MEAN: f64 = 40.34;
pub const AGE_SD: f64 = 14.75;
pub const AGE_MIN: i64 = 12;
pub const AGE_MAX: i64 = 120;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Enrollment {
    pub study_id: String,
    /// 1, or 2 when the baseline is submitted again.
    pub baselines: usize,
    pub followups: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimUser {
    /// `"android"` or `"ios"`.
    pub os: &'static str,
    pub age: i64,
    /// Empty for users who never fill out anything.
    pub enrollments: Vec<Enrollment>,
}

impl SimUser {
    pub fn sheets(&self) -> usize {
        self.enrollments.iter().map(|e| e.baselines + e.followups).sum()
    }
}

#[derive(Debug, Clone)]
pub struct Population {
    pub verified: Vec<SimUser>,
    pub unverified: usize,
}

/// Spreads `extra` units over `slots` uniformly at random, never letting a
/// slot exceed `cap`.
fn spread(rng: &mut impl Rng, counts: &mut [usize], extra: usize, cap: usize) {
    for _ in 0..extra {
        loop {
            let i = rng.random_range(0..counts.len());
            if counts[i] < cap {
                counts[i] += 1;
                break;
            }
        }
    }
}

pub fn population(rng: &mut impl Rng) -> Population {
    let ages = Normal::new(AGE_MEAN, AGE_SD).expect("valid normal");
    let mut users: Vec<SimUser> = (0..VERIFIED_USERS)
        .map(|_| SimUser {
            os: "ios",
            age: (ages.sample(rng).round() as i64).clamp(AGE_MIN, AGE_MAX),
            enrollments: Vec::new(),
        })
        .collect();

    let mut order: Vec<usize> = (0..VERIFIED_USERS).collect();
    order.shuffle(rng);
    let (active, inactive) = order.split_at(ACTIVE_USERS);
    // exact share in both groups, so the active users' ratio is fixed too
    for group in [active, inactive] {
        let android = (group.len() as f64 * ANDROID_SHARE).round() as usize;
        for &u in &group[..android] {
            users[u].os = "android";
        }
    }

    let mut per_user = vec![1; ACTIVE_USERS];
    spread(rng, &mut per_user, SUBSCRIPTIONS - ACTIVE_USERS, STUDIES.len());
    for (slot, &u) in active.iter().enumerate() {
        let mut studies: Vec<&str> = STUDIES.to_vec();
        studies.shuffle(rng);
        users[u].enrollments = studies[..per_user[slot]]
            .iter()
            .map(|s| Enrollment { study_id: s.to_string(), baselines: 1, followups: 0 })
            .collect();
    }

    // (user, enrollment) of every subscription
    let subs: Vec<(usize, usize)> =
        active.iter().flat_map(|&u| (0..users[u].enrollments.len()).map(move |e| (u, e))).collect();
    for &(u, e) in subs.choose_multiple(rng, REPEATED_BASELINES) {
        users[u].enrollments[e].baselines = 2;
    }

    let followup_users: Vec<usize> = active.choose_multiple(rng, FOLLOWUP_USERS).copied().collect();
    let fsubs: Vec<(usize, usize)> = followup_users
        .iter()
        .map(|&u| (u, rng.random_range(0..users[u].enrollments.len())))
        .collect();
    let mut counts = vec![1; fsubs.len()];
    spread(rng, &mut counts, FOLLOWUP_SHEETS - FOLLOWUP_USERS, 60);
    for ((u, e), n) in fsubs.into_iter().zip(counts) {
        users[u].enrollments[e].followups = n;
    }
    Population { verified: users, unverified: UNVERIFIED_USERS }
}

fn answer(rng: &mut impl Rng, q: &Question) -> AnswerValue {
    let codes: Vec<i64> = q.options.iter().map(|o| o.code).collect();
    match q.question_type {
        QuestionType::SingleChoice => AnswerValue::Code(*codes.choose(rng).expect("choice questions have options")),
        QuestionType::MultiChoice => {
            let picked: BTreeSet<i64> = codes.iter().copied().filter(|_| rng.random_bool(0.4)).collect();
            AnswerValue::Codes(picked.into_iter().collect())
        }
        QuestionType::Yesno => {
            let legal = if codes.is_empty() { vec![0, 1] } else { codes };
            AnswerValue::Code(*legal.choose(rng).expect("non-empty"))
        }
        QuestionType::Slider => {
            let r = q.slider.expect("sliders carry a range");
            let admitted: Vec<i64> =
                (r.min.ceil() as i64..=r.max.floor() as i64).filter(|v| r.admits(*v as f64)).collect();
            AnswerValue::Code(*admitted.choose(rng).expect("slider admits an integer"))
        }
        QuestionType::TextInput => AnswerValue::Text("no comment".into()),
        QuestionType::Date => AnswerValue::Text(format!("2021-0{}-1{}", rng.random_range(1..10), rng.random_range(0..10))),
    }
}

/// A complete valid answer set. Optional questions are skipped at random;
/// the `age` question, when present, gets `age`.
pub fn valid_answers(rng: &mut impl Rng, q: &Questionnaire, age: i64) -> Answers {
    let mut answers = Answers::new();
    for question in q.questions() {
        if question.variable == "age" {
            answers.insert(question.variable.clone(), AnswerValue::Code(age));
            continue;
        }
        if question.optional && rng.random_bool(0.25) {
            continue;
        }
        answers.insert(question.variable.clone(), answer(rng, question));
    }
    answers
}
