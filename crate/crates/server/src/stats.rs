//! Summary statistics over the store.
//!
//! A participant is verified once their token has been used. Active users
//! have submitted at least one answersheet; follow-up users at least one
//! follow-up. Operating system and age come from each user's first
//! answersheet and first baseline carrying a numeric `age` answer. Ratios
//! with an empty denominator are 0.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use ema_core::model::QuestionnaireKind;
use serde::{Deserialize, Serialize};

use crate::store::{Os, SheetSummary, Store, StoreResult};

pub const AGE_VARIABLE: &str = "age";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub verified_users: u64,
    pub active_users: u64,
    pub activation_rate: f64,
    pub followup_users: u64,
    pub followup_rate: f64,
    pub mean_followups_per_followup_user: f64,
    pub answersheets_total: u64,
    pub baseline_answersheets: u64,
    pub followup_answersheets: u64,
    pub android_users: u64,
    pub ios_users: u64,
    /// Android users per iOS user.
    pub os_ratio: f64,
    pub age_mean: f64,
    /// Sample standard deviation.
    pub age_sd: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub users_total: u64,
    pub history_entries: u64,
    pub global: SummaryStats,
    pub studies: BTreeMap<String, SummaryStats>,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Statistics over `sheets` (in submission order) for `verified` users.
pub fn summarize<'a>(verified: u64, sheets: impl IntoIterator<Item = &'a SheetSummary>) -> SummaryStats {
    let mut active = BTreeSet::new();
    let mut followup_users = BTreeSet::new();
    let mut first_os: HashMap<&str, Os> = HashMap::new();
    let mut ages: HashMap<&str, f64> = HashMap::new();
    let (mut total, mut baselines, mut followups) = (0, 0, 0);
    for s in sheets {
        total += 1;
        active.insert(s.user_id.as_str());
        first_os.entry(&s.user_id).or_insert(s.os);
        match s.kind {
            QuestionnaireKind::Baseline => {
                baselines += 1;
                if let Some(age) = s.answers.get(AGE_VARIABLE).and_then(|a| a.numeric()) {
                    ages.entry(&s.user_id).or_insert(age as f64);
                }
            }
            QuestionnaireKind::Followup => {
                followups += 1;
                followup_users.insert(s.user_id.as_str());
            }
        }
    }
    let android = first_os.values().filter(|o| **o == Os::Android).count() as u64;
    let ios = first_os.values().filter(|o| **o == Os::Ios).count() as u64;
    let mut age_values: Vec<f64> = ages.into_values().collect();
    // summation order must not depend on hash order
    age_values.sort_by(f64::total_cmp);
    let (age_mean, age_sd) = mean_sd(&age_values);
    let active_n = active.len() as u64;
    let followup_n = followup_users.len() as u64;
    SummaryStats {
        verified_users: verified,
        active_users: active_n,
        activation_rate: ratio(active_n, verified),
        followup_users: followup_n,
        followup_rate: ratio(followup_n, active_n),
        mean_followups_per_followup_user: ratio(followups, followup_n),
        answersheets_total: total,
        baseline_answersheets: baselines,
        followup_answersheets: followups,
        android_users: android,
        ios_users: ios,
        os_ratio: ratio(android, ios),
        age_mean,
        age_sd,
    }
}

/// Global figures plus one entry per study. Within a study, the verified
/// users are the verified subscribers of that study.
pub fn compute_summary(store: &Store) -> StoreResult<Summary> {
    let (users_total, verified, history_entries) = store.user_counts()?;
    let sheets = store.sheet_summaries()?;
    let mut subscribers: BTreeMap<String, u64> = BTreeMap::new();
    for (study, _) in store.verified_subscribers()? {
        *subscribers.entry(study).or_default() += 1;
    }
    let mut study_ids: BTreeSet<String> = store.studies()?.into_iter().map(|s| s.study_id).collect();
    study_ids.extend(sheets.iter().map(|s| s.study_id.clone()));
    let studies = study_ids
        .into_iter()
        .map(|id| {
            let v = subscribers.get(&id).copied().unwrap_or(0);
            let stats = summarize(v, sheets.iter().filter(|s| s.study_id == id));
            (id, stats)
        })
        .collect();
    Ok(Summary { users_total, history_entries, global: summarize(verified, &sheets), studies })
}
