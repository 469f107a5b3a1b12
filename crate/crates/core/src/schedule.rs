//! Follow-up notification plans.
//!
//! A plan is activated when a participant submits the baseline
//! questionnaire. From then on a tick falls due every `interval`, shifted
//! into the daily delivery window. Due ticks are computed on demand against
//! a caller-supplied clock.
//!
//! Fill-outs are matched to ticks one at a time, in chronological order:
//!
//! 1. A fill answers the most recent unanswered tick at or before it, if
//!    that tick is at most one interval old.
//! 2. Otherwise it pre-answers the first tick after it, if that tick is at
//!    most one interval away.
//! 3. Otherwise it is recorded and answers nothing.
//!
//! Of the unanswered ticks that have passed, only the latest `max_pending`
//! are candidates; fired ticks are then removed. Older missed ticks never
//! resurface.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::ScheduleSpec;
use crate::time::{EpochMillis, UtcOffset};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScheduleError {
    #[error("subscription `{0}` already has a notification plan")]
    DuplicatePlan(String),
    #[error("fill-out at {time} precedes plan activation at {activated_at}")]
    BeforeActivation { time: EpochMillis, activated_at: EpochMillis },
    #[error("no subscription `{0}`")]
    NoSubscription(String),
}

impl ScheduleError {
    pub fn code(&self) -> &'static str {
        match self {
            Self::DuplicatePlan(_) => "E_DUPLICATE_PLAN",
            Self::BeforeActivation { .. } => "E_BEFORE_ACTIVATION",
            Self::NoSubscription(_) => "E_NO_SUBSCRIPTION",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NotificationPlan {
    pub subscription_id: String,
    pub activated_at: EpochMillis,
    pub schedule: ScheduleSpec,
    /// Offset that places the delivery window on local days.
    #[serde(default)]
    pub offset: UtcOffset,
    pub fired: Vec<EpochMillis>,
    pub filled: Vec<EpochMillis>,
}

pub fn activate(
    subscription_id: impl Into<String>,
    baseline_time: EpochMillis,
    schedule: ScheduleSpec,
    offset: UtcOffset,
) -> NotificationPlan {
    NotificationPlan {
        subscription_id: subscription_id.into(),
        activated_at: baseline_time,
        schedule,
        offset,
        fired: Vec::new(),
        filled: Vec::new(),
    }
}

impl NotificationPlan {
    /// Time of tick `k` (k ≥ 1), shifted into the delivery window of its day.
    pub fn tick(&self, k: i64) -> EpochMillis {
        let raw = self.activated_at + k * self.schedule.interval_ms();
        let into_day = self.offset.ms_into_day(raw);
        let midnight = raw - into_day;
        let start = self.schedule.window_start.millis();
        let end = self.schedule.window_end.millis();
        midnight + into_day.clamp(start, end)
    }

    /// Ticks up to and including `now`.
    fn ticks_until(&self, now: EpochMillis) -> Vec<EpochMillis> {
        (1..).map(|k| self.tick(k)).take_while(|t| *t <= now).collect()
    }

    /// Index (0-based, tick k = index + 1) of the first tick strictly after `t`.
    fn first_tick_after(&self, t: EpochMillis) -> usize {
        let interval = self.schedule.interval_ms();
        // The window shift moves a tick by less than a day, and intervals
        // are at least a day, so start one interval early and walk forward.
        let mut k = ((t - self.activated_at) / interval).max(1);
        while k > 1 && self.tick(k - 1) > t {
            k -= 1;
        }
        while self.tick(k) <= t {
            k += 1;
        }
        (k - 1) as usize
    }

    /// Which ticks up to `now` have been answered by fill-outs up to `now`.
    fn answered(&self, ticks: &[EpochMillis], now: EpochMillis) -> Vec<bool> {
        let interval = self.schedule.interval_ms();
        let mut fills: Vec<EpochMillis> = self.filled.iter().copied().filter(|f| *f <= now).collect();
        fills.sort_unstable();
        let mut answered = vec![false; ticks.len()];
        for f in fills {
            let before = ticks.partition_point(|t| *t <= f);
            let backward = (0..before)
                .rev()
                .take_while(|&i| f - ticks[i] <= interval)
                .find(|&i| !answered[i]);
            if let Some(i) = backward {
                answered[i] = true;
                continue;
            }
            let next = self.first_tick_after(f);
            let next_time = self.tick(next as i64 + 1);
            if next_time - f > interval {
                continue;
            }
            // ticks beyond `now` cannot be due yet
            if let Some(slot) = answered.get_mut(next) {
                *slot = true;
            }
        }
        answered
    }

    /// Ticks due at `now`, ascending. At most `max_pending` entries.
    pub fn due_notifications(&self, now: EpochMillis) -> Vec<EpochMillis> {
        if now < self.activated_at {
            return Vec::new();
        }
        let ticks = self.ticks_until(now);
        let answered = self.answered(&ticks, now);
        let open: Vec<EpochMillis> = ticks.iter().zip(&answered).filter(|(_, a)| !**a).map(|(t, _)| *t).collect();
        let keep = (self.schedule.max_pending as usize).min(open.len());
        open[open.len() - keep..].iter().copied().filter(|t| !self.fired.contains(t)).collect()
    }

    /// Marks ticks as delivered so they are never reported again.
    pub fn mark_fired(&mut self, ticks: &[EpochMillis]) {
        for t in ticks {
            if *t >= self.activated_at && !self.fired.contains(t) {
                self.fired.push(*t);
            }
        }
        self.fired.sort_unstable();
    }

    pub fn record_fillout(&mut self, time: EpochMillis) -> Result<(), ScheduleError> {
        if time < self.activated_at {
            return Err(ScheduleError::BeforeActivation { time, activated_at: self.activated_at });
        }
        self.filled.push(time);
        Ok(())
    }
}

/// In-memory plan registry keyed by subscription id.
#[derive(Debug, Default, Clone)]
pub struct Plans {
    plans: HashMap<String, NotificationPlan>,
}

impl Plans {
    pub fn activate(
        &mut self,
        subscription_id: &str,
        baseline_time: EpochMillis,
        schedule: ScheduleSpec,
        offset: UtcOffset,
    ) -> Result<&NotificationPlan, ScheduleError> {
        if self.plans.contains_key(subscription_id) {
            return Err(ScheduleError::DuplicatePlan(subscription_id.to_string()));
        }
        let plan = activate(subscription_id, baseline_time, schedule, offset);
        Ok(self.plans.entry(subscription_id.to_string()).or_insert(plan))
    }

    pub fn get(&self, subscription_id: &str) -> Option<&NotificationPlan> {
        self.plans.get(subscription_id)
    }

    pub fn get_mut(&mut self, subscription_id: &str) -> Option<&mut NotificationPlan> {
        self.plans.get_mut(subscription_id)
    }
}
