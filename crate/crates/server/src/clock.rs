use std::time::{SystemTime, UNIX_EPOCH};

use ema_core::time::EpochMillis;

/// Source of "now" for the service. Fixed clocks make runs reproducible.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Clock {
    System,
    Fixed(EpochMillis),
}

impl Clock {
    pub fn now(self) -> EpochMillis {
        match self {
            Clock::System => SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_millis() as EpochMillis)
                .unwrap_or(0),
            Clock::Fixed(t) => t,
        }
    }
}
