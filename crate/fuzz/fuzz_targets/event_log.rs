#![no_main]

use ema_core::sensing::{parse_event_log, sleep_windows, Period};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(events) = parse_event_log(text) {
        if let (Some(first), Some(last)) = (events.first(), events.last()) {
            if let Ok(period) = Period::new(first.timestamp.min(last.timestamp), last.timestamp.max(first.timestamp)) {
                let _ = sleep_windows(&events, period);
            }
        }
    }
});
