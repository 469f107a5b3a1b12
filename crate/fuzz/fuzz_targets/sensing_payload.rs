#![no_main]

use ema_core::sensing::{GridLocation, UsageReport};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(report) = serde_json::from_slice::<UsageReport>(data) {
        let _ = report.problems();
    }
    let _ = serde_json::from_slice::<GridLocation>(data);
});
