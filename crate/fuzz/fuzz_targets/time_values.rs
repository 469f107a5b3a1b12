#![no_main]

use ema_core::time::{parse_rfc3339, TimeOfDay, UtcOffset};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    let _ = parse_rfc3339(s);
    if let Ok(o) = s.parse::<UtcOffset>() {
        assert_eq!(o.to_string().parse::<UtcOffset>().ok(), Some(o));
    }
    let _ = s.parse::<TimeOfDay>();
});
