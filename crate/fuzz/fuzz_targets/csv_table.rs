#![no_main]

use ema_pipeline::table::{parse_records, parse_table, write_table};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let _ = parse_records(text);
    if let Ok(table) = parse_table(text) {
        let _ = parse_table(&write_table(&table));
    }
});
