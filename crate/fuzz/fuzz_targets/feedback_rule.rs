#![no_main]

use ema_core::feedback::{evaluate_condition, parse_rule};
use ema_core::model::{AnswerValue, Answers};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else { return };
    if let Ok(cond) = parse_rule(src) {
        let mut answers = Answers::new();
        evaluate_condition(&cond, &answers);
        for v in cond.variables() {
            answers.insert(v.to_string(), AnswerValue::Code(i64::MAX));
        }
        evaluate_condition(&cond, &answers);
    }
});
