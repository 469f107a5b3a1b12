#![no_main]

use ema_core::model::QuestionnaireDocument;
use ema_core::validate::validate_document;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(doc) = serde_json::from_slice::<QuestionnaireDocument>(data) {
        let _ = validate_document(&doc);
        let _ = doc.to_canonical_json();
    }
});
