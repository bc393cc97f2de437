#![no_main]

use libfuzzer_sys::fuzz_target;
use subsearch::textcore::{AuthorityDictionary, Normalizer};

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = AuthorityDictionary::parse_jsonl(text, &Normalizer::english());
    }
});
