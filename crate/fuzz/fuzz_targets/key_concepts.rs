#![no_main]

use libfuzzer_sys::fuzz_target;
use subsearch::textcore::{KeyConceptSet, Normalizer};

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(q0) = KeyConceptSet::parse(text, &Normalizer::english()) {
            assert!(!q0.is_empty());
        }
    }
});
