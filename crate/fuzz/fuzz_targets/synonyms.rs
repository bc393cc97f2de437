#![no_main]

use libfuzzer_sys::fuzz_target;
use subsearch::textcore::{Normalizer, SynonymDictionary};

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(d) = SynonymDictionary::parse_tsv(text, &Normalizer::english()) {
            let seeds: Vec<String> = d.entries().keys().cloned().collect();
            let closure = d.closure_of(&seeds);
            assert!(seeds.iter().all(|s| closure.contains(s)));
        }
    }
});
