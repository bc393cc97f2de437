#![no_main]

use libfuzzer_sys::fuzz_target;
use subsearch::textcore::StemRules;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(rules) = StemRules::parse(text) {
            for w in ["running", "nations", "a", "sses", ""] {
                let _ = rules.stem(w);
            }
        }
    }
});
