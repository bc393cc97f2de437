#![no_main]

use libfuzzer_sys::fuzz_target;
use subsearch::textcore::StopwordSet;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = StopwordSet::parse(text);
    }
});
