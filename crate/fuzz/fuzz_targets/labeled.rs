#![no_main]

use libfuzzer_sys::fuzz_target;
use subsearch::filter::parse_labeled;
use subsearch::textcore::Normalizer;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = parse_labeled(text, &Normalizer::english());
    }
});
