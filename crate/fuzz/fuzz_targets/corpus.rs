#![no_main]

use libfuzzer_sys::fuzz_target;
use subsearch::store::Corpus;
use subsearch::textcore::Normalizer;
use subsearch::vsm::VectorIndex;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let n = Normalizer::english();
        if let Ok(c) = Corpus::from_jsonl(text, "fuzz", &n) {
            assert_eq!(Corpus::from_jsonl(text, "fuzz", &n).unwrap(), c);
            let _ = VectorIndex::build(&c);
        }
    }
});
