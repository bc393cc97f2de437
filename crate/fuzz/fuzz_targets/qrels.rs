#![no_main]

use libfuzzer_sys::fuzz_target;
use subsearch::store::RelevanceJudgments;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(q) = RelevanceJudgments::parse_tsv(text) {
            assert_eq!(RelevanceJudgments::parse_tsv(&q.to_tsv()).unwrap(), q);
        }
    }
});
