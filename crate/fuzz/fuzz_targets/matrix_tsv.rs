#![no_main]

use libfuzzer_sys::fuzz_target;
use subsearch::patterns::SimilarityMatrix;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(m) = SimilarityMatrix::from_tsv(text) {
            assert_eq!(SimilarityMatrix::from_tsv(&m.to_tsv()).unwrap(), m);
        }
    }
});
