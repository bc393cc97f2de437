#![no_main]

use libfuzzer_sys::fuzz_target;
use subsearch::vsm::VectorIndex;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(ix) = VectorIndex::from_json(text) {
            assert_eq!(VectorIndex::from_json(&ix.to_json()).unwrap().to_json(), ix.to_json());
        }
    }
});
