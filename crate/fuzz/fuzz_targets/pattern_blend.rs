#![no_main]

use libfuzzer_sys::fuzz_target;
use subsearch::patterns::{PatternBlend, PatternKind};

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(b) = text.parse::<PatternBlend>() {
            let _ = b.resolve(&PatternKind::ALL);
        }
    }
});
